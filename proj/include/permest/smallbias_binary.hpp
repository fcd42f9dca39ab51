#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "permest/errors.hpp"
#include "permest/sample_space.hpp"

namespace permest {

inline constexpr unsigned kMaxSeedBits = 40;
inline constexpr unsigned kMaxExhaustiveBinaryN = 24;
inline constexpr unsigned kMaxAuditLog2 = 32;

/// Binary extension field GF(2^m), elements stored as bit patterns of
/// polynomials over GF(2), reduced modulo a fixed irreducible polynomial.
class GF2m {
 public:
  static constexpr unsigned kMaxDegree = 20;

  /// Low-weight irreducible polynomials, indexed by degree (bit d = x^d).
  static constexpr std::array<std::uint32_t, kMaxDegree + 1> kPolynomials = {
      0x0,     0x3,     0x7,     0xB,     0x13,    0x25,     0x43,    0x83,    0x11D,   0x211,   0x409,
      0x805,   0x1053,  0x201B,  0x4443,  0x8003,  0x1100B,  0x20009, 0x40081, 0x80027, 0x100009};

  explicit GF2m(unsigned degree) : degree_(degree) {
    if (degree == 0 || degree > kMaxDegree) throw CapacityError("field degree must be in 1..20");
    poly_ = kPolynomials[degree];
  }

  GF2m(unsigned degree, std::uint32_t poly) : degree_(degree), poly_(poly) {
    if (degree == 0 || degree > kMaxDegree) throw CapacityError("field degree must be in 1..20");
    if (std::bit_width(poly) != degree + 1) throw DomainError("polynomial degree does not match field degree");
    if (!irreducible(poly)) throw DomainError("polynomial is reducible over GF(2)");
  }

  /// Trial division by every polynomial of degree 1..deg/2.
  static bool irreducible(std::uint32_t poly) {
    const int deg = static_cast<int>(std::bit_width(poly)) - 1;
    if (deg < 1) return false;
    for (std::uint32_t d = 2; static_cast<int>(std::bit_width(d)) - 1 <= deg / 2; ++d) {
      std::uint32_t r = poly;
      const int dd = static_cast<int>(std::bit_width(d)) - 1;
      for (int shift = deg - dd; shift >= 0; --shift)
        if (r & (std::uint32_t{1} << (shift + dd))) r ^= d << shift;
      if (r == 0) return false;
    }
    return true;
  }

  unsigned degree() const noexcept { return degree_; }
  std::uint32_t polynomial() const noexcept { return poly_; }
  std::uint64_t size() const noexcept { return std::uint64_t{1} << degree_; }

  /// Carry-less multiply with interleaved reduction.
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const noexcept {
    std::uint32_t acc = 0;
    const std::uint32_t top = std::uint32_t{1} << degree_;
    while (b) {
      if (b & 1) acc ^= a;
      b >>= 1;
      a <<= 1;
      if (a & top) a ^= poly_;
    }
    return acc;
  }

 private:
  unsigned degree_;
  std::uint32_t poly_;
};

/// Parity of the GF(2) inner product of two bit patterns.
inline unsigned inner_bit(std::uint32_t a, std::uint32_t b) noexcept {
  return static_cast<unsigned>(std::popcount(a & b) & 1);
}

namespace detail {

/// Shortest decimal that parses back to the same double.
inline std::string format_eps(double eps) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, eps);
  return std::string(buf, res.ptr);
}

inline std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%X", v);
  return buf;
}

}  // namespace detail

/// Field degree used for n coordinates at bias epsilon: ceil(log2(n / epsilon)), at least 1.
inline unsigned binary_field_degree(std::size_t n, double epsilon) {
  const double bits = std::ceil(std::log2(static_cast<double>(n) / epsilon) - 1e-12);
  return static_cast<unsigned>(std::max(1.0, bits));
}

/// Powering construction over GF(2^m): a seed is a pair (x, y) of field
/// elements and coordinate i of the output is <x^i, y> over GF(2), i = 0..n-1.
/// For a nonzero test vector a, the character sum vanishes unless x is a
/// root of the degree <= n-1 polynomial sum_i a_i t^i, so the bias is at
/// most (n-1)/2^m <= n/2^m <= epsilon.
inline SampleSpace binary_space_from_field(std::size_t n, const GF2m& field, double declared_epsilon) {
  const unsigned m = field.degree();
  if (2 * m > kMaxSeedBits) throw CapacityError("seed space exceeds 2^40");
  std::ostringstream desc;
  desc << "binary n=" << n << " m=" << m << " poly=" << detail::hex(field.polynomial())
       << " eps=" << detail::format_eps(declared_epsilon);
  const std::uint32_t mask = (std::uint32_t{1} << m) - 1;
  auto gen = [field, m, mask](std::uint64_t seed, std::span<std::uint32_t> out) {
    const auto x = static_cast<std::uint32_t>(seed >> m);
    const auto y = static_cast<std::uint32_t>(seed) & mask;
    std::uint32_t power = 1;
    for (std::uint32_t& bit : out) {
      bit = inner_bit(power, y);
      power = field.mul(power, x);
    }
  };
  return SampleSpace(std::vector<std::uint32_t>(n, 2), std::uint64_t{1} << (2 * m), declared_epsilon, desc.str(),
                     std::move(gen));
}

/// An epsilon-biased space over {0,1}^n with 2 * ceil(log2(n/epsilon)) seed bits.
inline SampleSpace build_binary_space(std::size_t n, double epsilon) {
  if (n == 0) throw DomainError("n must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  const unsigned m = binary_field_degree(n, epsilon);
  if (2 * m > kMaxSeedBits) {
    throw CapacityError("n = " + std::to_string(n) + ", epsilon = " + detail::format_eps(epsilon) + " needs " +
                        std::to_string(2 * m) + " seed bits (limit 40)");
  }
  return binary_space_from_field(n, GF2m(m), epsilon);
}

/// The uniform distribution on {0,1}^n; 0-biased.
inline SampleSpace exhaustive_binary_space(std::size_t n) {
  if (n == 0) throw DomainError("n must be at least 1");
  if (n > kMaxExhaustiveBinaryN) throw CapacityError("exhaustive binary space limited to n <= 24");
  auto gen = [](std::uint64_t seed, std::span<std::uint32_t> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint32_t>((seed >> i) & 1);
  };
  return SampleSpace(std::vector<std::uint32_t>(n, 2), std::uint64_t{1} << n, 0.0,
                     "binary n=" + std::to_string(n) + " exhaustive", std::move(gen));
}

/// Bias of a binary space: max over nonzero a of |E[(-1)^{a.x}]|, by full
/// enumeration. Requires 2^seed_bits * 2^n <= 2^32.
///
/// For n <= 24 the seed histogram is Walsh-Hadamard transformed in exact
/// integer arithmetic; larger n falls back to per-character sums.
inline double measure_bias(const SampleSpace& space) {
  if (!space.is_binary()) throw DomainError("measure_bias expects a binary space");
  const std::size_t n = space.dimension();
  if (n > 63 || space.seed_bits() + n > kMaxAuditLog2) {
    throw CapacityError("bias audit would need more than 2^32 operations");
  }
  const auto total = static_cast<double>(space.seed_count());

  std::vector<std::uint64_t> points;
  points.reserve(space.seed_count());
  space.for_each([&](std::uint64_t, std::span<const std::uint32_t> ph) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) bits |= std::uint64_t{ph[i]} << i;
    points.push_back(bits);
  });

  if (n <= 24) {
    std::vector<std::int64_t> w(std::size_t{1} << n, 0);
    for (std::uint64_t p : points) ++w[p];
    for (std::size_t len = 1; len < w.size(); len <<= 1) {
      for (std::size_t i = 0; i < w.size(); i += 2 * len) {
        for (std::size_t j = i; j < i + len; ++j) {
          const std::int64_t u = w[j], v = w[j + len];
          w[j] = u + v;
          w[j + len] = u - v;
        }
      }
    }
    std::int64_t worst = 0;
    for (std::size_t a = 1; a < w.size(); ++a) worst = std::max(worst, w[a] < 0 ? -w[a] : w[a]);
    return static_cast<double>(worst) / total;
  }

  std::int64_t worst = 0;
  for (std::uint64_t a = 1; a < (std::uint64_t{1} << n); ++a) {
    std::int64_t acc = 0;
    for (std::uint64_t p : points) acc += (std::popcount(a & p) & 1) ? -1 : 1;
    worst = std::max(worst, acc < 0 ? -acc : acc);
  }
  return static_cast<double>(worst) / total;
}

}  // namespace permest
