#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "permest/errors.hpp"
#include "permest/phase.hpp"

namespace permest {

/// Multidimensional DFT over Z_{m_0} x ... x Z_{m_{k-1}} in place, coordinate 0
/// least significant: out[e] = sum_x in[x] * prod_i w_i^{sign * e_i x_i}.
inline void mixed_radix_dft(std::vector<cplx>& f, std::span<const std::uint32_t> moduli, int sign) {
  std::uint64_t stride = 1;
  std::vector<cplx> line;
  const std::uint64_t total = f.size();
  for (const std::uint32_t m : moduli) {
    std::vector<cplx> roots(m);
    for (std::uint32_t r = 0; r < m; ++r) roots[r] = root_of_unity(sign > 0 ? r : (m - r) % m, m);
    line.resize(m);
    const std::uint64_t block = stride * m;
    for (std::uint64_t base = 0; base < total; base += block) {
      for (std::uint64_t off = 0; off < stride; ++off) {
        for (std::uint32_t e = 0; e < m; ++e) {
          cplx acc = 0.0;
          for (std::uint32_t x = 0; x < m; ++x) acc += f[base + off + x * stride] * roots[(std::uint64_t{e} * x) % m];
          line[e] = acc;
        }
        for (std::uint32_t e = 0; e < m; ++e) f[base + off + e * stride] = line[e];
      }
    }
    stride = block;
  }
}

/// A finite distribution over phase vectors given as a deterministic map from
/// seeds 0..seed_count-1. Uniform over seeds; the multiset of outputs is the
/// support.
///
/// A space may also carry a character provider computing
/// E[x_1^{e_1} ... x_k^{e_k}] for every exponent vector e exactly without
/// visiting each seed. Without one, characters come from the seed histogram.
class SampleSpace {
 public:
  using Generator = std::function<void(std::uint64_t seed, std::span<std::uint32_t> phases)>;
  using CharacterProvider = std::function<std::vector<cplx>()>;

  SampleSpace(std::vector<std::uint32_t> moduli, std::uint64_t seed_count, double declared_epsilon,
              std::string descriptor, Generator generator)
      : moduli_(std::move(moduli)),
        seed_count_(seed_count),
        declared_epsilon_(declared_epsilon),
        descriptor_(std::move(descriptor)),
        generator_(std::move(generator)) {
    if (seed_count_ == 0) throw DomainError("sample space needs at least one seed");
    for (std::uint32_t m : moduli_)
      if (m == 0) throw DomainError("moduli must be positive");
  }

  std::span<const std::uint32_t> moduli() const noexcept { return moduli_; }
  std::size_t dimension() const noexcept { return moduli_.size(); }
  std::uint64_t domain_size() const noexcept { return permest::domain_size(moduli_); }
  std::uint64_t seed_count() const noexcept { return seed_count_; }
  /// ceil(log2(seed_count)).
  unsigned seed_bits() const noexcept { return static_cast<unsigned>(std::bit_width(seed_count_ - 1)); }
  double declared_epsilon() const noexcept { return declared_epsilon_; }
  const std::string& descriptor() const noexcept { return descriptor_; }

  bool is_binary() const noexcept {
    for (std::uint32_t m : moduli_)
      if (m != 2) return false;
    return true;
  }

  void generate(std::uint64_t seed, std::span<std::uint32_t> phases) const {
    if (seed >= seed_count_) throw DomainError("seed out of range");
    if (phases.size() != moduli_.size()) throw DomainError("phase buffer has wrong length");
    generator_(seed, phases);
  }

  PhaseVector point(std::uint64_t seed) const {
    std::vector<std::uint32_t> ph(moduli_.size());
    generate(seed, ph);
    return PhaseVector(moduli_, std::move(ph));
  }

  /// Calls f(seed, phases) for every seed in order.
  template <class F>
  void for_each(F&& f) const {
    std::vector<std::uint32_t> ph(moduli_.size());
    for (std::uint64_t seed = 0; seed < seed_count_; ++seed) {
      generator_(seed, ph);
      f(seed, std::span<const std::uint32_t>(ph));
    }
  }

  /// Mixed-radix index of a point (coordinate 0 least significant).
  static std::uint64_t pack(std::span<const std::uint32_t> phases, std::span<const std::uint32_t> moduli) {
    std::uint64_t idx = 0;
    for (std::size_t i = phases.size(); i-- > 0;) idx = idx * moduli[i] + phases[i];
    return idx;
  }

  static void unpack(std::uint64_t idx, std::span<const std::uint32_t> moduli, std::span<std::uint32_t> out) {
    for (std::size_t i = 0; i < moduli.size(); ++i) {
      out[i] = static_cast<std::uint32_t>(idx % moduli[i]);
      idx /= moduli[i];
    }
  }

  /// Seed counts per domain point, by enumerating every seed.
  std::vector<std::uint64_t> histogram(std::uint64_t cap = std::uint64_t{1} << 26) const {
    const std::uint64_t domain = domain_size();
    if (domain > cap) throw CapacityError("domain too large for a histogram");
    std::vector<std::uint64_t> counts(domain, 0);
    for_each([&](std::uint64_t, std::span<const std::uint32_t> ph) { ++counts[pack(ph, moduli_)]; });
    return counts;
  }

  void set_character_provider(CharacterProvider provider, double cost) {
    characters_ = std::move(provider);
    provider_cost_ = cost;
  }
  bool has_character_provider() const noexcept { return static_cast<bool>(characters_); }

  /// Estimated operation count of character_table().
  double audit_cost() const noexcept {
    if (characters_) return provider_cost_;
    return static_cast<double>(seed_count_) * static_cast<double>(domain_size());
  }

  /// E[x_1^{e_1} ... x_k^{e_k}] for every e, indexed like pack().
  std::vector<cplx> character_table() const {
    if (characters_) return characters_();
    const std::vector<std::uint64_t> counts = histogram();
    std::vector<cplx> f(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) f[i] = static_cast<double>(counts[i]);
    mixed_radix_dft(f, moduli_, +1);
    for (cplx& z : f) z /= static_cast<double>(seed_count_);
    return f;
  }

  /// Probability of every domain point, indexed like pack().
  std::vector<double> distribution() const {
    std::vector<double> probs(domain_size());
    if (!characters_) {
      const std::vector<std::uint64_t> counts = histogram();
      for (std::size_t i = 0; i < counts.size(); ++i)
        probs[i] = static_cast<double>(counts[i]) / static_cast<double>(seed_count_);
      return probs;
    }
    std::vector<cplx> f = characters_();
    mixed_radix_dft(f, moduli_, -1);
    for (std::size_t i = 0; i < f.size(); ++i) probs[i] = f[i].real() / static_cast<double>(f.size());
    return probs;
  }

 private:
  std::vector<std::uint32_t> moduli_;
  std::uint64_t seed_count_;
  double declared_epsilon_;
  std::string descriptor_;
  Generator generator_;
  CharacterProvider characters_;
  double provider_cost_ = 0.0;
};

}  // namespace permest
