#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "permest/errors.hpp"
#include "permest/exact.hpp"
#include "permest/matrix.hpp"
#include "permest/phase.hpp"
#include "permest/sample_space.hpp"

namespace permest {

enum class EstimateMode { random, derandomized, exhaustive };

inline const char* to_string(EstimateMode m) {
  switch (m) {
    case EstimateMode::random: return "random";
    case EstimateMode::derandomized: return "derandomized";
    case EstimateMode::exhaustive: return "exhaustive";
  }
  return "?";
}

/// Result of an estimator run. The guarantee is |value - Per| <= epsilon * bound_term,
/// with probability >= 1 - delta in random mode and with certainty otherwise.
struct Estimate {
  cplx value;
  double bound_term = 0.0;
  double epsilon = 0.0;  // zero only for exhaustive averages
  double delta = 0.0;
  std::uint64_t samples_used = 0;
  EstimateMode mode = EstimateMode::random;
};

struct GuaranteeReport {
  double additive_error_bound = 0.0;
  double confidence = 1.0;
};

inline GuaranteeReport guarantee(const Estimate& e) {
  return {e.epsilon * e.bound_term, e.mode == EstimateMode::random ? 1.0 - e.delta : 1.0};
}

/// Hoeffding sample count for the complex-valued mean: each of the real and
/// imaginary parts of Gly / bound lies in [-1, 1] and must land within
/// epsilon / sqrt(2), union-bounded over the two parts.
inline std::uint64_t hoeffding_sample_count(double epsilon, double delta) {
  return static_cast<std::uint64_t>(std::ceil(4.0 * std::log(4.0 / delta) / (epsilon * epsilon)));
}

/// log(s_1! ... s_k! / sqrt(s_1^s_1 ... s_k^s_k)).
inline double log_multiplicity_factor(std::span<const unsigned> mults) {
  double acc = 0.0;
  for (unsigned s : mults) acc += std::lgamma(s + 1.0) - 0.5 * s * std::log(static_cast<double>(s));
  return acc;
}

/// (s_1! ... s_k! / sqrt(s_1^s_1 ... s_k^s_k)) * ||B||^n, an upper bound on |Per(expand(spec))|.
inline double permanent_upper_bound(const MultiplicitySpec& spec) {
  const double norm = spectral_norm(spec.base()).value;
  if (norm == 0.0) return 0.0;
  return std::exp(log_multiplicity_factor(spec.mults()) + static_cast<double>(spec.n()) * std::log(norm));
}

// ---------------------------------------------------------------------------
// Estimator kernels

/// Evaluates Gly_x(A) = x_1...x_n * prod_i (a_i1 x_1 + ... + a_in x_n).
class GlyKernel {
 public:
  explicit GlyKernel(const ComplexMatrix& a) : a_(a) {
    if (!a.square()) throw DomainError("Glynn estimator needs a square matrix");
  }

  std::size_t dimension() const noexcept { return a_.rows(); }

  /// phases[j] is 0 for +1 and 1 for -1.
  cplx operator()(std::span<const std::uint32_t> phases) const {
    const std::size_t n = a_.rows();
    bool odd = false;
    for (std::size_t j = 0; j < n; ++j) odd ^= phases[j] != 0;
    cplx prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += phases[j] ? -a_(i, j) : a_(i, j);
      prod *= s;
    }
    return odd ? -prod : prod;
  }

 private:
  ComplexMatrix a_;
};

/// Evaluates GenGly_x for a multiplicity spec.
///
/// With y_j = sqrt(s_j) x_j and conj(x_j)^{s_j} = x_j for an (s_j+1)-th root of
/// unity, GenGly_x = C * (x_1 ... x_k) * prod_i (By)_i where
/// C = s_1!...s_k! / sqrt(s_1^s_1 ... s_k^s_k), computed in log space.
class GenGlyKernel {
 public:
  explicit GenGlyKernel(const MultiplicitySpec& spec)
      : b_(spec.base()), prefactor_(std::exp(log_multiplicity_factor(spec.mults()))) {
    const std::size_t k = spec.k();
    moduli_.resize(k);
    roots_.resize(k);
    scaled_roots_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const unsigned s = spec.mults()[j];
      moduli_[j] = s + 1;
      for (std::uint32_t ph = 0; ph <= s; ++ph) {
        roots_[j].push_back(root_of_unity(ph, s + 1));
        scaled_roots_[j].push_back(std::sqrt(static_cast<double>(s)) * roots_[j].back());
      }
    }
  }

  std::span<const std::uint32_t> moduli() const noexcept { return moduli_; }
  double prefactor() const noexcept { return prefactor_; }

  cplx operator()(std::span<const std::uint32_t> phases) const {
    const std::size_t k = moduli_.size();
    cplx prod = prefactor_;
    for (std::size_t j = 0; j < k; ++j) prod *= roots_[j][phases[j]];
    for (std::size_t i = 0; i < b_.rows(); ++i) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += scaled_roots_[j][phases[j]] * b_(i, j);
      prod *= s;
    }
    return prod;
  }

 private:
  ComplexMatrix b_;
  double prefactor_;
  std::vector<std::uint32_t> moduli_;
  std::vector<std::vector<cplx>> roots_;
  std::vector<std::vector<cplx>> scaled_roots_;
};

inline cplx gly(const ComplexMatrix& a, const PhaseVector& x) {
  if (!a.square()) throw DomainError("gly: matrix must be square");
  if (x.size() != a.rows()) {
    throw DomainError("gly: phase vector has length " + std::to_string(x.size()) + ", expected " +
                      std::to_string(a.rows()));
  }
  if (!x.is_binary()) throw DomainError("gly: phase vector must be binary");
  GlyKernel kernel(a);
  return kernel(x.phases());
}

inline cplx gengly(const MultiplicitySpec& spec, const PhaseVector& x) {
  if (x.size() != spec.k()) throw DomainError("gengly: phase vector length must equal the column count");
  for (std::size_t j = 0; j < spec.k(); ++j) {
    if (x.moduli()[j] != spec.mults()[j] + 1) {
      throw DomainError("gengly: modulus of coordinate " + std::to_string(j) + " must be s_j + 1");
    }
  }
  return GenGlyKernel(spec)(x.phases());
}

// ---------------------------------------------------------------------------
// Randomized estimators

namespace detail {

inline void validate_eps_delta(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
}

/// Uniform integer in [0, bound) by rejection, so the draw is exactly uniform.
inline std::uint32_t uniform_below(std::mt19937_64& rng, std::uint32_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return static_cast<std::uint32_t>(v % bound);
}

inline constexpr std::uint64_t kMaxSpaceMeanSeeds = std::uint64_t{1} << 32;

/// Mean of kernel(x) over every seed of the space. Spaces with a character
/// provider are averaged against their exact point distribution; otherwise,
/// when there are more seeds than domain points, seeds are tallied per point
/// so each distinct point is evaluated once.
template <class Kernel>
cplx space_mean(const SampleSpace& space, const Kernel& kernel) {
  const std::uint64_t domain = space.domain_size();
  CompensatedSum sum;
  std::vector<std::uint32_t> ph(space.dimension());
  if (space.has_character_provider()) {
    const std::vector<double> probs = space.distribution();
    for (std::uint64_t idx = 0; idx < domain; ++idx) {
      if (probs[idx] == 0.0) continue;
      SampleSpace::unpack(idx, space.moduli(), ph);
      sum.add(probs[idx] * kernel(std::span<const std::uint32_t>(ph)));
    }
    return sum.value();
  }
  if (space.seed_count() > kMaxSpaceMeanSeeds) throw CapacityError("sample space has more than 2^32 seeds");
  if (domain <= space.seed_count() && domain <= (std::uint64_t{1} << 24)) {
    const std::vector<std::uint64_t> counts = space.histogram();
    for (std::uint64_t idx = 0; idx < domain; ++idx) {
      if (!counts[idx]) continue;
      SampleSpace::unpack(idx, space.moduli(), ph);
      sum.add(static_cast<double>(counts[idx]) * kernel(std::span<const std::uint32_t>(ph)));
    }
  } else {
    space.for_each([&](std::uint64_t, std::span<const std::uint32_t> p) { sum.add(kernel(p)); });
  }
  return sum.value() / static_cast<double>(space.seed_count());
}

}  // namespace detail

/// Gurvits's sampler: mean of Gly over uniformly random sign vectors.
inline Estimate estimate_random(const ComplexMatrix& a, double epsilon, double delta, std::uint64_t rng_seed) {
  detail::validate_eps_delta(epsilon, delta);
  if (!a.square()) throw DomainError("estimate_random: matrix must be square");
  const std::size_t n = a.rows();
  const std::uint64_t m = hoeffding_sample_count(epsilon, delta);
  const double norm = spectral_norm(a).value;

  std::mt19937_64 rng(rng_seed);
  GlyKernel kernel(a);
  std::vector<std::uint32_t> ph(n);
  detail::CompensatedSum sum;
  for (std::uint64_t t = 0; t < m; ++t) {
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j % 64 == 0) bits = rng();
      ph[j] = static_cast<std::uint32_t>(bits & 1);
      bits >>= 1;
    }
    sum.add(kernel(ph));
  }
  return {sum.value() / static_cast<double>(m), std::pow(norm, static_cast<double>(n)), epsilon, delta, m,
          EstimateMode::random};
}

/// Generalized sampler: mean of GenGly over uniformly random points of R[s_1+1] x ... x R[s_k+1].
inline Estimate estimate_random_multi(const MultiplicitySpec& spec, double epsilon, double delta,
                                      std::uint64_t rng_seed) {
  detail::validate_eps_delta(epsilon, delta);
  const std::uint64_t m = hoeffding_sample_count(epsilon, delta);
  GenGlyKernel kernel(spec);
  std::mt19937_64 rng(rng_seed);
  std::vector<std::uint32_t> ph(spec.k());
  detail::CompensatedSum sum;
  for (std::uint64_t t = 0; t < m; ++t) {
    for (std::size_t j = 0; j < spec.k(); ++j) ph[j] = detail::uniform_below(rng, kernel.moduli()[j]);
    sum.add(kernel(ph));
  }
  return {sum.value() / static_cast<double>(m), permanent_upper_bound(spec), epsilon, delta, m, EstimateMode::random};
}

// ---------------------------------------------------------------------------
// Derandomized estimators

/// Deterministic estimate: mean of Gly over a binary small-bias space.
/// Requires real nonnegative entries.
inline Estimate estimate_derandomized(const ComplexMatrix& a, const SampleSpace& space) {
  if (!a.square()) throw DomainError("estimate_derandomized: matrix must be square");
  if (!a.nonnegative_real()) throw DomainError("estimate_derandomized: entries must be real and nonnegative");
  if (!space.is_binary() || space.dimension() != a.rows()) {
    throw DomainError("estimate_derandomized: space must be binary over " + std::to_string(a.rows()) +
                      " coordinates");
  }
  GlyKernel kernel(a);
  const cplx value = detail::space_mean(space, kernel);
  const double norm = spectral_norm(a).value;
  const double eps = space.declared_epsilon();
  return {value, std::pow(norm, static_cast<double>(a.rows())), eps, 0.0, space.seed_count(),
          eps == 0.0 ? EstimateMode::exhaustive : EstimateMode::derandomized};
}

/// Deterministic estimate: mean of GenGly over a complex small-bias space on
/// R[s_1+1] x ... x R[s_k+1]. Requires B real nonnegative.
inline Estimate estimate_derandomized_multi(const MultiplicitySpec& spec, const SampleSpace& space) {
  if (!spec.base().nonnegative_real()) {
    throw DomainError("estimate_derandomized_multi: entries must be real and nonnegative");
  }
  if (space.dimension() != spec.k()) throw DomainError("estimate_derandomized_multi: space dimension mismatch");
  for (std::size_t j = 0; j < spec.k(); ++j) {
    if (space.moduli()[j] != spec.mults()[j] + 1) {
      throw DomainError("estimate_derandomized_multi: space moduli must be s_j + 1");
    }
  }
  GenGlyKernel kernel(spec);
  const cplx value = detail::space_mean(space, kernel);
  const double eps = space.declared_epsilon();
  return {value, permanent_upper_bound(spec), eps, 0.0, space.seed_count(),
          eps == 0.0 ? EstimateMode::exhaustive : EstimateMode::derandomized};
}

}  // namespace permest
