#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "permest/errors.hpp"
#include "permest/estimate.hpp"
#include "permest/exact.hpp"
#include "permest/matrix.hpp"
#include "permest/smallbias_complex.hpp"

namespace permest {

/// Photon counts per mode.
class OccupationPattern {
 public:
  OccupationPattern() = default;
  explicit OccupationPattern(std::vector<unsigned> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw DomainError("occupation pattern needs at least one mode");
  }

  /// n photons, one in each of the first n of `modes` modes.
  static OccupationPattern standard(std::size_t n, std::size_t modes) {
    if (n > modes) throw DomainError("more photons than modes");
    std::vector<unsigned> c(modes, 0);
    std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n), 1u);
    return OccupationPattern(std::move(c));
  }

  const std::vector<unsigned>& counts() const noexcept { return counts_; }
  std::size_t modes() const noexcept { return counts_.size(); }
  unsigned operator[](std::size_t i) const { return counts_.at(i); }
  std::size_t total() const noexcept {
    std::size_t n = 0;
    for (unsigned c : counts_) n += c;
    return n;
  }
  bool operator==(const OccupationPattern&) const = default;

 private:
  std::vector<unsigned> counts_;
};

/// Every pattern of n photons in k modes, in lexicographic order with mode 0
/// most significant (n in mode 0 first).
inline std::vector<OccupationPattern> all_patterns(std::size_t k, std::size_t n) {
  if (k == 0) throw DomainError("need at least one mode");
  std::vector<OccupationPattern> out;
  std::vector<unsigned> c(k, 0);
  auto rec = [&](auto& self, std::size_t mode, std::size_t left) -> void {
    if (mode + 1 == k) {
      c[mode] = static_cast<unsigned>(left);
      out.emplace_back(c);
      return;
    }
    for (std::size_t v = left + 1; v-- > 0;) {
      c[mode] = static_cast<unsigned>(v);
      self(self, mode + 1, left - v);
    }
  };
  rec(rec, 0, n);
  return out;
}

struct AmplitudeResult {
  cplx amplitude;
  double probability = 0.0;
  double amp_error_bound = 0.0;
  double prob_error_bound = 0.0;
  double confidence = 1.0;
  std::uint64_t samples_used = 0;
  EstimateMode mode = EstimateMode::exhaustive;
};

/// U_{s,t}: s_i copies of row i of U and t_j copies of column j.
inline ComplexMatrix transition_matrix(const ComplexMatrix& u, const OccupationPattern& rows,
                                       const OccupationPattern& cols) {
  if (!u.square()) throw DomainError("transition_matrix: U must be square");
  if (rows.modes() != u.rows() || cols.modes() != u.cols()) {
    throw DomainError("transition_matrix: patterns must have one count per mode of U (" + std::to_string(u.rows()) +
                      ")");
  }
  const std::size_t n = rows.total();
  if (cols.total() != n) throw DomainError("transition_matrix: patterns hold different photon numbers");
  if (n == 0) throw DomainError("transition_matrix: no photons");
  std::vector<std::size_t> ri, ci;
  for (std::size_t i = 0; i < rows.modes(); ++i) ri.insert(ri.end(), rows[i], i);
  for (std::size_t j = 0; j < cols.modes(); ++j) ci.insert(ci.end(), cols[j], j);
  ComplexMatrix out(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) out(a, b) = u(ri[a], ci[b]);
  return out;
}

namespace detail {

inline double log_factorials(const OccupationPattern& p) {
  double acc = 0.0;
  for (unsigned c : p.counts()) acc += std::lgamma(c + 1.0);
  return acc;
}

/// log(prod s_i! / s_i^s_i), with 0^0 = 1.
inline double log_bunching(const OccupationPattern& p) {
  double acc = 0.0;
  for (unsigned c : p.counts())
    if (c > 0) acc += std::lgamma(c + 1.0) - c * std::log(static_cast<double>(c));
  return acc;
}

}  // namespace detail

/// <out| phi(U) |in> = Per(U_{out,in}) / sqrt(prod out_i! prod in_j!).
inline AmplitudeResult amplitude_exact(const ComplexMatrix& u, const OccupationPattern& out,
                                       const OccupationPattern& in) {
  const ComplexMatrix a = transition_matrix(u, out, in);
  const cplx per = permanent_ryser(a);
  AmplitudeResult r;
  r.amplitude = per * std::exp(-0.5 * (detail::log_factorials(out) + detail::log_factorials(in)));
  r.probability = std::norm(r.amplitude);
  return r;
}

/// prod s_i! / s_i^s_i: the largest probability of output pattern s from the
/// standard initial state.
inline double bunching_bound(const OccupationPattern& pattern) { return std::exp(detail::log_bunching(pattern)); }

struct AmplitudeEstimateOptions {
  EstimateMode mode = EstimateMode::random;
  double delta = 0.01;
  std::uint64_t seed = 0;
  const SampleSpace* space = nullptr;  // derandomized: overrides build_complex_space
};

/// Estimates <out| phi(U) |1,...,1,0,...,0> with n = out.total() photons in the
/// first n input modes. Zero-count output modes are dropped; the remaining
/// rows of U restricted to the first n columns, transposed, form the n x k
/// base matrix B of a multiplicity spec with s = the nonzero counts.
///
/// amp_error_bound = epsilon * sqrt(prod s!/s^s) * ||B||^n. For the probability
/// |a^2 - b^2| <= d (2|b| + d) with |b| <= sqrt(prod s!/s^s) ||B||^n.
inline AmplitudeResult amplitude_estimate(const ComplexMatrix& u, const OccupationPattern& out, double epsilon,
                                          const AmplitudeEstimateOptions& options = {}) {
  if (!u.square()) throw DomainError("amplitude_estimate: U must be square");
  if (out.modes() != u.rows()) throw DomainError("amplitude_estimate: pattern must have one count per mode of U");
  const std::size_t n = out.total();
  if (n == 0) throw DomainError("amplitude_estimate: no photons");

  std::vector<std::size_t> modes;
  std::vector<unsigned> mults;
  for (std::size_t i = 0; i < out.modes(); ++i) {
    if (out[i] == 0) continue;
    modes.push_back(i);
    mults.push_back(out[i]);
  }
  ComplexMatrix b(n, modes.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < modes.size(); ++j) b(i, j) = u(modes[j], i);
  const MultiplicitySpec spec(b, mults);

  Estimate est;
  switch (options.mode) {
    case EstimateMode::random:
      est = estimate_random_multi(spec, epsilon, options.delta, options.seed);
      break;
    case EstimateMode::derandomized: {
      if (options.space) {
        est = estimate_derandomized_multi(spec, *options.space);
      } else {
        const std::vector<unsigned> m = spec.moduli();
        const ComplexSampleSpace built = build_complex_space(std::vector<std::uint32_t>(m.begin(), m.end()), epsilon);
        est = estimate_derandomized_multi(spec, built.space);
      }
      break;
    }
    case EstimateMode::exhaustive: {
      const std::vector<unsigned> m = spec.moduli();
      if (!(epsilon >= 0.0)) throw DomainError("epsilon must be nonnegative");
      const ComplexSampleSpace full = exhaustive_complex_space(std::vector<std::uint32_t>(m.begin(), m.end()));
      GenGlyKernel kernel(spec);
      est.value = detail::space_mean(full.space, kernel);
      est.bound_term = permanent_upper_bound(spec);
      est.samples_used = full.space.seed_count();
      est.mode = EstimateMode::exhaustive;
      break;
    }
  }

  const double scale = std::exp(-0.5 * detail::log_factorials(out));
  AmplitudeResult r;
  r.amplitude = est.value * scale;
  r.probability = std::norm(r.amplitude);
  r.amp_error_bound = est.epsilon * est.bound_term * scale;
  const double amp_max = est.bound_term * scale;
  r.prob_error_bound = r.amp_error_bound * (2.0 * amp_max + r.amp_error_bound);
  r.confidence = guarantee(est).confidence;
  r.samples_used = est.samples_used;
  r.mode = est.mode;
  return r;
}

/// Block-diagonal n x n unitary whose i-th block is the s_i-point Fourier
/// transform, entry (a, b) = e^{2 pi i ab / s_i} / sqrt(s_i).
inline ComplexMatrix saturating_unitary(const OccupationPattern& pattern) {
  for (unsigned c : pattern.counts())
    if (c == 0) throw DomainError("saturating_unitary: every count must be at least 1");
  const std::size_t n = pattern.total();
  ComplexMatrix u(n, n);
  std::size_t offset = 0;
  for (unsigned s : pattern.counts()) {
    const double norm = 1.0 / std::sqrt(static_cast<double>(s));
    for (unsigned a = 0; a < s; ++a)
      for (unsigned b = 0; b < s; ++b) u(offset + a, offset + b) = norm * root_of_unity((a * b) % s, s);
    offset += s;
  }
  return u;
}

/// The output pattern saturating the bound for saturating_unitary(pattern):
/// s_i photons in the first mode of block i, none elsewhere.
inline OccupationPattern saturating_outcome(const OccupationPattern& pattern) {
  std::vector<unsigned> c(pattern.total(), 0);
  std::size_t offset = 0;
  for (unsigned s : pattern.counts()) {
    c[offset] = s;
    offset += s;
  }
  return OccupationPattern(std::move(c));
}

}  // namespace permest
