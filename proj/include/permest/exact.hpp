#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "permest/errors.hpp"
#include "permest/matrix.hpp"
#include "permest/phase.hpp"

namespace permest {

inline constexpr std::size_t kNaiveMaxN = 10;
inline constexpr std::size_t kGrayMaxN = 30;
inline constexpr std::uint64_t kGenGlyExactMaxDomain = std::uint64_t{1} << 24;

namespace detail {

/// Kahan-compensated complex accumulator.
class CompensatedSum {
 public:
  void add(cplx v) noexcept {
    add_part(v.real(), re_, re_c_);
    add_part(v.imag(), im_, im_c_);
  }
  cplx value() const noexcept { return {re_ + re_c_, im_ + im_c_}; }

 private:
  static void add_part(double v, double& sum, double& comp) noexcept {
    // Neumaier's variant: also correct when |v| > |sum|.
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double re_ = 0, re_c_ = 0, im_ = 0, im_c_ = 0;
};

inline void require_square(const ComplexMatrix& a, std::size_t cap, const char* method) {
  if (!a.square()) throw DomainError(std::string(method) + ": matrix must be square");
  if (a.rows() == 0) throw DomainError(std::string(method) + ": empty matrix");
  if (a.rows() > cap) {
    throw CapacityError(std::string(method) + ": n = " + std::to_string(a.rows()) + " exceeds limit " +
                        std::to_string(cap));
  }
}

}  // namespace detail

/// Sum over all n! permutations. Test oracle; n <= 10.
inline cplx permanent_naive(const ComplexMatrix& a) {
  detail::require_square(a, kNaiveMaxN, "permanent_naive");
  const std::size_t n = a.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  detail::CompensatedSum sum;
  do {
    cplx term = 1.0;
    for (std::size_t i = 0; i < n; ++i) term *= a(i, perm[i]);
    sum.add(term);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum.value();
}

/// Ryser's inclusion-exclusion formula, subsets visited in binary-reflected
/// Gray-code order so each step updates the row sums in O(n).
inline cplx permanent_ryser(const ComplexMatrix& a) {
  detail::require_square(a, kGrayMaxN, "permanent_ryser");
  const std::size_t n = a.rows();
  std::vector<cplx> row_sums(n, 0.0);
  std::vector<bool> in_subset(n, false);
  detail::CompensatedSum sum;
  int subset_size = 0;
  const std::uint64_t steps = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < steps; ++step) {
    const auto j = static_cast<std::size_t>(std::countr_zero(step));
    const bool entering = !in_subset[j];
    in_subset[j] = entering;
    subset_size += entering ? 1 : -1;
    cplx prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      row_sums[i] += entering ? a(i, j) : -a(i, j);
      prod *= row_sums[i];
    }
    sum.add(subset_size % 2 ? -prod : prod);
  }
  const cplx total = sum.value();
  return n % 2 ? -total : total;
}

enum class GlynnSweep { half, full };

/// Exact mean of the Glynn estimator over all sign vectors.
///
/// Gly is invariant under x -> -x (the sign product and the row-sum product
/// each pick up (-1)^n), so by default x_1 is pinned to +1 and only 2^(n-1)
/// vectors are visited. `GlynnSweep::full` visits all 2^n.
inline cplx permanent_glynn_exact(const ComplexMatrix& a, GlynnSweep sweep = GlynnSweep::half) {
  detail::require_square(a, kGrayMaxN, "permanent_glynn_exact");
  const std::size_t n = a.rows();
  const std::size_t first_free = sweep == GlynnSweep::half ? 1 : 0;
  const std::size_t free_bits = n - first_free;

  std::vector<cplx> row_sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) row_sums[i] += a(i, j);
  std::vector<bool> negative(n, false);
  bool odd = false;

  auto term = [&] {
    cplx prod = 1.0;
    for (const cplx& r : row_sums) prod *= r;
    return odd ? -prod : prod;
  };

  detail::CompensatedSum sum;
  sum.add(term());
  const std::uint64_t steps = std::uint64_t{1} << free_bits;
  for (std::uint64_t step = 1; step < steps; ++step) {
    const std::size_t j = first_free + static_cast<std::size_t>(std::countr_zero(step));
    negative[j] = !negative[j];
    odd = !odd;
    const double delta = negative[j] ? -2.0 : 2.0;
    for (std::size_t i = 0; i < n; ++i) row_sums[i] += delta * a(i, j);
    sum.add(term());
  }
  return sum.value() / static_cast<double>(steps);
}

/// Exact mean of the generalized Glynn estimator over the whole roots-of-unity
/// domain R[s_1+1] x ... x R[s_k+1], equal to Per(expand(spec)).
///
/// Uses the identity conj(x_j)^{s_j} = x_j for an (s_j+1)-th root of unity and
/// walks the domain in reflected mixed-radix Gray order so each step changes
/// one coordinate and updates the n row sums in O(n).
inline cplx permanent_gengly_exact(const MultiplicitySpec& spec) {
  const std::vector<unsigned> mods = spec.moduli();
  std::vector<std::uint32_t> moduli(mods.begin(), mods.end());
  const std::uint64_t domain = domain_size(moduli);
  if (domain > kGenGlyExactMaxDomain) {
    throw CapacityError("permanent_gengly_exact: domain size exceeds 2^24");
  }
  const ComplexMatrix& b = spec.base();
  const std::size_t n = spec.n(), k = spec.k();

  std::vector<std::vector<cplx>> roots(k);
  std::vector<double> sqrt_s(k);
  double log_prefactor = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double s = spec.mults()[j];
    sqrt_s[j] = std::sqrt(s);
    log_prefactor += std::lgamma(s + 1.0) - 0.5 * s * std::log(s);
    for (std::uint32_t ph = 0; ph < moduli[j]; ++ph) roots[j].push_back(root_of_unity(ph, moduli[j]));
  }

  std::vector<std::uint32_t> digit(k, 0);
  std::vector<int> dir(k, +1);
  std::vector<cplx> row_sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) row_sums[i] += sqrt_s[j] * b(i, j);

  detail::CompensatedSum sum;
  while (true) {
    cplx prod = 1.0;
    for (std::size_t j = 0; j < k; ++j) prod *= roots[j][digit[j]];
    for (const cplx& r : row_sums) prod *= r;
    sum.add(prod);

    std::size_t j = 0;
    for (; j < k; ++j) {
      const bool at_end = dir[j] > 0 ? digit[j] + 1 == moduli[j] : digit[j] == 0;
      if (!at_end) break;
      dir[j] = -dir[j];
    }
    if (j == k) break;
    const std::uint32_t old = digit[j];
    digit[j] = static_cast<std::uint32_t>(static_cast<int>(old) + dir[j]);
    const cplx delta = sqrt_s[j] * (roots[j][digit[j]] - roots[j][old]);
    for (std::size_t i = 0; i < n; ++i) row_sums[i] += delta * b(i, j);
  }
  return std::exp(log_prefactor) * sum.value() / static_cast<double>(domain);
}

}  // namespace permest
