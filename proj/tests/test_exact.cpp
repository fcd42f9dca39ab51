#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "permest/estimate.hpp"
#include "permest/exact.hpp"

using namespace permest;

namespace {

void expect_close(cplx got, cplx want, double rel) {
  EXPECT_LE(std::abs(got - want), std::max(rel * std::abs(want), 1e-12)) << got << " vs " << want;
}

}  // namespace

TEST(Exact, SmallKnownValues) {
  EXPECT_EQ(permanent_ryser(ComplexMatrix::identity(4)), cplx(1));
  EXPECT_EQ(permanent_naive(ComplexMatrix::identity(4)), cplx(1));
  EXPECT_NEAR(std::abs(permanent_glynn_exact(ComplexMatrix::filled(6, 6, 1.0)) - 720.0), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(permanent_ryser(ComplexMatrix::filled(6, 6, 1.0)) - 720.0), 0.0, 1e-9);
  const ComplexMatrix two(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(permanent_naive(two), cplx(10));
  EXPECT_NEAR(std::abs(permanent_ryser(two) - cplx(10)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(permanent_glynn_exact(two) - cplx(10)), 0.0, 1e-12);
}

TEST(Exact, MethodsAgreeWithOracle) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + rng() % 8;
    const ComplexMatrix a = oracle::random_matrix(rng, n, n);
    const cplx want = oracle::permanent(a);
    expect_close(permanent_naive(a), want, 1e-9);
    expect_close(permanent_ryser(a), want, 1e-9);
    expect_close(permanent_glynn_exact(a), want, 1e-9);
    expect_close(permanent_glynn_exact(a, GlynnSweep::full), want, 1e-9);
  }
}

TEST(Exact, GlynnHalfSweepAllParities) {
  // x -> -x leaves Gly unchanged for every n, odd included.
  std::mt19937_64 rng(12);
  for (std::size_t n = 1; n <= 9; ++n) {
    const ComplexMatrix a = oracle::random_matrix(rng, n, n);
    expect_close(permanent_glynn_exact(a, GlynnSweep::half), permanent_glynn_exact(a, GlynnSweep::full), 1e-10);
  }
}

TEST(Exact, Caps) {
  EXPECT_THROW(permanent_naive(ComplexMatrix::identity(11)), CapacityError);
  EXPECT_THROW(permanent_ryser(ComplexMatrix::identity(31)), CapacityError);
  EXPECT_THROW(permanent_glynn_exact(ComplexMatrix::identity(31)), CapacityError);
  EXPECT_THROW(permanent_ryser(ComplexMatrix(2, 3)), DomainError);
}

TEST(Exact, GenGlyMatchesExpandedPermanent) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 40; ++t) {
    const std::size_t k = 1 + rng() % 4;
    std::vector<unsigned> s(k);
    std::size_t n = 0;
    for (auto& v : s) n += v = 1 + rng() % 3;
    const ComplexMatrix b = oracle::random_matrix(rng, n, k);
    const cplx want = oracle::permanent(oracle::expand(b, s));
    expect_close(permanent_gengly_exact(MultiplicitySpec(b, s)), want, 1e-9);
  }
  // B = (1,1)^T, s = (2): all-ones 2x2, permanent 2
  ComplexMatrix col(2, 1, {1, 1});
  expect_close(permanent_gengly_exact(MultiplicitySpec(col, {2})), 2.0, 1e-12);
}

TEST(Estimator, GlyPointValues) {
  // x = all +1 gives the product of row sums.
  const ComplexMatrix a(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(gly(a, PhaseVector::binary({false, false})), cplx(3 * 7));
  // x = (1, -1): sign -1, rows (1-2)(3-4) = 1
  EXPECT_EQ(gly(a, PhaseVector::binary({false, true})), cplx(-1));
  EXPECT_THROW(gly(a, PhaseVector::binary({false})), DomainError);
  EXPECT_THROW(gly(a, PhaseVector({3, 3}, {0, 0})), DomainError);
}

TEST(Estimator, GenGlyReducesToGlyForUnitMultiplicities) {
  std::mt19937_64 rng(14);
  const ComplexMatrix a = oracle::random_matrix(rng, 5, 5);
  const MultiplicitySpec spec = MultiplicitySpec::unit(a);
  for (std::uint64_t idx = 0; idx < 32; ++idx) {
    const PhaseVector x = PhaseVector::from_index(std::vector<std::uint32_t>(5, 2), idx);
    expect_close(gengly(spec, x), gly(a, x), 1e-12);
  }
}

TEST(Estimator, GenGlyDefinitionalForm) {
  // GenGly_x = prod s_j!/s_j^{s_j} * prod_j conj(y_j)^{s_j} * prod_i (sum_j b_ij y_j), y_j = sqrt(s_j) x_j,
  // written out directly.
  std::mt19937_64 rng(15);
  const std::vector<unsigned> s{2, 1, 3};
  const ComplexMatrix b = oracle::random_matrix(rng, 6, 3);
  const MultiplicitySpec spec(b, s);
  const std::vector<std::uint32_t> mods{3, 2, 4};
  for (std::uint64_t idx = 0; idx < 24; ++idx) {
    const PhaseVector x = PhaseVector::from_index(mods, idx);
    std::vector<cplx> y(3);
    for (std::size_t j = 0; j < 3; ++j) y[j] = std::sqrt(double(s[j])) * oracle::unit_root(x.phases()[j], mods[j]);
    cplx want = 1.0;
    for (std::size_t j = 0; j < 3; ++j)
      want *= oracle::factorial(s[j]) / std::pow(double(s[j]), double(s[j])) * std::pow(std::conj(y[j]), double(s[j]));
    for (std::size_t i = 0; i < 6; ++i) {
      cplx row = 0.0;
      for (std::size_t j = 0; j < 3; ++j) row += b(i, j) * y[j];
      want *= row;
    }
    expect_close(gengly(spec, x), want, 1e-10);
  }
}

TEST(Exact, PermutationInvarianceAndMultilinearity) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 2 + rng() % 6;
    const ComplexMatrix a = oracle::random_matrix(rng, n, n);
    std::vector<std::size_t> rp(n), cp(n);
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    std::shuffle(rp.begin(), rp.end(), rng);
    std::shuffle(cp.begin(), cp.end(), rng);
    ComplexMatrix p(n, n), scaled = a;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p(i, j) = a(rp[i], cp[j]);
    const cplx c(0.7, -1.3);
    const std::size_t row = rng() % n;
    for (std::size_t j = 0; j < n; ++j) scaled(row, j) *= c;
    for (auto method : {permanent_naive, permanent_ryser}) {
      expect_close(method(p), method(a), 1e-9);
      expect_close(method(scaled), c * method(a), 1e-9);
    }
    expect_close(permanent_glynn_exact(p), permanent_glynn_exact(a), 1e-9);
    expect_close(permanent_glynn_exact(scaled), c * permanent_glynn_exact(a), 1e-9);
  }
}

TEST(Estimator, GlyHomogeneous) {
  std::mt19937_64 rng(17);
  const ComplexMatrix a = oracle::random_matrix(rng, 6, 6);
  const cplx c(1.5, 0.5);
  for (std::uint64_t idx = 0; idx < 64; ++idx) {
    const PhaseVector x = PhaseVector::from_index(std::vector<std::uint32_t>(6, 2), idx);
    expect_close(gly(a.scaled(c), x), std::pow(c, 6) * gly(a, x), 1e-9);
  }
}
