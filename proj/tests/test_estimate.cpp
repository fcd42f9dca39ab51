#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "permest/estimate.hpp"
#include "permest/smallbias_binary.hpp"
#include "permest/smallbias_complex.hpp"

using namespace permest;

TEST(Hoeffding, SampleCount) {
  // 4 ln(4/delta) / eps^2, rounded up
  EXPECT_EQ(hoeffding_sample_count(0.1, 0.01), static_cast<std::uint64_t>(std::ceil(400 * std::log(400.0))));
  EXPECT_EQ(hoeffding_sample_count(0.5, 0.5), 34u);
  EXPECT_GT(hoeffding_sample_count(0.05, 0.01), hoeffding_sample_count(0.1, 0.01));
}

TEST(UpperBound, MatchesFormula) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    const std::size_t k = 1 + rng() % 4;
    std::vector<unsigned> s(k);
    std::size_t n = 0;
    for (auto& v : s) n += v = 1 + rng() % 3;
    const ComplexMatrix b = oracle::random_matrix(rng, n, k);
    double factor = 1.0;
    for (unsigned v : s) factor *= oracle::factorial(v) / std::sqrt(std::pow(double(v), double(v)));
    const double want = factor * std::pow(oracle::spectral_norm(b), double(n));
    EXPECT_NEAR(permanent_upper_bound(MultiplicitySpec(b, s)), want, 1e-8 * want);
    EXPECT_LE(std::abs(oracle::permanent(oracle::expand(b, s))), want * (1 + 1e-9));
  }
}

TEST(EstimateRandom, ReproducibleAndWithinGuarantee) {
  std::mt19937_64 rng(22);
  const ComplexMatrix a = oracle::random_matrix(rng, 6, 6);
  const Estimate e1 = estimate_random(a, 0.1, 0.01, 42);
  const Estimate e2 = estimate_random(a, 0.1, 0.01, 42);
  EXPECT_EQ(e1.value, e2.value);
  EXPECT_EQ(e1.samples_used, hoeffding_sample_count(0.1, 0.01));
  EXPECT_EQ(e1.mode, EstimateMode::random);
  const GuaranteeReport g = guarantee(e1);
  EXPECT_NEAR(g.confidence, 0.99, 1e-15);
  EXPECT_LE(std::abs(e1.value - oracle::permanent(a)), g.additive_error_bound);
  EXPECT_NE(estimate_random(a, 0.1, 0.01, 43).value, e1.value);
}

TEST(EstimateRandom, ZeroMatrix) {
  const Estimate e = estimate_random(ComplexMatrix(4, 4), 0.2, 0.05, 1);
  EXPECT_EQ(e.value, cplx(0));
  EXPECT_EQ(e.bound_term, 0.0);
}

TEST(EstimateRandom, InputValidation) {
  const ComplexMatrix a = ComplexMatrix::identity(3);
  EXPECT_THROW(estimate_random(a, 0.0, 0.1, 0), DomainError);
  EXPECT_THROW(estimate_random(a, 1.0, 0.1, 0), DomainError);
  EXPECT_THROW(estimate_random(a, 0.1, 0.0, 0), DomainError);
  EXPECT_THROW(estimate_random(ComplexMatrix(2, 3), 0.1, 0.1, 0), DomainError);
}

TEST(EstimateRandomMulti, WithinGuarantee) {
  std::mt19937_64 rng(23);
  const ComplexMatrix b = oracle::random_matrix(rng, 6, 3);
  const MultiplicitySpec spec(b, {3, 1, 2});
  const Estimate e = estimate_random_multi(spec, 0.05, 0.01, 5);
  EXPECT_LE(std::abs(e.value - oracle::permanent(oracle::expand(b, {3, 1, 2}))), guarantee(e).additive_error_bound);
}

TEST(EstimateDerandomized, IdentityWithExhaustiveSpaceIsExact) {
  const Estimate e = estimate_derandomized(ComplexMatrix::identity(4), exhaustive_binary_space(4));
  EXPECT_NEAR(std::abs(e.value - cplx(1)), 0.0, 1e-15);
  EXPECT_EQ(e.mode, EstimateMode::exhaustive);
  EXPECT_EQ(guarantee(e).confidence, 1.0);
}

TEST(EstimateDerandomized, RejectsNegativeOrComplex) {
  const SampleSpace s = exhaustive_binary_space(2);
  EXPECT_THROW(estimate_derandomized(ComplexMatrix(2, 2, {1, -1, 1, 1}), s), DomainError);
  EXPECT_THROW(estimate_derandomized(ComplexMatrix(2, 2, {1, cplx(0, 1), 1, 1}), s), DomainError);
  EXPECT_THROW(estimate_derandomized(ComplexMatrix::identity(3), s), DomainError);
}

TEST(EstimateDerandomized, BinarySpaceWithinEpsilonNormPowerN) {
  std::mt19937_64 rng(24);
  for (double eps : {0.5, 0.25, 0.1}) {
    for (std::size_t n = 2; n <= 10; ++n) {
      const ComplexMatrix a = oracle::random_nonnegative(rng, n, n);
      const SampleSpace s = build_binary_space(n, eps);
      const Estimate e = estimate_derandomized(a, s);
      EXPECT_EQ(e.mode, EstimateMode::derandomized);
      const double tol = eps * std::pow(oracle::spectral_norm(a), double(n));
      EXPECT_LE(std::abs(e.value - oracle::permanent(a)), tol) << "n=" << n << " eps=" << eps;
    }
  }
}

TEST(EstimateDerandomizedMulti, ExhaustiveEqualsExact) {
  std::mt19937_64 rng(25);
  const ComplexMatrix b = oracle::random_nonnegative(rng, 5, 3);
  const MultiplicitySpec spec(b, {2, 2, 1});
  const Estimate e = estimate_derandomized_multi(spec, exhaustive_complex_space({3, 3, 2}).space);
  EXPECT_NEAR(std::abs(e.value - oracle::permanent(oracle::expand(b, {2, 2, 1}))), 0.0, 1e-10);
}

TEST(EstimateDerandomizedMulti, ConstructedSpaceWithinGuarantee) {
  std::mt19937_64 rng(26);
  const ComplexMatrix b = oracle::random_nonnegative(rng, 5, 2);
  const MultiplicitySpec spec(b, {2, 3});
  const ComplexSampleSpace cs = build_complex_space({3, 4}, 0.5, {true});
  ASSERT_EQ(cs.mode, ComplexSpaceMode::constructed);
  const Estimate e = estimate_derandomized_multi(spec, cs.space);
  EXPECT_EQ(e.mode, EstimateMode::derandomized);
  EXPECT_LE(std::abs(e.value - oracle::permanent(oracle::expand(b, {2, 3}))), guarantee(e).additive_error_bound);
}

TEST(EstimateDerandomizedMulti, ModuliMustMatch) {
  const MultiplicitySpec spec(ComplexMatrix::filled(3, 2, 1.0), {2, 1});
  EXPECT_THROW(estimate_derandomized_multi(spec, exhaustive_complex_space({2, 3}).space), DomainError);
}

TEST(SpaceMean, DistributionPathMatchesSeedEnumeration) {
  // A constructed complex space is averaged through its exact distribution;
  // direct enumeration of every seed must give the same mean.
  std::mt19937_64 rng(27);
  const ComplexMatrix b = oracle::random_nonnegative(rng, 3, 2);
  const MultiplicitySpec spec(b, {1, 2});
  const ComplexSampleSpace cs = complex_space_with_walk({2, 3}, 2, 0.5);
  GenGlyKernel kernel(spec);
  detail::CompensatedSum sum;
  cs.space.for_each([&](std::uint64_t, std::span<const std::uint32_t> ph) { sum.add(kernel(ph)); });
  const cplx direct = sum.value() / static_cast<double>(cs.space.seed_count());
  EXPECT_NEAR(std::abs(detail::space_mean(cs.space, kernel) - direct), 0.0, 1e-10);
}

TEST(EstimateDerandomized, BitIdenticalRepeats) {
  std::mt19937_64 rng(28);
  const ComplexMatrix a = oracle::random_nonnegative(rng, 9, 9);
  const SampleSpace s = build_binary_space(9, 0.1);
  EXPECT_EQ(estimate_derandomized(a, s).value, estimate_derandomized(a, s).value);
  const MultiplicitySpec spec(oracle::random_nonnegative(rng, 4, 2), {1, 3});
  const ComplexSampleSpace cs = build_complex_space({2, 4}, 0.5, {true});
  EXPECT_EQ(estimate_derandomized_multi(spec, cs.space).value, estimate_derandomized_multi(spec, cs.space).value);
}
