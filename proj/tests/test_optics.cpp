#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "permest/optics.hpp"

using namespace permest;

namespace {

ComplexMatrix beamsplitter() {
  const double r = 1.0 / std::sqrt(2.0);
  return ComplexMatrix(2, 2, {r, r, r, -r});
}

/// Compositions of n into k positive parts.
std::vector<std::vector<unsigned>> compositions(unsigned n) {
  std::vector<std::vector<unsigned>> out;
  for (std::uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    std::vector<unsigned> parts{1};
    for (unsigned i = 0; i + 1 < n; ++i) {
      if (cuts >> i & 1)
        parts.push_back(1);
      else
        ++parts.back();
    }
    out.push_back(parts);
  }
  return out;
}

}  // namespace

TEST(Pattern, Basics) {
  const OccupationPattern p({2, 0, 1});
  EXPECT_EQ(p.total(), 3u);
  EXPECT_EQ(OccupationPattern::standard(2, 4).counts(), (std::vector<unsigned>{1, 1, 0, 0}));
  EXPECT_THROW(OccupationPattern::standard(5, 4), DomainError);
  EXPECT_EQ(all_patterns(3, 2).size(), 6u);
  EXPECT_EQ(all_patterns(2, 2).front().counts(), (std::vector<unsigned>{2, 0}));
}

TEST(Transition, Shapes) {
  std::mt19937_64 rng(41);
  const ComplexMatrix u = oracle::random_matrix(rng, 3, 3);
  const OccupationPattern ones({1, 1, 1});
  EXPECT_EQ(transition_matrix(u, ones, ones), u);
  const ComplexMatrix two(2, 2, {1, 2, 3, 4});
  const ComplexMatrix t = transition_matrix(two, OccupationPattern({2, 0}), OccupationPattern({1, 1}));
  EXPECT_EQ(t, ComplexMatrix(2, 2, {1, 2, 1, 2}));
  const ComplexMatrix z = transition_matrix(u, OccupationPattern({0, 2, 0}), OccupationPattern({1, 0, 1}));
  EXPECT_EQ(z, ComplexMatrix(2, 2, {u(1, 0), u(1, 2), u(1, 0), u(1, 2)}));
  EXPECT_THROW(transition_matrix(u, OccupationPattern({1, 1}), ones), DomainError);
  EXPECT_THROW(transition_matrix(u, OccupationPattern({2, 1, 1}), ones), DomainError);
}

TEST(Amplitude, HongOuMandel) {
  const ComplexMatrix u = beamsplitter();
  const OccupationPattern in({1, 1});
  EXPECT_NEAR(amplitude_exact(u, OccupationPattern({2, 0}), in).probability, 0.5, 1e-12);
  EXPECT_NEAR(amplitude_exact(u, OccupationPattern({1, 1}), in).probability, 0.0, 1e-12);
  EXPECT_NEAR(amplitude_exact(u, OccupationPattern({0, 2}), in).probability, 0.5, 1e-12);
  EXPECT_NEAR(std::abs(amplitude_exact(ComplexMatrix::identity(4), OccupationPattern({1, 1, 1, 1}),
                                       OccupationPattern({1, 1, 1, 1}))
                           .amplitude -
                       cplx(1)),
              0.0, 1e-15);
}

TEST(Amplitude, Normalization) {
  std::mt19937_64 rng(42);
  for (std::size_t k = 1; k <= 3; ++k) {
    const ComplexMatrix u = oracle::random_unitary(rng, k);
    for (std::size_t n = 1; n <= 4; ++n) {
      for (const OccupationPattern& in : all_patterns(k, n)) {
        double total = 0.0;
        for (const OccupationPattern& out : all_patterns(k, n)) total += amplitude_exact(u, out, in).probability;
        EXPECT_NEAR(total, 1.0, 1e-9) << "k=" << k << " n=" << n;
      }
    }
  }
}

TEST(Bunching, ClosedForms) {
  EXPECT_NEAR(bunching_bound(OccupationPattern({4, 0, 0})), 24.0 / 256.0, 1e-15);
  EXPECT_NEAR(bunching_bound(OccupationPattern({2, 0})), 0.5, 1e-15);
  EXPECT_NEAR(bunching_bound(OccupationPattern({1, 1, 1})), 1.0, 1e-15);
  for (unsigned n = 1; n <= 10; ++n)
    EXPECT_NEAR(bunching_bound(OccupationPattern({n})), oracle::factorial(n) / std::pow(double(n), double(n)), 1e-14);
}

TEST(Saturation, UnitaryAndTight) {
  for (unsigned n = 1; n <= 6; ++n) {
    for (const auto& parts : compositions(n)) {
      const OccupationPattern p(parts);
      const ComplexMatrix u = saturating_unitary(p);
      const ComplexMatrix uu = u.adjoint() * u;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(std::abs(uu(i, j) - cplx(i == j)), 0.0, 1e-12);
      const double prob =
          amplitude_exact(u, saturating_outcome(p), OccupationPattern::standard(n, n)).probability;
      EXPECT_NEAR(prob, bunching_bound(p), 1e-9);
    }
  }
  EXPECT_NEAR(amplitude_exact(saturating_unitary(OccupationPattern({3, 2})),
                              saturating_outcome(OccupationPattern({3, 2})), OccupationPattern::standard(5, 5))
                  .probability,
              1.0 / 9.0, 1e-12);
  EXPECT_THROW(saturating_unitary(OccupationPattern({2, 0})), DomainError);
}

TEST(Saturation, BoundHoldsForRandomUnitaries) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 2 + rng() % 4;
    const ComplexMatrix u = oracle::random_unitary(rng, k);
    for (std::size_t n = 1; n <= std::min<std::size_t>(k, 5); ++n) {
      const OccupationPattern in = OccupationPattern::standard(n, k);
      for (const OccupationPattern& out : all_patterns(k, n))
        EXPECT_LE(amplitude_exact(u, out, in).probability, bunching_bound(out) + 1e-9);
    }
  }
}

TEST(AmplitudeEstimate, SaturatingInstanceWithinEpsilon) {
  const OccupationPattern p({3, 2});
  const ComplexMatrix u = saturating_unitary(p);
  const OccupationPattern out = saturating_outcome(p);
  const AmplitudeResult exact = amplitude_exact(u, out, OccupationPattern::standard(5, 5));
  AmplitudeEstimateOptions opt;
  opt.seed = 9;
  const AmplitudeResult est = amplitude_estimate(u, out, 0.05, opt);
  EXPECT_LE(est.amp_error_bound, 0.05 + 1e-12);
  EXPECT_LE(std::abs(est.amplitude - exact.amplitude), est.amp_error_bound);
  EXPECT_LE(std::abs(est.probability - exact.probability), est.prob_error_bound);
  EXPECT_NEAR(est.confidence, 0.99, 1e-15);

  opt.mode = EstimateMode::exhaustive;
  const AmplitudeResult full = amplitude_estimate(u, out, 0.05, opt);
  EXPECT_NEAR(std::abs(full.amplitude - exact.amplitude), 0.0, 1e-12);
  EXPECT_EQ(full.amp_error_bound, 0.0);
}

TEST(AmplitudeEstimate, ErrorBoundFormula) {
  // amp_err = eps * sqrt(prod s!/s^s) * ||B||^n
  std::mt19937_64 rng(44);
  const ComplexMatrix u = oracle::random_unitary(rng, 4);
  const OccupationPattern out({2, 0, 1, 0});
  AmplitudeEstimateOptions opt;
  const AmplitudeResult r = amplitude_estimate(u, out, 0.1, opt);
  ComplexMatrix b(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    b(i, 0) = u(0, i);
    b(i, 1) = u(2, i);
  }
  const double want = 0.1 * std::sqrt(2.0 / 4.0) * std::pow(oracle::spectral_norm(b), 3.0);
  EXPECT_NEAR(r.amp_error_bound, want, 1e-9);
  const AmplitudeResult exact = amplitude_exact(u, out, OccupationPattern::standard(3, 4));
  EXPECT_LE(std::abs(r.amplitude - exact.amplitude), r.amp_error_bound);
}

TEST(AmplitudeEstimate, DerandomizedNeedsNonnegative) {
  AmplitudeEstimateOptions opt;
  opt.mode = EstimateMode::derandomized;
  EXPECT_THROW(amplitude_estimate(beamsplitter(), OccupationPattern({0, 2}), 0.1, opt), DomainError);
  const ComplexMatrix avg = ComplexMatrix::filled(3, 3, 1.0 / 3.0);
  const AmplitudeResult r = amplitude_estimate(avg, OccupationPattern({2, 1, 0}), 0.1, opt);
  const AmplitudeResult exact = amplitude_exact(avg, OccupationPattern({2, 1, 0}), OccupationPattern({1, 1, 1}));
  EXPECT_LE(std::abs(r.amplitude - exact.amplitude), r.amp_error_bound);
  EXPECT_EQ(r.confidence, 1.0);
}

TEST(AmplitudeEstimate, ZeroRowGivesZero) {
  ComplexMatrix u = ComplexMatrix::identity(3);
  u(0, 0) = 0.0;
  AmplitudeEstimateOptions opt;
  EXPECT_EQ(amplitude_estimate(u, OccupationPattern({1, 1, 0}), 0.1, opt).amplitude, cplx(0));
}

TEST(AmplitudeEstimate, UnitPatternUsesPlainGlynnBound) {
  // All counts 1: the bound reduces to eps * ||B||^n with no bunching factor.
  std::mt19937_64 rng(45);
  const ComplexMatrix u = oracle::random_unitary(rng, 5);
  const OccupationPattern out({1, 0, 1, 1, 0});
  AmplitudeEstimateOptions opt;
  opt.seed = 3;
  const AmplitudeResult r = amplitude_estimate(u, out, 0.1, opt);
  const ComplexMatrix t = transition_matrix(u, out, OccupationPattern::standard(3, 5));
  EXPECT_NEAR(r.amp_error_bound, 0.1 * std::pow(oracle::spectral_norm(t), 3.0), 1e-9);
  EXPECT_LE(std::abs(r.amplitude - oracle::permanent(t)), r.amp_error_bound);
  opt.mode = EstimateMode::exhaustive;
  EXPECT_NEAR(std::abs(amplitude_estimate(u, out, 0.1, opt).amplitude - oracle::permanent(t)), 0.0, 1e-12);
}
