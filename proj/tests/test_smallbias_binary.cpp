#include <gtest/gtest.h>

#include "oracles.hpp"
#include "permest/smallbias_binary.hpp"

using namespace permest;

namespace {

// Schoolbook polynomial product over GF(2) followed by long division.
std::uint32_t slow_mul(std::uint32_t a, std::uint32_t b, std::uint32_t poly) {
  std::uint64_t prod = 0;
  for (int i = 0; i < 32; ++i)
    if (b >> i & 1) prod ^= std::uint64_t{a} << i;
  const int deg = 31 - std::countl_zero(poly);
  for (int i = 63; i >= deg; --i)
    if (prod >> i & 1) prod ^= std::uint64_t{poly} << (i - deg);
  return static_cast<std::uint32_t>(prod);
}

std::vector<std::vector<std::uint32_t>> points_of(const SampleSpace& s) {
  std::vector<std::vector<std::uint32_t>> pts;
  s.for_each([&](std::uint64_t, std::span<const std::uint32_t> ph) { pts.emplace_back(ph.begin(), ph.end()); });
  return pts;
}

}  // namespace

TEST(GF2m, TablePolynomialsAreIrreducible) {
  for (unsigned d = 1; d <= GF2m::kMaxDegree; ++d) EXPECT_TRUE(GF2m::irreducible(GF2m::kPolynomials[d])) << d;
  EXPECT_FALSE(GF2m::irreducible(0x5));  // x^2 + 1 = (x + 1)^2
  EXPECT_FALSE(GF2m::irreducible(0x9));  // x^3 + 1
  EXPECT_THROW(GF2m(3, 0x9), DomainError);
}

TEST(GF2m, MultiplicationMatchesSchoolbook) {
  for (unsigned d : {1u, 2u, 5u, 8u, 13u}) {
    const GF2m f(d);
    const std::uint32_t mask = static_cast<std::uint32_t>(f.size() - 1);
    std::uint64_t state = d;
    for (int t = 0; t < 500; ++t) {
      const auto a = static_cast<std::uint32_t>(detail::splitmix64(state)) & mask;
      const auto b = static_cast<std::uint32_t>(detail::splitmix64(state)) & mask;
      EXPECT_EQ(f.mul(a, b), slow_mul(a, b, f.polynomial()));
    }
  }
}

TEST(GF2m, MultiplicativeGroupHasNoZeroDivisors) {
  const GF2m f(6);
  for (std::uint32_t a = 1; a < 64; ++a)
    for (std::uint32_t b = 1; b < 64; ++b) ASSERT_NE(f.mul(a, b), 0u);
}

TEST(BinarySpace, WorkedExamples) {
  const SampleSpace s4 = build_binary_space(4, 0.5);
  EXPECT_LE(measure_bias(s4), 0.5);
  const SampleSpace s10 = build_binary_space(10, 0.1);
  EXPECT_LE(measure_bias(s10), 0.1);
  EXPECT_LE(s10.seed_count(), std::uint64_t{1} << 20);
}

TEST(BinarySpace, AuditMatchesDirectCharacterSums) {
  for (std::size_t n : {3u, 5u, 8u}) {
    for (double eps : {0.5, 0.25}) {
      const SampleSpace s = build_binary_space(n, eps);
      const double direct = oracle::bias(points_of(s), std::vector<std::uint32_t>(n, 2));
      EXPECT_NEAR(measure_bias(s), direct, 1e-12);
      EXPECT_LE(direct, eps);
    }
  }
}

TEST(BinarySpace, SeedBitsGrowLogarithmically) {
  for (std::size_t n : {4u, 16u, 64u, 256u, 1024u}) {
    for (double eps : {0.5, 0.1, 0.01}) {
      const SampleSpace s = build_binary_space(n, eps);
      const unsigned m = static_cast<unsigned>(std::ceil(std::log2(n / eps) - 1e-12));
      EXPECT_EQ(s.seed_bits(), 2 * std::max(1u, m));
    }
  }
  EXPECT_THROW(build_binary_space(1 << 20, 0.01), CapacityError);
}

TEST(BinarySpace, Errors) {
  EXPECT_THROW(build_binary_space(0, 0.1), DomainError);
  EXPECT_THROW(build_binary_space(4, 0.0), DomainError);
  EXPECT_THROW(build_binary_space(4, 1.0), DomainError);
  EXPECT_THROW(measure_bias(build_binary_space(30, 0.1)), CapacityError);
}

TEST(BinarySpace, ExhaustiveIsUnbiased) {
  for (std::size_t n = 1; n <= 12; ++n) EXPECT_EQ(measure_bias(exhaustive_binary_space(n)), 0.0);
  EXPECT_THROW(exhaustive_binary_space(25), CapacityError);
}

TEST(BinarySpace, DescriptorFormat) {
  EXPECT_EQ(build_binary_space(10, 0.5).descriptor(), "binary n=10 m=5 poly=0x25 eps=0.5");
  EXPECT_EQ(exhaustive_binary_space(6).descriptor(), "binary n=6 exhaustive");
}

TEST(BinarySpace, SingleCoordinateIsUnbiased) {
  for (double eps : {0.5, 0.1, 0.01}) EXPECT_EQ(measure_bias(build_binary_space(1, eps)), 0.0);
}

TEST(BinarySpace, ConstantDistributionHasBiasOne) {
  const SampleSpace one({2, 2, 2}, 1, 0.5, "constant",
                        [](std::uint64_t, std::span<std::uint32_t> out) { std::fill(out.begin(), out.end(), 1u); });
  EXPECT_NEAR(measure_bias(one), 1.0, 1e-15);
}
