#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "rvr/errors.hpp"
#include "rvr/rng.hpp"
#include "rvr/sampling.hpp"

using namespace rvr;

TEST(Rng, StreamsAreIndependentOfDrawOrder) {
  Rng a(7, Stream::MiniBatch, 3, 4);
  Rng burn(7, Stream::MiniBatch, 3, 3);
  for (int i = 0; i < 100; ++i) burn.normal();
  Rng b(7, Stream::MiniBatch, 3, 4);
  EXPECT_EQ(a.index(1000), b.index(1000));
  EXPECT_NE(derive_seed(7, Stream::MiniBatch, 3, 4), derive_seed(7, Stream::MiniBatch, 4, 3));
  EXPECT_NE(derive_seed(7, Stream::MiniBatch), derive_seed(7, Stream::ReferenceBatch));
}

TEST(Rng, IndexIsInRange) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) ASSERT_LT(rng.index(7), 7u);
}

TEST(Sampling, FullBatchIsTheIndexSetWithoutRandomness) {
  Rng rng(2);
  const auto all = sample_without_replacement(10, 10, rng);
  std::vector<std::size_t> expected(10);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(all, expected);
  Rng fresh(2);
  EXPECT_EQ(rng.index(1u << 30), fresh.index(1u << 30));
}

TEST(Sampling, WithoutReplacementIsSortedAndDistinct) {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto s = sample_without_replacement(50, 17, rng);
    ASSERT_EQ(s.size(), 17u);
    ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
    ASSERT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 17u);
    ASSERT_LT(s.back(), 50u);
  }
}

TEST(Sampling, DrawDistinctHandlesHugeRanges) {
  Rng rng(4);
  const auto s = draw_distinct(std::size_t{1} << 40, 1000, rng);
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 1000u);
}

TEST(Sampling, RejectsInvalidSizes) {
  Rng rng(5);
  EXPECT_THROW(sample_without_replacement(5, 0, rng), ConfigError);
  EXPECT_THROW(sample_without_replacement(5, 6, rng), ConfigError);
}

TEST(Sampling, InclusionFrequencyIsUniform) {
  const std::size_t n = 20, b = 10;
  const int draws = 100000;
  std::vector<int> counts(n, 0);
  for (int k = 0; k < draws; ++k) {
    Rng rng(6, Stream::ReferenceBatch, static_cast<std::uint64_t>(k));
    for (std::size_t i : sample_without_replacement(n, b, rng)) ++counts[i];
  }
  const double p = static_cast<double>(b) / n;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int c : counts) EXPECT_LE(std::abs(c - draws * p), 3.0 * sigma);
}

TEST(Sampling, WithReplacementCoversRange) {
  Rng rng(7);
  const auto s = sample_with_replacement(5, 1000, rng);
  EXPECT_EQ(s.size(), 1000u);
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 5u);
}

TEST(Sampling, BatchMeanVarianceMatchesFinitePopulationFactor) {
  const std::size_t n = 30, b = 6;
  Rng vr(8);
  Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(n, [&] { return vr.normal(); });
  x.array() -= x.mean();
  const double bound = static_cast<double>(n - b) / (n - 1) / (n * b) * x.squaredNorm();
  const int draws = 100000;
  double s1 = 0, s2 = 0;
  for (int k = 0; k < draws; ++k) {
    Rng rng(9, Stream::ReferenceBatch, static_cast<std::uint64_t>(k));
    double m = 0;
    for (std::size_t i : sample_without_replacement(n, b, rng)) m += x(static_cast<Eigen::Index>(i));
    m /= b;
    s1 += m * m;
    s2 += m * m * m * m;
  }
  const double mean = s1 / draws;
  const double se = std::sqrt((s2 / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, bound, 3.0 * se);
}
