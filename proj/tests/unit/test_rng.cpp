#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "fedcvr/rng.hpp"

using fedcvr::CounterRng;

TEST(CounterRng, SameKeyAndCounterReproduce) {
  CounterRng a(42);
  CounterRng b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(CounterRng, OutputIsPureFunctionOfCounter) {
  CounterRng a(7);
  for (int i = 0; i < 10; ++i) a();
  CounterRng b(7, 10);
  EXPECT_EQ(a(), b());
}

TEST(CounterRng, SplitsByLabelAndIndexDiffer) {
  const CounterRng root(1);
  std::set<std::uint64_t> firsts;
  for (const char* label : {"data", "init", "policy", "train", "tracked"}) firsts.insert(root.split(label)());
  for (std::uint64_t i = 0; i < 50; ++i) firsts.insert(root.split(i)());
  EXPECT_EQ(firsts.size(), 55u);
  EXPECT_EQ(root.split("data")(), CounterRng(1).split("data")());
}

TEST(CounterRng, SplitDoesNotAdvanceParent) {
  CounterRng a(3);
  CounterRng b(3);
  (void)a.split("x");
  (void)a.split(9);
  EXPECT_EQ(a(), b());
}

TEST(CounterRng, UniformMomentsMatchTheory) {
  CounterRng rng(11);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(var, 1.0 / 12.0, 2e-3);
}

TEST(CounterRng, NormalMomentsMatchTheory) {
  CounterRng rng(12);
  const int n = 200000;
  double m1 = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  EXPECT_NEAR(m1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2 / n, 1.0, 0.02);
  EXPECT_NEAR(m4 / n, 3.0, 0.1);
}

TEST(CounterRng, UniformIndexPassesChiSquare) {
  CounterRng rng(13);
  const std::size_t bins = 7;
  const int n = 70000;
  std::vector<int> counts(bins, 0);
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_index(bins)];
  const double expected = static_cast<double>(n) / bins;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 6 degrees of freedom; 99.9% quantile is 22.46.
  EXPECT_LT(chi2, 22.46);
}

TEST(Shuffle, IsAPermutation) {
  CounterRng rng(14);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  fedcvr::shuffle(std::span<int>(v), rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
}

TEST(SampleWithoutReplacement, DistinctAscendingAndUniformInclusion) {
  CounterRng rng(15);
  const std::size_t n = 10;
  const std::size_t m = 3;
  const int trials = 30000;
  std::vector<int> hits(n, 0);
  for (int t = 0; t < trials; ++t) {
    const auto s = fedcvr::sample_without_replacement(n, m, rng);
    ASSERT_EQ(s.size(), m);
    ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
    ASSERT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), m);
    for (auto i : s) ++hits[i];
  }
  const double p = static_cast<double>(m) / n;
  const double sd = std::sqrt(trials * p * (1 - p));
  for (int h : hits) EXPECT_NEAR(h, trials * p, 4.0 * sd);
}

TEST(WeightedSample, FirstDrawFollowsWeights) {
  CounterRng rng(16);
  const std::vector<double> w = {1.0, 2.0, 3.0, 4.0};
  const int trials = 40000;
  std::vector<int> first(4, 0);
  for (int t = 0; t < trials; ++t) {
    const auto s = fedcvr::weighted_sample_without_replacement(w, 2, rng);
    ASSERT_EQ(s.size(), 2u);
    ASSERT_NE(s[0], s[1]);
    ++first[s[0]];
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double p = w[i] / 10.0;
    EXPECT_NEAR(first[i], trials * p, 4.0 * std::sqrt(trials * p * (1 - p)));
  }
}

TEST(WeightedSample, SecondDrawFollowsSuccessiveSampling) {
  // P(second = j | first = i) = w_j / (W - w_i); marginal by enumeration.
  CounterRng rng(17);
  const std::vector<double> w = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> expected(4, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) expected[j] += (w[i] / 10.0) * (w[j] / (10.0 - w[i]));
    }
  }
  const int trials = 40000;
  std::vector<int> second(4, 0);
  for (int t = 0; t < trials; ++t) ++second[fedcvr::weighted_sample_without_replacement(w, 2, rng)[1]];
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(second[j], trials * expected[j], 4.0 * std::sqrt(trials * expected[j] * (1 - expected[j])));
  }
}

TEST(SampleCategorical, MatchesWeights) {
  CounterRng rng(18);
  const std::vector<double> w = {0.5, 0.0, 1.5};
  const int trials = 40000;
  std::vector<int> hits(3, 0);
  for (int t = 0; t < trials; ++t) ++hits[fedcvr::sample_categorical(w, rng)];
  EXPECT_EQ(hits[1], 0);
  EXPECT_NEAR(hits[0], trials * 0.25, 4.0 * std::sqrt(trials * 0.25 * 0.75));
}
