#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "heavytail/stats.hpp"

using namespace heavytail;

TEST(Slope, ExactPowerData) {
  std::vector<double> x, y;
  for (double v : {1e4, 1e5, 1e6, 1e7}) {
    x.push_back(v);
    y.push_back(std::pow(v, 0.6));
  }
  const auto s = stats::log_log_slope(x, y);
  EXPECT_NEAR(s.slope, 0.6, 1e-10);
  EXPECT_NEAR(s.stderr_, 0.0, 1e-10);
  EXPECT_THROW(stats::log_log_slope({1.0, -1.0}, {1.0, 2.0}), domain_error);
  EXPECT_THROW(stats::ols({1.0, 1.0}, {1.0, 2.0}), domain_error);
}

TEST(Ks, IdenticalAndShiftedSamples) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  EXPECT_EQ(stats::ks_two_sample(a, a).D, 0.0);
  EXPECT_DOUBLE_EQ(stats::ks_two_sample(a, {6, 7, 8, 9, 10}).D, 1.0);
  const auto k = stats::ks_two_sample(std::vector<double>(100, 0.0), std::vector<double>(100, 0.0));
  EXPECT_NEAR(k.critical_5, 1.358 * std::sqrt(0.02), 1e-12);
}

TEST(Ks, RoundingLevelDifferencesAreTies) {
  const double x = 0.1 * 3.0, y = 0.3;  // differ in the last bit
  EXPECT_EQ(stats::ks_two_sample({x, 1.0}, {y, 1.0}).D, 0.0);
}

TEST(Ks, SameLawStaysBelowCritical) {
  Rng rng(1);
  std::vector<double> a, b;
  for (int i = 0; i < 5000; ++i) {
    a.push_back(exponential(rng, 1.0));
    b.push_back(exponential(rng, 1.0));
  }
  const auto k = stats::ks_two_sample(a, b);
  EXPECT_LT(k.D, k.critical_1);
}

TEST(Tv, SelfDistanceIsZero) {
  const std::map<int, double> p{{0, 0.2}, {1, 0.8}};
  EXPECT_EQ(stats::tv_distance(p, p), 0.0);
  EXPECT_EQ(stats::tv_empirical(std::map<int, long long>{{0, 2}, {1, 8}}, p), 0.0);
  EXPECT_NEAR(stats::tv_distance(p, std::map<int, double>{{2, 1.0}}), 1.0, 1e-15);
}

TEST(SizeBiased, ZeroWeightsGoLast) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto perm = stats::size_biased_permutation({1.0, 0.0, 0.0, 0.0}, rng);
    EXPECT_EQ(perm.front(), 0u);
    EXPECT_EQ(perm.size(), 4u);
  }
}

TEST(SizeBiased, FirstPickIsProportional) {
  Rng rng(3);
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  std::map<std::size_t, long long> counts;
  for (int i = 0; i < 100000; ++i) ++counts[stats::size_biased_permutation(x, rng)[0]];
  const std::map<std::size_t, double> exact{{0, 0.1}, {1, 0.2}, {2, 0.3}, {3, 0.4}};
  EXPECT_LT(stats::tv_empirical(counts, exact), 0.01);
}

TEST(SizeBiased, SecondPickMatchesSequentialSampling) {
  // P(second = j) = sum_{i != j} x_i/S * x_j/(S - x_i)
  Rng rng(4);
  const std::vector<double> x{1.0, 2.0, 3.0};
  std::map<std::size_t, double> exact;
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i)
      if (i != j) exact[j] += x[i] / 6.0 * x[j] / (6.0 - x[i]);
  std::map<std::size_t, long long> counts;
  for (int i = 0; i < 100000; ++i) ++counts[stats::size_biased_permutation(x, rng)[1]];
  EXPECT_LT(stats::tv_empirical(counts, exact), 0.01);
}

TEST(SizeBiased, ReorderingDeviationShrinksForBoundedWeights) {
  // with i.i.d. bounded weights the partial y-sums along the reordering
  // concentrate around their linear prediction
  Rng rng(5);
  double prev = 1e9;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    double acc = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = 1.0 + double(uniform_index(rng, 3));
        y[i] = 1.0 + double(uniform_index(rng, 5));
      }
      acc += stats::size_biased_deviation(x, y, n / 2, rng).sup_deviation;
    }
    EXPECT_LT(acc / reps, prev);
    prev = acc / reps;
  }
  EXPECT_LT(prev, 0.02);
}

TEST(SizeBiased, DeviationConditionsHandValue) {
  Rng rng(6);
  const auto c = stats::size_biased_deviation({1.0, 1.0}, {2.0, 2.0}, 2, rng);
  // m10 = 2, m11 = 4, m20 = 2, m21 = 4, m12 = 8
  EXPECT_NEAR(c.condition_1, 2.0 * 4.0 / (2.0 * 4.0), 1e-15);
  EXPECT_NEAR(c.condition_2, 8.0 * 2.0 / (2.0 * 16.0), 1e-15);
  EXPECT_NEAR(c.condition_3, 2.0 * 2.0 / 4.0, 1e-15);
  EXPECT_NEAR(c.sup_deviation, 0.0, 1e-15);
}

TEST(Summaries, MeanMedianQuantile) {
  const std::vector<double> v{3, 1, 2, 4};
  EXPECT_DOUBLE_EQ(stats::mean(v), 2.5);
  EXPECT_DOUBLE_EQ(stats::median(v), 2.5);
  EXPECT_DOUBLE_EQ(stats::quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(v, 1.0), 4.0);
  EXPECT_NEAR(stats::stderr_of_mean(v), std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(Summaries, BootstrapCoversMean) {
  Rng rng(7);
  std::vector<double> v;
  for (int i = 0; i < 400; ++i) v.push_back(exponential(rng, 1.0));
  const auto ci = stats::bootstrap_ci(v, stats::mean, 1000, 0.95, rng);
  EXPECT_LT(ci.lo, stats::mean(v));
  EXPECT_GT(ci.hi, stats::mean(v));
  EXPECT_NEAR(ci.hi - ci.lo, 2 * 1.96 * stats::stderr_of_mean(v), 0.3 * (ci.hi - ci.lo));
}
