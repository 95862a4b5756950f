//
// Copyright 2026 The indiv_privacy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#include "indiv_privacy/release.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "test_util.h"

namespace indiv_privacy {
namespace {

using ::indiv_privacy::testing::StatusIs;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> Uniform(int64_t n, double hi, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

TEST(GaussianMultiplierTest, ComposedQueriesStayWithinBudget) {
  const PrivacyBudget budget{0.5, 1e-5};
  for (int64_t queries : {1, 20, 101}) {
    ASSERT_OK_AND_ASSIGN(double m, GaussianMultiplier(budget, queries));
    ASSERT_OK_AND_ASSIGN(RdpCurve curve, GaussianRdpCurve(m, ReleaseOrderGrid()));
    ASSERT_OK_AND_ASSIGN(DpConversion dp,
                         RdpToDp(Scale(curve, queries), budget.delta));
    EXPECT_LE(dp.epsilon, budget.epsilon);
    EXPECT_GE(dp.epsilon, budget.epsilon - kCalibrationTolerance);
  }
  ASSERT_OK_AND_ASSIGN(double none, GaussianMultiplier({kInf, 1e-5}, 5));
  EXPECT_EQ(none, 0.0);
}

TEST(DpMeanTest, ZeroNoiseIsExactClampedMean) {
  std::mt19937_64 rng(0);
  const std::vector<double> values = {1.0, 2.0, 3.0};
  ASSERT_OK_AND_ASSIGN(MeanRelease mean, DpMean(values, 8.0, {kInf, 1e-5}, rng));
  EXPECT_DOUBLE_EQ(mean.value, 2.0);
  EXPECT_EQ(mean.noise_std, 0.0);

  const std::vector<double> wide = {-4.0, 2.0, 20.0};
  ASSERT_OK_AND_ASSIGN(MeanRelease clamped,
                       DpMeanWithMultiplier(wide, 8.0, 0.0, rng));
  EXPECT_DOUBLE_EQ(clamped.value, 10.0 / 3.0);
}

TEST(DpMeanTest, AccurateAtSmallBudget) {
  const std::vector<double> values = Uniform(10000, 8.0, 1);
  double truth = 0.0;
  for (double v : values) truth += v;
  truth /= values.size();
  std::mt19937_64 rng(2);
  int within = 0;
  double noise_std = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ASSERT_OK_AND_ASSIGN(MeanRelease mean,
                         DpMean(values, 8.0, {0.05, 1e-5}, rng));
    noise_std = mean.noise_std;
    within += std::abs(mean.value - truth) <= 3.0 * mean.noise_std;
  }
  EXPECT_GT(noise_std, 0.0);
  EXPECT_GE(within, 95);
}

TEST(DpMeanTest, RejectsBadInput) {
  std::mt19937_64 rng(0);
  EXPECT_THAT(DpMeanWithMultiplier({}, 1.0, 1.0, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
  const std::vector<double> values = {1.0};
  EXPECT_THAT(DpMeanWithMultiplier(values, 0.0, 1.0, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(DpMeanWithMultiplier(values, 1.0, -1.0, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(DpQuantileTest, NoiselessMedianConverges) {
  std::vector<double> values;
  for (int i = 1; i <= 100; ++i) values.push_back(i);
  std::mt19937_64 rng(0);
  for (double bound : {100.0, 128.0}) {
    ASSERT_OK_AND_ASSIGN(
        QuantileRelease q,
        DpQuantileWithMultiplier(values, 0.5, bound, 0.0, {}, rng));
    EXPECT_NEAR(q.value, 50.5, 5.0) << bound;
  }
}

TEST(DpQuantileTest, DegenerateValues) {
  std::mt19937_64 rng(0);
  for (double v : {3.0, 4.0, 5.0, 6.0}) {
    const std::vector<double> values(50, v);
    for (double target : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      ASSERT_OK_AND_ASSIGN(
          QuantileRelease q,
          DpQuantileWithMultiplier(values, target, 8.0, 0.0, {}, rng));
      EXPECT_NEAR(q.value, v, 0.1 * v) << "v=" << v << " target=" << target;
    }
  }
}

TEST(DpQuantileTest, HighQuantileAtSmallShare) {
  // One release among six sharing epsilon = 0.3, so each gets about 0.05.
  const std::vector<double> values = Uniform(10000, 8.0, 3);
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double truth = sorted[static_cast<size_t>(0.9 * sorted.size()) - 1];
  ASSERT_OK_AND_ASSIGN(double whole, GaussianMultiplier({0.3, 1e-5}, 1));
  const QuantileOptions options;
  const double multiplier = whole * std::sqrt(6.0 * options.steps);
  std::mt19937_64 rng(4);
  int within = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ASSERT_OK_AND_ASSIGN(
        QuantileRelease q,
        DpQuantileWithMultiplier(values, 0.9, 8.0, multiplier, options, rng));
    within += std::abs(q.value - truth) <= 0.5;
  }
  EXPECT_GE(within, 90);
}

TEST(DpQuantileTest, FailsWhenNoiseSwampsCounts) {
  const std::vector<double> values = Uniform(100, 8.0, 5);
  std::mt19937_64 rng(0);
  EXPECT_THAT(DpQuantileWithMultiplier(values, 0.5, 8.0, 26.0, {}, rng),
              StatusIs(absl::StatusCode::kFailedPrecondition));
  EXPECT_THAT(DpQuantileWithMultiplier(values, 1.0, 8.0, 0.0, {}, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(ReleaseAllTest, RealizedBudgetAndMonotoneQuantiles) {
  const std::vector<double> values = Uniform(20000, 6.0, 6);
  ReleaseConfig config;
  config.budget = {0.5, 1e-5};
  config.bound = 8.0;
  config.targets = {0.9, 0.1, 0.5, 0.3, 0.7};
  config.seed = 9;
  ASSERT_OK_AND_ASSIGN(ReleasedStats stats, ReleaseAll(values, config));
  EXPECT_LE(stats.realized_epsilon, config.budget.epsilon);
  EXPECT_GT(stats.realized_epsilon, 0.4);
  EXPECT_EQ(stats.num_queries, 1 + 5 * 20);
  ASSERT_EQ(stats.quantiles.size(), 5u);
  std::vector<std::pair<double, double>> by_target;
  for (const QuantileRelease& q : stats.quantiles) {
    by_target.emplace_back(q.target, q.value);
  }
  EXPECT_EQ(stats.quantiles[0].target, 0.9);
  std::sort(by_target.begin(), by_target.end());
  for (size_t k = 1; k < by_target.size(); ++k) {
    EXPECT_LE(by_target[k - 1].second, by_target[k].second);
  }
  EXPECT_NEAR(stats.mean.value, 3.0, 0.2);

  ASSERT_OK_AND_ASSIGN(ReleasedStats again, ReleaseAll(values, config));
  EXPECT_EQ(again.mean.value, stats.mean.value);
  EXPECT_EQ(again.quantiles[2].value, stats.quantiles[2].value);
}

TEST(ReleaseAllTest, ZeroNoise) {
  ReleaseConfig config;
  config.bound = 8.0;
  config.zero_noise = true;
  config.budget.epsilon = 0.0;
  const std::vector<double> values = {1.0, 2.0, 3.0};
  ASSERT_OK_AND_ASSIGN(ReleasedStats stats, ReleaseAll(values, config));
  EXPECT_DOUBLE_EQ(stats.mean.value, 2.0);
  EXPECT_TRUE(std::isinf(stats.realized_epsilon));
}

TEST(ReleaseAllTest, ValidatesConfig) {
  const std::vector<double> values = {1.0};
  ReleaseConfig config;
  EXPECT_THAT(ReleaseAll(values, config),
              StatusIs(absl::StatusCode::kInvalidArgument));
  config.bound = 1.0;
  config.targets = {0.5, 1.2};
  EXPECT_THAT(ReleaseAll(values, config),
              StatusIs(absl::StatusCode::kInvalidArgument));
  config.targets = {0.5};
  config.budget.epsilon = -1.0;
  EXPECT_THAT(ReleaseAll(values, config),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

}  // namespace
}  // namespace indiv_privacy
