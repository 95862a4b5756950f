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


#include "indiv_privacy/accountant.h"

#include <cmath>
#include <vector>

#include "test_util.h"

namespace indiv_privacy {
namespace {

using ::indiv_privacy::testing::StatusIs;

AccountantConfig SmallConfig() {
  AccountantConfig config;
  config.noise_std = 2.0;
  config.max_clip = 1.0;
  config.sampling_prob = 0.1;
  return config;
}

// Curve of one step at sensitivity z, computed without the cache.
RdpCurve StepCurve(const AccountantConfig& config, double z) {
  if (z == 0.0) return RdpCurve::Zero(config.grid);
  return *SgmRdpCurve({config.sampling_prob, config.noise_std / z}, config.grid);
}

TEST(RoundToBucketTest, NearestBucket) {
  EXPECT_DOUBLE_EQ(*RoundToBucket(0.34, 0.1, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(*RoundToBucket(0.36, 0.1, 1.0), 0.4);
  EXPECT_DOUBLE_EQ(*RoundToBucket(0.25, 0.1, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(*RoundToBucket(0.0, 0.1, 1.0), 0.1);
  EXPECT_DOUBLE_EQ(*RoundToBucket(0.01, 0.1, 1.0), 0.1);
  EXPECT_DOUBLE_EQ(*RoundToBucket(1.0, 0.1, 1.0), 1.0);
  // C is not a multiple of r: the top bucket is C itself.
  EXPECT_DOUBLE_EQ(*RoundToBucket(0.98, 0.3, 1.0), 1.0);
  EXPECT_THAT(RoundToBucket(0.5, 0.0, 1.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(RoundToBucket(-0.1, 0.1, 1.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(ClipSensitivityTest, Clips) {
  EXPECT_DOUBLE_EQ(*ClipSensitivity(0.5, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(*ClipSensitivity(3.0, 1.0), 1.0);
  EXPECT_THAT(ClipSensitivity(-1.0, 1.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(AccountantConfigTest, Validate) {
  EXPECT_OK(SmallConfig().Validate());
  AccountantConfig bad = SmallConfig();
  bad.noise_std = 0.0;
  EXPECT_THAT(bad.Validate(), StatusIs(absl::StatusCode::kInvalidArgument));
  bad = SmallConfig();
  bad.frequency = 0;
  EXPECT_THAT(bad.Validate(), StatusIs(absl::StatusCode::kInvalidArgument));
  bad = SmallConfig();
  bad.rounding = -0.5;
  EXPECT_THAT(bad.Validate(), StatusIs(absl::StatusCode::kInvalidArgument));
  bad = SmallConfig();
  bad.sampling_prob = 1.5;
  EXPECT_THAT(bad.Validate(), StatusIs(absl::StatusCode::kInvalidArgument));

  AccountantConfig rounded = SmallConfig();
  EXPECT_FALSE(rounded.BucketCount().has_value());
  rounded.rounding = 0.01;
  EXPECT_EQ(rounded.BucketCount(), 100);
}

TEST(BucketCacheTest, ComputesEachBucketOnce) {
  BucketCache cache(0.1, 2.0, OrderGrid::Default());
  ASSERT_OK_AND_ASSIGN(const RdpCurve* a, cache.GetOrCompute(0.5));
  ASSERT_OK_AND_ASSIGN(const RdpCurve* b, cache.GetOrCompute(0.5));
  EXPECT_EQ(a, b);
  EXPECT_EQ(cache.computations(), 1);
  ASSERT_OK_AND_ASSIGN(const RdpCurve* zero, cache.GetOrCompute(0.0));
  for (double v : zero->values) EXPECT_EQ(v, 0.0);
}

TEST(IndividualLedgerTest, AtMostOneComputationPerBucket) {
  AccountantConfig config = SmallConfig();
  config.rounding = 0.01;
  ASSERT_OK_AND_ASSIGN(IndividualLedger ledger,
                       IndividualLedger::Create(config, 1000));
  std::vector<double> norms(1000);
  for (int64_t step = 0; step < 20; ++step) {
    for (size_t i = 0; i < norms.size(); ++i) {
      norms[i] = std::fmod(0.001 * (i + 1) * (step + 3), 1.7);
    }
    ASSERT_OK(ledger.UpdateAssignments(norms, step));
    ASSERT_OK(ledger.RecordStep(step));
  }
  EXPECT_LE(ledger.cache().computations(), 100);
  EXPECT_GT(ledger.cache().computations(), 50);
}

TEST(IndividualLedgerTest, ComposesChargedCurvesByHand) {
  AccountantConfig config = SmallConfig();
  ASSERT_OK_AND_ASSIGN(IndividualLedger ledger,
                       IndividualLedger::Create(config, 3));
  const std::vector<std::vector<double>> norms = {
      {0.2, 0.9, 5.0}, {0.2, 0.4, 0.0}, {0.7, 0.4, 5.0}, {0.2, 0.9, 0.3}};
  for (int64_t step = 0; step < 4; ++step) {
    ASSERT_OK(ledger.UpdateAssignments(norms[step], step));
    ASSERT_OK(ledger.RecordStep(step));
  }
  for (int64_t i = 0; i < 3; ++i) {
    RdpCurve expected = RdpCurve::Zero(config.grid);
    for (int64_t step = 0; step < 4; ++step) {
      const double z = std::min(norms[step][i], config.max_clip);
      expected = *Compose(expected, StepCurve(config, z));
    }
    ASSERT_OK_AND_ASSIGN(RdpCurve got, ledger.AccumulatedRdp(i));
    for (size_t k = 0; k < expected.values.size(); ++k) {
      EXPECT_NEAR(got.values[k], expected.values[k], 1e-12 * expected.values[k])
          << "example " << i << " order " << config.grid[k];
    }
    ASSERT_OK_AND_ASSIGN(DpConversion dp, RdpToDp(expected, 1e-5));
    ASSERT_OK_AND_ASSIGN(EpsilonResult eps, ledger.EpsilonOf(i, 1e-5));
    EXPECT_NEAR(eps.epsilon, dp.epsilon, 1e-12);
  }
}

TEST(IndividualLedgerTest, HistogramCountsSumToSteps) {
  AccountantConfig config = SmallConfig();
  config.frequency = 3;
  config.rounding = 0.1;
  ASSERT_OK_AND_ASSIGN(IndividualLedger ledger,
                       IndividualLedger::Create(config, 2));
  for (int64_t step = 0; step < 10; ++step) {
    if (step % 3 == 0) {
      const double v = 0.1 * step;
      ASSERT_OK(ledger.UpdateAssignments(std::vector<double>{v, 1.0 - v}, step));
    }
    ASSERT_OK(ledger.RecordStep(step));
  }
  for (int64_t i = 0; i < 2; ++i) {
    ASSERT_OK_AND_ASSIGN(auto hist, ledger.Histogram(i));
    int64_t total = 0;
    for (const auto& [bucket, count] : hist) total += count;
    EXPECT_EQ(total, 10);
  }
  ASSERT_OK_AND_ASSIGN(auto hist, ledger.Histogram(0));
  ASSERT_EQ(hist.size(), 4u);
  EXPECT_DOUBLE_EQ(hist[0].first, 0.1);
  EXPECT_EQ(hist[0].second, 3);
  EXPECT_EQ(hist[3].second, 1);
  EXPECT_DOUBLE_EQ(*ledger.CurrentBucket(1), 0.1);
}

TEST(IndividualLedgerTest, EveryoneAtClipMatchesWorstCase) {
  AccountantConfig config = SmallConfig();
  ASSERT_OK_AND_ASSIGN(IndividualLedger ledger,
                       IndividualLedger::Create(config, 4));
  const std::vector<double> norms = {1.0, 2.0, 10.0, 1.0};
  for (int64_t step = 0; step < 25; ++step) {
    ASSERT_OK(ledger.UpdateAssignments(norms, step));
    ASSERT_OK(ledger.RecordStep(step));
  }
  ASSERT_OK_AND_ASSIGN(double worst, WorstCaseEpsilon(config, 25));
  for (int64_t i = 0; i < 4; ++i) {
    ASSERT_OK_AND_ASSIGN(EpsilonResult eps, ledger.EpsilonOf(i, config.delta));
    EXPECT_NEAR(eps.epsilon, worst, 1e-12);
  }
}

TEST(IndividualLedgerTest, RejectsOutOfOrderCalls) {
  AccountantConfig config = SmallConfig();
  config.frequency = 2;
  ASSERT_OK_AND_ASSIGN(IndividualLedger ledger,
                       IndividualLedger::Create(config, 2));
  EXPECT_THAT(ledger.RecordStep(0),
              StatusIs(absl::StatusCode::kFailedPrecondition));
  EXPECT_THAT(ledger.UpdateAssignments(std::vector<double>{1.0}, 0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(ledger.UpdateAssignments(std::vector<double>{1.0, NAN}, 0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  ASSERT_OK(ledger.UpdateAssignments(std::vector<double>{1.0, 0.5}, 0));
  EXPECT_THAT(ledger.RecordStep(1),
              StatusIs(absl::StatusCode::kFailedPrecondition));
  ASSERT_OK(ledger.RecordStep(0));
  EXPECT_THAT(ledger.UpdateAssignments(std::vector<double>{1.0, 0.5}, 1),
              StatusIs(absl::StatusCode::kFailedPrecondition));
  EXPECT_THAT(ledger.AccumulatedRdp(2), StatusIs(absl::StatusCode::kOutOfRange));
  EXPECT_THAT(IndividualLedger::Create(config, 0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(MakeReportTest, EpsilonsAndGroups) {
  AccountantConfig config = SmallConfig();
  ASSERT_OK_AND_ASSIGN(IndividualLedger ledger,
                       IndividualLedger::Create(config, 4));
  const std::vector<double> norms = {0.1, 0.2, 1.0, 0.5};
  for (int64_t step = 0; step < 10; ++step) {
    ASSERT_OK(ledger.UpdateAssignments(norms, step));
    ASSERT_OK(ledger.RecordStep(step));
  }
  const std::vector<int64_t> labels = {7, 3, 7, 3};
  ASSERT_OK_AND_ASSIGN(PrivacyReport report,
                       MakeReport(ledger, 1e-5, std::span<const int64_t>(labels)));
  ASSERT_EQ(report.size(), 4);
  EXPECT_EQ(report.total_steps, 10);
  EXPECT_LT(report.epsilons[0], report.epsilons[1]);
  EXPECT_LT(report.epsilons[1], report.epsilons[3]);
  EXPECT_NEAR(report.epsilons[2], report.worst_case_epsilon, 1e-12);
  ASSERT_EQ(report.groups.size(), 2u);
  EXPECT_EQ(report.groups[0].label, 3);
  EXPECT_EQ(report.groups[0].size, 2);
  EXPECT_DOUBLE_EQ(report.groups[0].mean_epsilon,
                   (report.epsilons[1] + report.epsilons[3]) / 2.0);
  EXPECT_EQ(report.groups[1].label, 7);

  const std::vector<int64_t> short_labels = {1};
  EXPECT_THAT(MakeReport(ledger, 1e-5, std::span<const int64_t>(short_labels)),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(MakeReportTest, EmptyLedgerFails) {
  ASSERT_OK_AND_ASSIGN(IndividualLedger ledger,
                       IndividualLedger::Create(SmallConfig(), 2));
  EXPECT_FALSE(MakeReport(ledger, 1e-5).ok());
}

}  // namespace
}  // namespace indiv_privacy
