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

// Per-example privacy ledger for DP-SGD.
//
// Every example carries a sensitivity Z (its clipped, optionally rounded,
// gradient norm) that is refreshed every K steps. Each training step charges
// every example, sampled or not, the subsampled-Gaussian RDP curve of noise
// multiplier sigma / Z. Curves are computed once per distinct bucket and the
// ledger only stores, per example, how many steps were charged to each
// bucket; accumulated curves are materialized on demand.
//
// For a fixed training trajectory, the accumulated curve converted with
// RdpToDp is an output-specific (epsilon, delta) guarantee for that example
// when K = 1 and rounding is disabled; otherwise it is an estimate.

#ifndef INDIV_PRIVACY_ACCOUNTANT_H_
#define INDIV_PRIVACY_ACCOUNTANT_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "indiv_privacy/rdp_math.h"

namespace indiv_privacy {

struct AccountantConfig {
  double noise_std = 1.0;      // sigma, in gradient-norm units
  double max_clip = 1.0;       // C
  double sampling_prob = 0.01; // p
  double rounding = 0.0;       // r; 0 disables rounding
  int64_t frequency = 1;       // K
  double delta = kDefaultDelta;
  OrderGrid grid = OrderGrid::Default();

  absl::Status Validate() const;
  // ceil(C / r), or nullopt when rounding is disabled.
  std::optional<int64_t> BucketCount() const;
};

// min(norm, C).
absl::StatusOr<double> ClipSensitivity(double norm, double max_clip);

// Nearest value of {r, 2r, ..., C}; ties go to the larger value and 0 maps to
// r.
absl::StatusOr<double> RoundToBucket(double sensitivity, double rounding,
                                     double max_clip);

// Maps a sensitivity bucket to its single-step RDP curve. Lookups may run
// concurrently; insertion takes an exclusive lock.
class BucketCache {
 public:
  BucketCache(double sampling_prob, double noise_std, OrderGrid grid);

  // Returns the cached curve for sensitivity `bucket`, computing it on first
  // use. A zero sensitivity has a zero curve. The reference stays valid for
  // the cache's lifetime.
  absl::StatusOr<const RdpCurve*> GetOrCompute(double bucket);

  // Number of distinct curves computed so far.
  int64_t computations() const;

  // Multiplies one cached curve by `factor`. Only for negative-control tests.
  void CorruptForTesting(double bucket, double factor);

 private:
  const double sampling_prob_;
  const double noise_std_;
  const OrderGrid grid_;
  mutable std::shared_mutex mu_;
  std::map<double, std::unique_ptr<RdpCurve>> curves_;
};

struct EpsilonResult {
  double epsilon = 0.0;
  double best_order = 0.0;
};

class IndividualLedger {
 public:
  static absl::StatusOr<IndividualLedger> Create(const AccountantConfig& config,
                                                 int64_t num_examples);

  IndividualLedger(IndividualLedger&&) = default;
  IndividualLedger& operator=(IndividualLedger&&) = default;

  // Refreshes every example's bucket from its gradient norm. Must be called
  // at step == total_steps() with step % K == 0, before RecordStep(step).
  absl::Status UpdateAssignments(std::span<const double> norms, int64_t step);

  // Charges every example one step at its current bucket.
  absl::Status RecordStep(int64_t step);

  // Sum over buckets of count * curve.
  absl::StatusOr<RdpCurve> AccumulatedRdp(int64_t example) const;

  absl::StatusOr<EpsilonResult> EpsilonOf(int64_t example, double delta) const;

  // (bucket value, charged steps) pairs, in first-charged order.
  absl::StatusOr<std::vector<std::pair<double, int64_t>>> Histogram(
      int64_t example) const;

  absl::StatusOr<double> CurrentBucket(int64_t example) const;

  const AccountantConfig& config() const { return config_; }
  int64_t num_examples() const { return num_examples_; }
  int64_t total_steps() const { return total_steps_; }
  bool initialized() const { return initialized_; }
  const BucketCache& cache() const { return *cache_; }
  BucketCache& mutable_cache_for_testing() { return *cache_; }

 private:
  IndividualLedger(const AccountantConfig& config, int64_t num_examples);

  absl::Status CheckIndex(int64_t example) const;
  uint32_t InternBucket(double value);

  AccountantConfig config_;
  int64_t num_examples_ = 0;
  int64_t total_steps_ = 0;
  bool initialized_ = false;
  std::unique_ptr<BucketCache> cache_;

  // Dense ids for bucket values seen so far, and their curves.
  std::vector<double> bucket_values_;
  std::vector<const RdpCurve*> bucket_curves_;
  std::map<double, uint32_t> bucket_ids_;

  // Steps are charged lazily: an example's current bucket owes
  // total_steps_ - assigned_since_ steps that are not yet in its histogram.
  std::vector<uint32_t> current_bucket_;
  std::vector<int64_t> assigned_since_;
  std::vector<std::vector<std::pair<uint32_t, int64_t>>> histograms_;
};

// Uniform DP-SGD guarantee: T steps at sensitivity C for everyone.
absl::StatusOr<double> WorstCaseEpsilon(const AccountantConfig& config,
                                        int64_t steps);

struct GroupAggregate {
  int64_t label = 0;
  int64_t size = 0;
  double mean_epsilon = 0.0;
};

struct PrivacyReport {
  AccountantConfig config;
  int64_t total_steps = 0;
  double delta = kDefaultDelta;
  double worst_case_epsilon = 0.0;
  std::vector<double> epsilons;
  std::vector<double> best_orders;
  // Empty unless group labels were supplied.
  std::vector<int64_t> group_labels;
  std::vector<GroupAggregate> groups;

  int64_t size() const { return static_cast<int64_t>(epsilons.size()); }
};

// Per-example epsilons at `delta` plus optional per-group means (groups are
// listed in ascending label order).
absl::StatusOr<PrivacyReport> MakeReport(
    const IndividualLedger& ledger, double delta,
    std::optional<std::span<const int64_t>> group_labels = std::nullopt);

// Per-group means of `values` keyed by label, in ascending label order.
std::vector<GroupAggregate> AggregateByGroup(std::span<const double> values,
                                             std::span<const int64_t> labels);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_ACCOUNTANT_H_
