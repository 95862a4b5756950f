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

// Differentially private release of population statistics of per-example
// epsilons. Neighboring inputs differ by replacing one value; n and the value
// bound B are public.

#ifndef INDIV_PRIVACY_RELEASE_H_
#define INDIV_PRIVACY_RELEASE_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "indiv_privacy/rdp_math.h"

namespace indiv_privacy {

// An infinite epsilon means no noise.
struct PrivacyBudget {
  double epsilon = 0.1;
  double delta = kDefaultDelta;

  bool unlimited() const;
};

// Default grid extended with {512, 1024, 2048, 4096}, so that small budgets
// on a pure Gaussian mechanism stay reachable.
const OrderGrid& ReleaseOrderGrid();

// Noise multiplier for `queries` composed Gaussian queries within `budget`.
// Zero for an unlimited budget.
absl::StatusOr<double> GaussianMultiplier(const PrivacyBudget& budget,
                                          int64_t queries);

struct MeanRelease {
  double value = 0.0;
  double clamped_mean = 0.0;  // pre-noise
  double noise_std = 0.0;
};

// Clamped mean plus Gaussian noise of std multiplier * B / n.
absl::StatusOr<MeanRelease> DpMeanWithMultiplier(std::span<const double> values,
                                                 double bound, double multiplier,
                                                 std::mt19937_64& rng);
absl::StatusOr<MeanRelease> DpMean(std::span<const double> values, double bound,
                                   const PrivacyBudget& budget,
                                   std::mt19937_64& rng);

struct QuantileOptions {
  int64_t steps = 20;
  double step_size = 0.2;
  // Estimates never drop below floor_fraction * B.
  double floor_fraction = 1e-3;
};

struct QuantileRelease {
  double target = 0.5;
  double value = 0.0;
  double count_noise_std = 0.0;
};

// Iterative geometric quantile estimate starting at B / 2. Step k multiplies
// the estimate by exp(-eta_k * (noisy_fraction_below - target)), with
// eta_k = 2 * step_size * (1 - k / steps), so the average step is step_size.
// Each noisy count has noise std `multiplier`.
absl::StatusOr<QuantileRelease> DpQuantileWithMultiplier(
    std::span<const double> values, double target, double bound,
    double multiplier, const QuantileOptions& options, std::mt19937_64& rng);
absl::StatusOr<QuantileRelease> DpQuantile(std::span<const double> values,
                                           double target, double bound,
                                           const PrivacyBudget& budget,
                                           const QuantileOptions& options,
                                           std::mt19937_64& rng);

struct ReleaseConfig {
  PrivacyBudget budget;
  double bound = 0.0;  // B, normally the worst-case epsilon
  std::vector<double> targets = {0.1, 0.3, 0.5, 0.7, 0.9};
  QuantileOptions quantile;
  uint64_t seed = 0;
  bool zero_noise = false;

  absl::Status Validate() const;
};

struct ReleasedStats {
  MeanRelease mean;
  std::vector<QuantileRelease> quantiles;  // in target order
  // Noise multipliers actually used, per mean query and per count query.
  double mean_multiplier = 0.0;
  double quantile_multiplier = 0.0;
  // Composed guarantee of every query that ran, converted once.
  double realized_epsilon = 0.0;
  double realized_delta = 0.0;
  int64_t num_queries = 0;
};

// Splits the budget evenly across the mean and each quantile in RDP. Released
// quantiles are sorted so they are non-decreasing in the target.
absl::StatusOr<ReleasedStats> ReleaseAll(std::span<const double> values,
                                         const ReleaseConfig& config);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_RELEASE_H_
