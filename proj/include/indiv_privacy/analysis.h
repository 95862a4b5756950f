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

// Read-only analytics over a privacy report: epsilon versus log loss,
// per-group aggregates and epsilon histograms.

#ifndef INDIV_PRIVACY_ANALYSIS_H_
#define INDIV_PRIVACY_ANALYSIS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "indiv_privacy/accountant.h"

namespace indiv_privacy {

inline constexpr double kLossFloor = 1e-12;

// Sample Pearson coefficient. Fails when either input is constant.
absl::StatusOr<double> Pearson(std::span<const double> xs,
                               std::span<const double> ys);

struct CorrelationResult {
  double pearson_r = 0.0;
  // Least-squares fit epsilon ~ slope * log(loss) + intercept.
  double slope = 0.0;
  double intercept = 0.0;
  int64_t count = 0;
  // Examples at the worst-case epsilon; they are included in the fit.
  int64_t capped = 0;
};

absl::StatusOr<CorrelationResult> EpsLossCorrelation(
    const PrivacyReport& report, std::span<const double> losses);

struct GroupStats {
  int64_t label = 0;
  int64_t size = 0;
  double mean_epsilon = 0.0;
  double mean_loss = 0.0;
  std::optional<double> accuracy;
};

struct GroupSummary {
  // Ascending mean epsilon; ties keep ascending label order.
  std::vector<GroupStats> groups;
  // (max - min) / min over group mean epsilons. Unset when min is 0 < max.
  std::optional<double> disparity;
};

// `correct` (1 when the example is classified correctly) is optional.
absl::StatusOr<GroupSummary> SummarizeGroups(
    std::span<const double> epsilons, std::span<const double> losses,
    std::span<const int64_t> groups,
    std::optional<std::span<const int>> correct = std::nullopt);

struct EpsilonHistogram {
  std::vector<double> edges;  // bins + 1 values from 0 to the upper edge
  std::vector<int64_t> counts;
  // Smallest epsilon with at least 30%, 50% and 70% of examples at or below.
  std::vector<double> quantile_levels = {0.3, 0.5, 0.7};
  std::vector<double> quantile_markers;
  double worst_case_marker = 0.0;
};

// Bins over [0, worst-case epsilon]. Values at or above the top edge land in
// the last bin.
absl::StatusOr<EpsilonHistogram> Histogram(std::span<const double> epsilons,
                                           double worst_case_epsilon,
                                           int64_t bins);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_ANALYSIS_H_
