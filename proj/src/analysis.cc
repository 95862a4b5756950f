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

#include "indiv_privacy/analysis.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "absl/strings/str_format.h"

namespace indiv_privacy {
namespace {

struct Moments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

Moments CentralMoments(std::span<const double> xs, std::span<const double> ys) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    m.mean_x += xs[i];
    m.mean_y += ys[i];
  }
  m.mean_x /= n;
  m.mean_y /= n;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - m.mean_x;
    const double dy = ys[i] - m.mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

bool IsConstant(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo == *hi;
}

}  // namespace

absl::StatusOr<double> Pearson(std::span<const double> xs,
                               std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Pearson inputs differ in length: %d vs %d.", xs.size(), ys.size()));
  }
  if (xs.size() < 2) {
    return absl::InvalidArgumentError("Pearson needs at least two points.");
  }
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("Non-finite value at index %d.", i));
    }
  }
  if (IsConstant(xs) || IsConstant(ys)) {
    return absl::FailedPreconditionError(
        "Pearson is undefined: an input has zero variance.");
  }
  const Moments m = CentralMoments(xs, ys);
  return std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
}

absl::StatusOr<CorrelationResult> EpsLossCorrelation(
    const PrivacyReport& report, std::span<const double> losses) {
  if (static_cast<int64_t>(losses.size()) != report.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Report has %d examples but %d losses were given.", report.size(),
        losses.size()));
  }
  std::vector<double> log_losses;
  log_losses.reserve(losses.size());
  for (size_t i = 0; i < losses.size(); ++i) {
    if (!(losses[i] >= 0.0) || !std::isfinite(losses[i])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("Loss of example %d is %g.", i, losses[i]));
    }
    log_losses.push_back(std::log(std::max(losses[i], kLossFloor)));
  }
  absl::StatusOr<double> r = Pearson(report.epsilons, log_losses);
  if (!r.ok()) return r.status();

  CorrelationResult out;
  out.pearson_r = *r;
  out.count = report.size();
  const Moments m = CentralMoments(log_losses, report.epsilons);
  out.slope = m.sxy / m.sxx;
  out.intercept = m.mean_y - out.slope * m.mean_x;
  for (double e : report.epsilons) {
    if (e >= report.worst_case_epsilon - 1e-9) ++out.capped;
  }
  return out;
}

absl::StatusOr<GroupSummary> SummarizeGroups(
    std::span<const double> epsilons, std::span<const double> losses,
    std::span<const int64_t> groups, std::optional<std::span<const int>> correct) {
  if (epsilons.size() != losses.size() || epsilons.size() != groups.size() ||
      (correct.has_value() && correct->size() != epsilons.size())) {
    return absl::InvalidArgumentError(
        "Epsilons, losses, groups and correctness must have equal lengths.");
  }
  if (epsilons.empty()) return absl::InvalidArgumentError("No examples.");

  struct Sums {
    int64_t size = 0;
    double epsilon = 0.0;
    double loss = 0.0;
    int64_t correct = 0;
  };
  std::map<int64_t, Sums> sums;
  for (size_t i = 0; i < epsilons.size(); ++i) {
    Sums& s = sums[groups[i]];
    ++s.size;
    s.epsilon += epsilons[i];
    s.loss += losses[i];
    if (correct.has_value()) s.correct += (*correct)[i] != 0;
  }

  GroupSummary out;
  for (const auto& [label, s] : sums) {
    GroupStats g;
    g.label = label;
    g.size = s.size;
    g.mean_epsilon = s.epsilon / s.size;
    g.mean_loss = s.loss / s.size;
    if (correct.has_value()) {
      g.accuracy = static_cast<double>(s.correct) / s.size;
    }
    out.groups.push_back(g);
  }
  std::stable_sort(out.groups.begin(), out.groups.end(),
                   [](const GroupStats& a, const GroupStats& b) {
                     return a.mean_epsilon < b.mean_epsilon;
                   });
  const double lo = out.groups.front().mean_epsilon;
  const double hi = out.groups.back().mean_epsilon;
  if (hi == lo) {
    out.disparity = 0.0;
  } else if (lo > 0.0) {
    out.disparity = (hi - lo) / lo;
  }
  return out;
}

absl::StatusOr<EpsilonHistogram> Histogram(std::span<const double> epsilons,
                                           double worst_case_epsilon,
                                           int64_t bins) {
  if (bins < 1) return absl::InvalidArgumentError("bins must be >= 1.");
  if (!(worst_case_epsilon > 0.0) || !std::isfinite(worst_case_epsilon)) {
    return absl::InvalidArgumentError(
        "Worst-case epsilon must be finite and > 0.");
  }
  EpsilonHistogram out;
  out.worst_case_marker = worst_case_epsilon;
  const double width = worst_case_epsilon / static_cast<double>(bins);
  for (int64_t b = 0; b <= bins; ++b) {
    out.edges.push_back(b == bins ? worst_case_epsilon : b * width);
  }
  out.counts.assign(bins, 0);
  for (double e : epsilons) {
    int64_t b = static_cast<int64_t>(std::floor(std::max(e, 0.0) / width));
    ++out.counts[std::clamp<int64_t>(b, 0, bins - 1)];
  }
  if (!epsilons.empty()) {
    std::vector<double> sorted(epsilons.begin(), epsilons.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (double level : out.quantile_levels) {
      const int64_t k = static_cast<int64_t>(std::ceil(level * n - 1e-9));
      out.quantile_markers.push_back(
          sorted[std::clamp<int64_t>(k - 1, 0, sorted.size() - 1)]);
    }
  }
  return out;
}

}  // namespace indiv_privacy
