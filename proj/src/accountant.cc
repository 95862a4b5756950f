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

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "absl/strings/str_format.h"

namespace indiv_privacy {
namespace {

// Below this many examples a report is computed on the calling thread.
constexpr int64_t kParallelReportThreshold = 4096;

// Slack allowed when checking that no example exceeds the worst case.
constexpr double kDominanceSlack = 1e-9;

int64_t RoundingBucketCount(double max_clip, double rounding) {
  int64_t count = static_cast<int64_t>(std::ceil(max_clip / rounding));
  // Guard against C / r landing a hair above an integer.
  if (count > 1 && static_cast<double>(count - 1) * rounding >=
                       max_clip * (1.0 - 1e-12)) {
    --count;
  }
  return std::max<int64_t>(count, 1);
}

}  // namespace

absl::Status AccountantConfig::Validate() const {
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("noise_std must be finite and > 0, got %g.", noise_std));
  }
  if (!(max_clip > 0.0) || !std::isfinite(max_clip)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("max_clip must be finite and > 0, got %g.", max_clip));
  }
  if (!(sampling_prob > 0.0 && sampling_prob <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sampling_prob must lie in (0, 1], got %g.", sampling_prob));
  }
  if (!(rounding >= 0.0 && rounding <= max_clip)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "rounding must be 0 or lie in (0, C=%g], got %g.", max_clip, rounding));
  }
  if (frequency < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("frequency K must be >= 1, got %d.", frequency));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g.", delta));
  }
  if (!grid.IsIntegral()) {
    return absl::InvalidArgumentError(
        "The accountant's order grid must contain integer orders only.");
  }
  if (grid[0] < 2.0) {
    return absl::InvalidArgumentError("Integer orders must be >= 2.");
  }
  return absl::OkStatus();
}

std::optional<int64_t> AccountantConfig::BucketCount() const {
  if (rounding <= 0.0) return std::nullopt;
  return RoundingBucketCount(max_clip, rounding);
}

absl::StatusOr<double> ClipSensitivity(double norm, double max_clip) {
  if (!(norm >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Gradient norm must be >= 0, got %g.", norm));
  }
  if (!(max_clip > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Clipping threshold must be > 0, got %g.", max_clip));
  }
  return std::min(norm, max_clip);
}

absl::StatusOr<double> RoundToBucket(double sensitivity, double rounding,
                                     double max_clip) {
  if (!(rounding > 0.0) || !(rounding <= max_clip)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Rounding precision must lie in (0, C=%g], got %g.", max_clip,
        rounding));
  }
  if (!(sensitivity >= 0.0) || sensitivity > max_clip) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Sensitivity %g lies outside [0, C=%g].", sensitivity, max_clip));
  }
  const int64_t count = RoundingBucketCount(max_clip, rounding);
  int64_t j = static_cast<int64_t>(std::floor(sensitivity / rounding + 0.5));
  j = std::clamp<int64_t>(j, 1, count);
  // When r does not divide C the top bucket is C itself, which can be nearer
  // than (count - 1) * r.
  if (j == count - 1 &&
      max_clip - sensitivity <= sensitivity - static_cast<double>(j) * rounding) {
    j = count;
  }
  return j == count ? max_clip : static_cast<double>(j) * rounding;
}

BucketCache::BucketCache(double sampling_prob, double noise_std, OrderGrid grid)
    : sampling_prob_(sampling_prob),
      noise_std_(noise_std),
      grid_(std::move(grid)) {}

absl::StatusOr<const RdpCurve*> BucketCache::GetOrCompute(double bucket) {
  {
    std::shared_lock lock(mu_);
    auto it = curves_.find(bucket);
    if (it != curves_.end()) return it->second.get();
  }
  auto curve = std::make_unique<RdpCurve>(RdpCurve::Zero(grid_));
  if (bucket > 0.0) {
    absl::StatusOr<RdpCurve> computed =
        SgmRdpCurve({sampling_prob_, noise_std_ / bucket}, grid_);
    if (!computed.ok()) return computed.status();
    *curve = *std::move(computed);
  }
  std::unique_lock lock(mu_);
  auto [it, inserted] = curves_.emplace(bucket, std::move(curve));
  return it->second.get();
}

int64_t BucketCache::computations() const {
  std::shared_lock lock(mu_);
  return static_cast<int64_t>(curves_.size());
}

void BucketCache::CorruptForTesting(double bucket, double factor) {
  std::unique_lock lock(mu_);
  auto it = curves_.find(bucket);
  if (it == curves_.end()) return;
  for (double& v : it->second->values) v *= factor;
}

IndividualLedger::IndividualLedger(const AccountantConfig& config,
                                   int64_t num_examples)
    : config_(config),
      num_examples_(num_examples),
      cache_(std::make_unique<BucketCache>(config.sampling_prob,
                                           config.noise_std, config.grid)),
      current_bucket_(num_examples, 0),
      assigned_since_(num_examples, 0),
      histograms_(num_examples) {}

absl::StatusOr<IndividualLedger> IndividualLedger::Create(
    const AccountantConfig& config, int64_t num_examples) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (num_examples < 1) {
    return absl::InvalidArgumentError("A ledger needs at least one example.");
  }
  return IndividualLedger(config, num_examples);
}

uint32_t IndividualLedger::InternBucket(double value) {
  auto [it, inserted] = bucket_ids_.emplace(
      value, static_cast<uint32_t>(bucket_values_.size()));
  if (inserted) {
    bucket_values_.push_back(value);
    bucket_curves_.push_back(nullptr);
  }
  return it->second;
}

absl::Status IndividualLedger::UpdateAssignments(std::span<const double> norms,
                                                 int64_t step) {
  if (static_cast<int64_t>(norms.size()) != num_examples_) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Expected %d gradient norms, got %d.", num_examples_,
                        norms.size()));
  }
  if (step != total_steps_) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "Assignments updated at step %d but the ledger is at step %d.", step,
        total_steps_));
  }
  if (step % config_.frequency != 0) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "Step %d is not a multiple of the update frequency K=%d.", step,
        config_.frequency));
  }
  std::vector<uint32_t> next(num_examples_);
  for (int64_t i = 0; i < num_examples_; ++i) {
    if (!std::isfinite(norms[i])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("Gradient norm of example %d is not finite.", i));
    }
    absl::StatusOr<double> z = ClipSensitivity(norms[i], config_.max_clip);
    if (!z.ok()) return z.status();
    if (config_.rounding > 0.0) {
      z = RoundToBucket(*z, config_.rounding, config_.max_clip);
      if (!z.ok()) return z.status();
    }
    next[i] = InternBucket(*z);
  }
  for (size_t id = 0; id < bucket_curves_.size(); ++id) {
    if (bucket_curves_[id] != nullptr) continue;
    absl::StatusOr<const RdpCurve*> curve =
        cache_->GetOrCompute(bucket_values_[id]);
    if (!curve.ok()) return curve.status();
    bucket_curves_[id] = *curve;
  }
  for (int64_t i = 0; i < num_examples_; ++i) {
    const int64_t owed = total_steps_ - assigned_since_[i];
    if (initialized_ && owed > 0) {
      auto& hist = histograms_[i];
      auto it = std::find_if(hist.begin(), hist.end(), [&](const auto& e) {
        return e.first == current_bucket_[i];
      });
      if (it == hist.end()) {
        hist.emplace_back(current_bucket_[i], owed);
      } else {
        it->second += owed;
      }
    }
    current_bucket_[i] = next[i];
    assigned_since_[i] = total_steps_;
  }
  initialized_ = true;
  return absl::OkStatus();
}

absl::Status IndividualLedger::RecordStep(int64_t step) {
  if (!initialized_) {
    return absl::FailedPreconditionError(
        "RecordStep called before the first UpdateAssignments.");
  }
  if (step != total_steps_) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "Recording step %d but the ledger is at step %d.", step,
        total_steps_));
  }
  ++total_steps_;
  return absl::OkStatus();
}

absl::Status IndividualLedger::CheckIndex(int64_t example) const {
  if (example < 0 || example >= num_examples_) {
    return absl::OutOfRangeError(absl::StrFormat(
        "Example %d out of range [0, %d).", example, num_examples_));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<std::pair<double, int64_t>>>
IndividualLedger::Histogram(int64_t example) const {
  if (absl::Status s = CheckIndex(example); !s.ok()) return s;
  std::vector<std::pair<double, int64_t>> out;
  bool pending_merged = false;
  const int64_t owed = total_steps_ - assigned_since_[example];
  for (const auto& [id, count] : histograms_[example]) {
    int64_t total = count;
    if (id == current_bucket_[example]) {
      total += owed;
      pending_merged = true;
    }
    out.emplace_back(bucket_values_[id], total);
  }
  if (!pending_merged && initialized_ && owed > 0) {
    out.emplace_back(bucket_values_[current_bucket_[example]], owed);
  }
  return out;
}

absl::StatusOr<double> IndividualLedger::CurrentBucket(int64_t example) const {
  if (absl::Status s = CheckIndex(example); !s.ok()) return s;
  if (!initialized_) {
    return absl::FailedPreconditionError("Ledger has no assignments yet.");
  }
  return bucket_values_[current_bucket_[example]];
}

absl::StatusOr<RdpCurve> IndividualLedger::AccumulatedRdp(
    int64_t example) const {
  if (absl::Status s = CheckIndex(example); !s.ok()) return s;
  RdpCurve out = RdpCurve::Zero(config_.grid);
  const int64_t owed = total_steps_ - assigned_since_[example];
  bool pending_merged = false;
  auto add = [&](uint32_t id, int64_t count) {
    const double c = static_cast<double>(count);
    const std::vector<double>& v = bucket_curves_[id]->values;
    for (size_t a = 0; a < out.values.size(); ++a) out.values[a] += c * v[a];
  };
  for (const auto& [id, count] : histograms_[example]) {
    if (id == current_bucket_[example]) {
      add(id, count + owed);
      pending_merged = true;
    } else {
      add(id, count);
    }
  }
  if (!pending_merged && initialized_ && owed > 0) {
    add(current_bucket_[example], owed);
  }
  return out;
}

absl::StatusOr<EpsilonResult> IndividualLedger::EpsilonOf(int64_t example,
                                                          double delta) const {
  absl::StatusOr<RdpCurve> curve = AccumulatedRdp(example);
  if (!curve.ok()) return curve.status();
  absl::StatusOr<DpConversion> dp = RdpToDp(*curve, delta);
  if (!dp.ok()) return dp.status();
  return EpsilonResult{dp->epsilon, dp->best_order};
}

absl::StatusOr<double> WorstCaseEpsilon(const AccountantConfig& config,
                                        int64_t steps) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (steps < 1) return absl::InvalidArgumentError("steps must be >= 1.");
  absl::StatusOr<RdpCurve> curve = SgmRdpCurve(
      {config.sampling_prob, config.noise_std / config.max_clip}, config.grid);
  if (!curve.ok()) return curve.status();
  absl::StatusOr<DpConversion> dp =
      RdpToDp(Scale(*curve, static_cast<double>(steps)), config.delta);
  if (!dp.ok()) return dp.status();
  return dp->epsilon;
}

std::vector<GroupAggregate> AggregateByGroup(std::span<const double> values,
                                             std::span<const int64_t> labels) {
  std::map<int64_t, std::pair<double, int64_t>> sums;
  for (size_t i = 0; i < values.size() && i < labels.size(); ++i) {
    auto& [sum, count] = sums[labels[i]];
    sum += values[i];
    ++count;
  }
  std::vector<GroupAggregate> out;
  out.reserve(sums.size());
  for (const auto& [label, entry] : sums) {
    out.push_back({label, entry.second,
                   entry.first / static_cast<double>(entry.second)});
  }
  return out;
}

absl::StatusOr<PrivacyReport> MakeReport(
    const IndividualLedger& ledger, double delta,
    std::optional<std::span<const int64_t>> group_labels) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g.", delta));
  }
  const int64_t n = ledger.num_examples();
  if (group_labels.has_value() &&
      static_cast<int64_t>(group_labels->size()) != n) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Got %d group labels for %d examples.", group_labels->size(), n));
  }
  if (ledger.total_steps() < 1) {
    return absl::FailedPreconditionError("Ledger has no recorded steps.");
  }

  PrivacyReport report;
  report.config = ledger.config();
  report.config.delta = delta;
  report.total_steps = ledger.total_steps();
  report.delta = delta;
  absl::StatusOr<double> worst =
      WorstCaseEpsilon(report.config, report.total_steps);
  if (!worst.ok()) return worst.status();
  report.worst_case_epsilon = *worst;
  report.epsilons.assign(n, 0.0);
  report.best_orders.assign(n, 0.0);

  // Each worker writes a disjoint slice, so the result does not depend on the
  // number of threads.
  auto fill = [&](int64_t begin, int64_t end) -> absl::Status {
    for (int64_t i = begin; i < end; ++i) {
      absl::StatusOr<EpsilonResult> eps = ledger.EpsilonOf(i, delta);
      if (!eps.ok()) return eps.status();
      report.epsilons[i] = eps->epsilon;
      report.best_orders[i] = eps->best_order;
    }
    return absl::OkStatus();
  };
  const int64_t threads =
      n < kParallelReportThreshold
          ? 1
          : std::max<int64_t>(1, std::thread::hardware_concurrency());
  if (threads == 1) {
    if (absl::Status s = fill(0, n); !s.ok()) return s;
  } else {
    std::vector<absl::Status> statuses(threads);
    std::vector<std::thread> workers;
    const int64_t chunk = (n + threads - 1) / threads;
    for (int64_t t = 0; t < threads; ++t) {
      const int64_t begin = std::min(n, t * chunk);
      const int64_t end = std::min(n, begin + chunk);
      workers.emplace_back([&, t, begin, end] { statuses[t] = fill(begin, end); });
    }
    for (auto& w : workers) w.join();
    for (const auto& s : statuses) {
      if (!s.ok()) return s;
    }
  }

  for (int64_t i = 0; i < n; ++i) {
    if (report.epsilons[i] > report.worst_case_epsilon + kDominanceSlack) {
      return absl::InternalError(absl::StrFormat(
          "Example %d has epsilon %.17g above the worst case %.17g.", i,
          report.epsilons[i], report.worst_case_epsilon));
    }
  }
  if (group_labels.has_value()) {
    report.group_labels.assign(group_labels->begin(), group_labels->end());
    report.groups = AggregateByGroup(report.epsilons, report.group_labels);
  }
  return report;
}

}  // namespace indiv_privacy
