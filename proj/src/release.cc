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

#include "absl/strings/str_format.h"

namespace indiv_privacy {
namespace {

absl::Status ValidateValues(std::span<const double> values, double bound) {
  if (values.empty()) return absl::InvalidArgumentError("No values to release.");
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Value bound must be finite and > 0, got %g.", bound));
  }
  for (double v : values) {
    if (std::isnan(v)) return absl::InvalidArgumentError("NaN value.");
  }
  return absl::OkStatus();
}

double Clamp(double v, double bound) { return std::clamp(v, 0.0, bound); }

}  // namespace

bool PrivacyBudget::unlimited() const { return std::isinf(epsilon); }

const OrderGrid& ReleaseOrderGrid() {
  static const OrderGrid* grid = [] {
    std::vector<double> orders = OrderGrid::Default().orders();
    for (double a : {512.0, 1024.0, 2048.0, 4096.0}) orders.push_back(a);
    return new OrderGrid(*OrderGrid::Create(std::move(orders)));
  }();
  return *grid;
}

absl::StatusOr<double> GaussianMultiplier(const PrivacyBudget& budget,
                                          int64_t queries) {
  if (budget.unlimited() && budget.epsilon > 0) return 0.0;
  if (!(budget.delta > 0.0 && budget.delta < 1.0)) {
    return absl::InvalidArgumentError("Release delta must lie in (0, 1).");
  }
  return CalibrateNoise(budget.epsilon, budget.delta, 1.0, queries,
                        ReleaseOrderGrid());
}

absl::StatusOr<MeanRelease> DpMeanWithMultiplier(std::span<const double> values,
                                                 double bound, double multiplier,
                                                 std::mt19937_64& rng) {
  if (absl::Status s = ValidateValues(values, bound); !s.ok()) return s;
  if (!(multiplier >= 0.0)) {
    return absl::InvalidArgumentError("Noise multiplier must be >= 0.");
  }
  double sum = 0.0;
  for (double v : values) sum += Clamp(v, bound);
  const double n = static_cast<double>(values.size());
  MeanRelease out;
  out.clamped_mean = sum / n;
  out.noise_std = multiplier * bound / n;
  out.value = out.clamped_mean;
  if (out.noise_std > 0.0) {
    out.value += std::normal_distribution<double>(0.0, out.noise_std)(rng);
  }
  return out;
}

absl::StatusOr<MeanRelease> DpMean(std::span<const double> values, double bound,
                                   const PrivacyBudget& budget,
                                   std::mt19937_64& rng) {
  absl::StatusOr<double> multiplier = GaussianMultiplier(budget, 1);
  if (!multiplier.ok()) return multiplier.status();
  return DpMeanWithMultiplier(values, bound, *multiplier, rng);
}

absl::StatusOr<QuantileRelease> DpQuantileWithMultiplier(
    std::span<const double> values, double target, double bound,
    double multiplier, const QuantileOptions& options, std::mt19937_64& rng) {
  if (absl::Status s = ValidateValues(values, bound); !s.ok()) return s;
  if (!(target > 0.0 && target < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Quantile target must lie in (0, 1), got %g.", target));
  }
  if (options.steps < 1 || !(options.step_size > 0.0) ||
      !(options.floor_fraction > 0.0 && options.floor_fraction < 0.5)) {
    return absl::InvalidArgumentError("Invalid quantile options.");
  }
  const double n = static_cast<double>(values.size());
  if (multiplier > n / 4.0) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "Count noise std %g exceeds n/4 = %g; the budget is too small for "
        "n = %d.",
        multiplier, n / 4.0, values.size()));
  }
  std::vector<double> sorted(values.begin(), values.end());
  for (double& v : sorted) v = Clamp(v, bound);
  std::sort(sorted.begin(), sorted.end());

  std::normal_distribution<double> noise(0.0, 1.0);
  const double floor = options.floor_fraction * bound;
  double q = bound / 2.0;
  for (int64_t k = 0; k < options.steps; ++k) {
    const double count = static_cast<double>(
        std::upper_bound(sorted.begin(), sorted.end(), q) - sorted.begin());
    const double noisy = multiplier > 0.0 ? count + multiplier * noise(rng) : count;
    const double eta = 2.0 * options.step_size *
                       (1.0 - static_cast<double>(k) / options.steps);
    q = std::clamp(q * std::exp(-eta * (noisy / n - target)), floor, bound);
  }
  return QuantileRelease{target, q, multiplier};
}

absl::StatusOr<QuantileRelease> DpQuantile(std::span<const double> values,
                                           double target, double bound,
                                           const PrivacyBudget& budget,
                                           const QuantileOptions& options,
                                           std::mt19937_64& rng) {
  absl::StatusOr<double> multiplier = GaussianMultiplier(budget, options.steps);
  if (!multiplier.ok()) return multiplier.status();
  return DpQuantileWithMultiplier(values, target, bound, *multiplier, options,
                                  rng);
}

absl::Status ReleaseConfig::Validate() const {
  if (!zero_noise) {
    if (!(budget.epsilon > 0.0) || !std::isfinite(budget.epsilon)) {
      return absl::InvalidArgumentError(
          "Release epsilon must be finite and > 0 unless zero_noise is set.");
    }
    if (!(budget.delta > 0.0 && budget.delta < 1.0)) {
      return absl::InvalidArgumentError("Release delta must lie in (0, 1).");
    }
  }
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    return absl::InvalidArgumentError("Release bound B must be finite and > 0.");
  }
  for (double t : targets) {
    if (!(t > 0.0 && t < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("Quantile target %g is outside (0, 1).", t));
    }
  }
  if (quantile.steps < 1) {
    return absl::InvalidArgumentError("Quantile steps must be >= 1.");
  }
  return absl::OkStatus();
}

absl::StatusOr<ReleasedStats> ReleaseAll(std::span<const double> values,
                                         const ReleaseConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (absl::Status s = ValidateValues(values, config.bound); !s.ok()) return s;

  ReleasedStats out;
  const int64_t releases = 1 + static_cast<int64_t>(config.targets.size());
  out.num_queries = 1 + config.quantile.steps *
                            static_cast<int64_t>(config.targets.size());
  if (!config.zero_noise) {
    // One unit-sensitivity Gaussian query at this multiplier spends the whole
    // budget; each release gets 1/releases of its RDP curve.
    absl::StatusOr<double> whole = GaussianMultiplier(config.budget, 1);
    if (!whole.ok()) return whole.status();
    out.mean_multiplier = *whole * std::sqrt(static_cast<double>(releases));
    out.quantile_multiplier =
        *whole * std::sqrt(static_cast<double>(releases * config.quantile.steps));
  }

  std::mt19937_64 rng(config.seed);
  absl::StatusOr<MeanRelease> mean =
      DpMeanWithMultiplier(values, config.bound, out.mean_multiplier, rng);
  if (!mean.ok()) return mean.status();
  out.mean = *mean;
  for (double target : config.targets) {
    absl::StatusOr<QuantileRelease> q =
        DpQuantileWithMultiplier(values, target, config.bound,
                                 out.quantile_multiplier, config.quantile, rng);
    if (!q.ok()) return q.status();
    out.quantiles.push_back(*q);
  }
  std::vector<size_t> order(out.quantiles.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return config.targets[a] < config.targets[b];
  });
  std::vector<double> sorted_values;
  for (size_t i : order) sorted_values.push_back(out.quantiles[i].value);
  std::sort(sorted_values.begin(), sorted_values.end());
  for (size_t k = 0; k < order.size(); ++k) {
    out.quantiles[order[k]].value = sorted_values[k];
  }

  if (config.zero_noise) {
    out.realized_epsilon = std::numeric_limits<double>::infinity();
    out.realized_delta = 0.0;
    return out;
  }
  absl::StatusOr<RdpCurve> mean_curve =
      GaussianRdpCurve(out.mean_multiplier, ReleaseOrderGrid());
  if (!mean_curve.ok()) return mean_curve.status();
  absl::StatusOr<RdpCurve> count_curve =
      GaussianRdpCurve(out.quantile_multiplier, ReleaseOrderGrid());
  if (!count_curve.ok()) return count_curve.status();
  absl::StatusOr<RdpCurve> total = Compose(
      *mean_curve,
      Scale(*count_curve, static_cast<double>(out.num_queries - 1)));
  if (!total.ok()) return total.status();
  absl::StatusOr<DpConversion> dp = RdpToDp(*total, config.budget.delta);
  if (!dp.ok()) return dp.status();
  out.realized_epsilon = dp->epsilon;
  out.realized_delta = config.budget.delta;
  if (out.realized_epsilon > config.budget.epsilon) {
    return absl::InternalError(absl::StrFormat(
        "Realized release epsilon %.17g exceeds the budget %.17g.",
        out.realized_epsilon, config.budget.epsilon));
  }
  return out;
}

}  // namespace indiv_privacy
