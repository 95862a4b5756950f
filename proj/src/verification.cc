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


#include "indiv_privacy/verification.h"

#include <chrono>
#include <cmath>

#include "absl/strings/str_format.h"
#include "indiv_privacy/dpsgd_sim.h"
#include "indiv_privacy/enumeration.h"
#include "indiv_privacy/rdp_math.h"

namespace indiv_privacy {
namespace {

double SecondsSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

absl::StatusOr<SuiteResult> RunQuadratureSuite() {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult result;
  result.name = "closed_form_vs_quadrature";
  result.tolerance = 1e-6;
  for (double q : {0.001, 0.01, 0.1, 0.5}) {
    for (double m : {0.5, 1.0, 2.0, 4.0}) {
      for (int64_t alpha = 2; alpha <= 32; ++alpha) {
        const MechanismParams params{q, m};
        absl::StatusOr<double> closed = SgmRdpInt(params, alpha);
        if (!closed.ok()) return closed.status();
        absl::StatusOr<double> numeric = SgmRdpQuadratureOracle(
            params, static_cast<double>(alpha),
            DivergenceDirection::kMixtureVsBase);
        if (!numeric.ok()) return numeric.status();
        const double error = std::abs(*closed - *numeric) / std::abs(*numeric);
        if (error > result.max_error || std::isnan(error)) {
          result.max_error = error;
          result.detail = absl::StrFormat(
              "q=%g sigma'=%g alpha=%d closed=%.17g quadrature=%.17g", q, m,
              alpha, *closed, *numeric);
        }
        ++result.cases;
      }
    }
  }
  result.passed = result.max_error <= result.tolerance;
  result.seconds = SecondsSince(start);
  return result;
}

absl::StatusOr<SuiteResult> RunEnumerationSuite(uint64_t seed, int specs) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult result;
  result.name = "adaptive_vs_fixed_enumeration";
  result.tolerance = 1e-12;
  for (int k = 0; k < specs; ++k) {
    const ToySpec spec = RandomToySpec(seed + k, 3, 8);
    absl::StatusOr<double> diff = EnumerateAdaptiveVsFixed(spec);
    if (!diff.ok()) return diff.status();
    if (*diff > result.max_error) {
      result.max_error = *diff;
      result.detail = absl::StrFormat("spec seed %d", seed + k);
    }
    ++result.cases;
  }
  result.passed = result.max_error <= result.tolerance;
  result.seconds = SecondsSince(start);
  return result;
}

absl::StatusOr<SuiteResult> RunBucketedSuite(
    const BucketedSuiteOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult result;
  result.name = "exact_vs_bucketed_accounting";
  result.tolerance = 1e-12;
  SimConfig config;
  config.data.num_examples = options.num_examples;
  config.data.dim = 5;
  config.data.unit_norm = true;
  config.data.groups = {{0.5, 0, 1.0, 1.0}, {0.5, 1, 1.0, 1.0}};
  config.learning_rate = 0.01;
  config.epochs = options.epochs;
  config.sampling_prob = 0.05;
  config.noise_multiplier = 2.0;
  config.clipping = ClippingMode::kIndividual;
  config.tracked_examples = options.num_examples;
  config.seed = options.seed;
  absl::StatusOr<Dataset> data = GenerateSynthetic(config.data, options.seed);
  if (!data.ok()) return data.status();
  absl::StatusOr<TrainOutput> out = Train(config, *data);
  if (!out.ok()) return out.status();
  IndividualLedger& ledger = *out->ledger;
  if (options.corrupt_cache) {
    absl::StatusOr<double> bucket = ledger.CurrentBucket(0);
    if (!bucket.ok()) return bucket.status();
    ledger.mutable_cache_for_testing().CorruptForTesting(*bucket, 1.5);
  }

  absl::StatusOr<ExactAccounting> exact = ExactReferenceAccounting(
      RealizedSensitivities(out->tracked), ledger.config(), out->total_steps);
  if (!exact.ok()) return exact.status();
  for (size_t k = 0; k < exact->ids.size(); ++k) {
    absl::StatusOr<EpsilonResult> estimate =
        ledger.EpsilonOf(exact->ids[k], ledger.config().delta);
    if (!estimate.ok()) return estimate.status();
    const double error = std::abs(estimate->epsilon - exact->epsilons[k]);
    if (error > result.max_error || std::isnan(error)) {
      result.max_error = error;
      result.detail = absl::StrFormat("example %d ledger=%.17g exact=%.17g",
                                      exact->ids[k], estimate->epsilon,
                                      exact->epsilons[k]);
    }
    ++result.cases;
  }
  result.passed = result.max_error <= result.tolerance;
  result.seconds = SecondsSince(start);
  return result;
}

}  // namespace indiv_privacy
