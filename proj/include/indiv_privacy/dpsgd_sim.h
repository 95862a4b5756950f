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

// A small, deterministic DP-SGD trainer over synthetic Gaussian blobs with
// analytic per-example gradients. It drives an IndividualLedger exactly the
// way a real trainer would: refresh full-batch gradient norms every K steps,
// charge every example each step, then take a Poisson-sampled, clipped,
// noised step.

#ifndef INDIV_PRIVACY_DPSGD_SIM_H_
#define INDIV_PRIVACY_DPSGD_SIM_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "indiv_privacy/accountant.h"

namespace indiv_privacy {

// One Gaussian blob. Its center sits at +-separation/2 along the first axis
// (sign from the label); `spread` is the per-coordinate std.
struct GroupSpec {
  double proportion = 1.0;
  int label = 0;
  double separation = 2.0;
  double spread = 1.0;
  // Reported group; negative means this spec's index.
  int64_t group_id = -1;
};

struct SyntheticSpec {
  int64_t num_examples = 1000;
  int64_t dim = 5;
  std::vector<GroupSpec> groups;
  // Rescales every feature vector to unit L2 norm.
  bool unit_norm = false;
};

struct Dataset {
  int64_t num_examples = 0;
  int64_t dim = 0;
  std::vector<double> features;  // row-major, num_examples x dim
  std::vector<int> labels;       // 0 or 1
  std::vector<int64_t> groups;

  std::span<const double> row(int64_t i) const {
    return {features.data() + i * dim, static_cast<size_t>(dim)};
  }
};

absl::StatusOr<Dataset> GenerateSynthetic(const SyntheticSpec& spec,
                                          uint64_t seed);

enum class ModelKind { kLogistic, kMlp };
enum class ClippingMode { kMax, kIndividual };

struct ModelSpec {
  ModelKind kind = ModelKind::kLogistic;
  int64_t dim = 0;
  int64_t hidden = 16;  // MLP only
};

int64_t ParameterCount(const ModelSpec& spec);

// Logistic: zeros. MLP: N(0, 1/fan_in) weights, zero biases.
std::vector<double> InitialParameters(const ModelSpec& spec, uint64_t seed);

double ExampleLogit(const ModelSpec& spec, std::span<const double> params,
                    std::span<const double> x);

// Binary cross-entropy with logits.
double ExampleLoss(const ModelSpec& spec, std::span<const double> params,
                   std::span<const double> x, int label);

// d loss / d params for one example, written into `grad`.
void ExampleGradient(const ModelSpec& spec, std::span<const double> params,
                     std::span<const double> x, int label,
                     std::span<double> grad);

absl::StatusOr<std::vector<std::vector<double>>> PerExampleGradients(
    const ModelSpec& spec, std::span<const double> params,
    const Dataset& dataset, std::span<const int64_t> indices);

std::vector<double> GradientNorms(const ModelSpec& spec,
                                  std::span<const double> params,
                                  const Dataset& dataset);

// g * min(1, threshold / ||g||).
std::vector<double> Clip(std::span<const double> g, double threshold);

// Each index in [0, n) independently with probability p, ascending.
std::vector<int64_t> PoissonSample(int64_t n, double p, std::mt19937_64& rng);

struct SimConfig {
  SyntheticSpec data;
  ModelKind model = ModelKind::kLogistic;
  int64_t hidden = 16;
  double learning_rate = 0.05;
  // Unset means the median gradient norm at initialization.
  std::optional<double> max_clip;
  // Noise is resolved in this order: target_epsilon, noise_multiplier (times
  // C), noise_std.
  double noise_std = 0.0;
  std::optional<double> noise_multiplier;
  std::optional<double> target_epsilon;
  double sampling_prob = 0.05;
  int64_t epochs = 10;
  int64_t norm_updates_per_epoch = 1;  // gamma
  // Absolute rounding overrides the fraction of C; a zero fraction disables
  // rounding.
  std::optional<double> rounding;
  double rounding_fraction = 0.01;
  ClippingMode clipping = ClippingMode::kMax;
  double delta = kDefaultDelta;
  // Examples whose norms are recorded at every step for exact accounting.
  int64_t tracked_examples = 0;
  uint64_t seed = 0;

  absl::Status Validate() const;
  int64_t StepsPerEpoch() const;
};

struct NormTraceRecord {
  int64_t step = 0;
  int64_t example = 0;
  double norm = 0.0;
};

// Per-step record for a tracked example: its true gradient norm and the
// clipping threshold its contribution was held to at that step.
struct TrackedRecord {
  int64_t step = 0;
  int64_t example = 0;
  double norm = 0.0;
  double clip_bound = 0.0;
};

struct TrainOutput {
  std::vector<double> parameters;
  std::vector<double> initial_losses;
  std::vector<double> final_losses;
  std::vector<int> final_correct;  // 1 when the final model is right
  double max_clip = 0.0;
  double noise_std = 0.0;
  double rounding = 0.0;
  int64_t steps_per_epoch = 0;
  int64_t frequency = 1;
  int64_t total_steps = 0;
  // Full-batch norms at every update step, sorted by (step, example).
  std::vector<NormTraceRecord> trace;
  std::vector<int64_t> tracked_ids;
  std::vector<TrackedRecord> tracked;
  // Absent when accounting is impossible (sigma = 0 or C = infinity).
  std::optional<IndividualLedger> ledger;

  // Accountant configuration matching this run.
  AccountantConfig AccountingConfig(double delta) const;
};

absl::StatusOr<TrainOutput> Train(const SimConfig& config,
                                  const Dataset& dataset);

struct ExactAccounting {
  std::vector<int64_t> ids;
  std::vector<double> epsilons;
};

// Ground-truth accounting: K = 1, no rounding, one freshly computed curve per
// step and example, composed step by step. `records` must hold a norm for
// every tracked example at every step in [0, total_steps).
absl::StatusOr<ExactAccounting> ExactReferenceAccounting(
    std::span<const NormTraceRecord> records, const AccountantConfig& config,
    int64_t total_steps);

// The records above with norm replaced by the realized clipping bound.
std::vector<NormTraceRecord> RealizedSensitivities(
    std::span<const TrackedRecord> tracked);
std::vector<NormTraceRecord> TrackedNorms(
    std::span<const TrackedRecord> tracked);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_DPSGD_SIM_H_
