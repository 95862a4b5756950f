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

#include "indiv_privacy/dpsgd_sim.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "absl/strings/str_format.h"

namespace indiv_privacy {
namespace {

// Decorrelates the training stream from the data and init streams.
constexpr uint64_t kTrainStreamSalt = 0x9e3779b97f4a7c15ULL;
constexpr uint64_t kInitStreamSalt = 0xbf58476d1ce4e5b9ULL;

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z)
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double Median(std::vector<double> v) {
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

// MLP parameter layout: W1 (hidden x dim), b1 (hidden), w2 (hidden), b2.
struct MlpView {
  int64_t dim;
  int64_t hidden;
  size_t w1() const { return 0; }
  size_t b1() const { return hidden * dim; }
  size_t w2() const { return hidden * dim + hidden; }
  size_t b2() const { return hidden * dim + 2 * hidden; }
};

}  // namespace

absl::StatusOr<Dataset> GenerateSynthetic(const SyntheticSpec& spec,
                                          uint64_t seed) {
  if (spec.num_examples < 1 || spec.dim < 1) {
    return absl::InvalidArgumentError(
        "Synthetic data needs at least one example and one feature.");
  }
  if (spec.groups.empty()) {
    return absl::InvalidArgumentError("Synthetic data needs at least one group.");
  }
  double total = 0.0;
  for (const GroupSpec& g : spec.groups) {
    if (!(g.proportion > 0.0) || !std::isfinite(g.proportion)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("Group proportion must be > 0, got %g.", g.proportion));
    }
    if (g.label != 0 && g.label != 1) {
      return absl::InvalidArgumentError("Group labels must be 0 or 1.");
    }
    if (!(g.spread >= 0.0) || !std::isfinite(g.separation)) {
      return absl::InvalidArgumentError("Invalid group separation or spread.");
    }
    total += g.proportion;
  }

  // Largest-remainder apportionment of n across groups.
  const size_t num_groups = spec.groups.size();
  std::vector<int64_t> sizes(num_groups);
  std::vector<std::pair<double, size_t>> remainders;
  int64_t assigned = 0;
  for (size_t g = 0; g < num_groups; ++g) {
    const double exact =
        spec.groups[g].proportion / total * static_cast<double>(spec.num_examples);
    sizes[g] = static_cast<int64_t>(std::floor(exact));
    assigned += sizes[g];
    remainders.emplace_back(exact - std::floor(exact), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t k = 0; assigned < spec.num_examples; ++k, ++assigned) {
    ++sizes[remainders[k % num_groups].second];
  }
  for (size_t g = 0; g < num_groups; ++g) {
    if (sizes[g] == 0) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Group %d is empty at n=%d; raise n or its proportion.", g,
          spec.num_examples));
    }
  }

  Dataset data;
  data.num_examples = spec.num_examples;
  data.dim = spec.dim;
  data.features.reserve(spec.num_examples * spec.dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (size_t g = 0; g < num_groups; ++g) {
    const GroupSpec& group = spec.groups[g];
    const double center = (2.0 * group.label - 1.0) * group.separation / 2.0;
    for (int64_t i = 0; i < sizes[g]; ++i) {
      for (int64_t j = 0; j < spec.dim; ++j) {
        const double mean = j == 0 ? center : 0.0;
        data.features.push_back(mean + group.spread * normal(rng));
      }
      if (spec.unit_norm) {
        std::span<double> x(data.features.data() + data.features.size() - spec.dim,
                            spec.dim);
        const double norm = Norm(x);
        if (norm > 0.0) {
          for (double& v : x) v /= norm;
        }
      }
      data.labels.push_back(group.label);
      data.groups.push_back(group.group_id >= 0 ? group.group_id
                                                : static_cast<int64_t>(g));
    }
  }
  return data;
}

int64_t ParameterCount(const ModelSpec& spec) {
  if (spec.kind == ModelKind::kLogistic) return spec.dim + 1;
  return spec.hidden * spec.dim + 2 * spec.hidden + 1;
}

std::vector<double> InitialParameters(const ModelSpec& spec, uint64_t seed) {
  std::vector<double> params(ParameterCount(spec), 0.0);
  if (spec.kind == ModelKind::kLogistic) return params;
  std::mt19937_64 rng(seed ^ kInitStreamSalt);
  std::normal_distribution<double> normal(0.0, 1.0);
  const MlpView m{spec.dim, spec.hidden};
  const double s1 = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(spec.hidden));
  for (int64_t k = 0; k < spec.hidden * spec.dim; ++k) {
    params[m.w1() + k] = s1 * normal(rng);
  }
  for (int64_t k = 0; k < spec.hidden; ++k) params[m.w2() + k] = s2 * normal(rng);
  return params;
}

double ExampleLogit(const ModelSpec& spec, std::span<const double> params,
                    std::span<const double> x) {
  if (spec.kind == ModelKind::kLogistic) {
    double z = params[spec.dim];
    for (int64_t j = 0; j < spec.dim; ++j) z += params[j] * x[j];
    return z;
  }
  const MlpView m{spec.dim, spec.hidden};
  double z = params[m.b2()];
  for (int64_t k = 0; k < spec.hidden; ++k) {
    double pre = params[m.b1() + k];
    for (int64_t j = 0; j < spec.dim; ++j) {
      pre += params[m.w1() + k * spec.dim + j] * x[j];
    }
    z += params[m.w2() + k] * std::tanh(pre);
  }
  return z;
}

double ExampleLoss(const ModelSpec& spec, std::span<const double> params,
                   std::span<const double> x, int label) {
  const double z = ExampleLogit(spec, params, x);
  return Softplus(z) - label * z;
}

void ExampleGradient(const ModelSpec& spec, std::span<const double> params,
                     std::span<const double> x, int label,
                     std::span<double> grad) {
  if (spec.kind == ModelKind::kLogistic) {
    const double r = Sigmoid(ExampleLogit(spec, params, x)) - label;
    for (int64_t j = 0; j < spec.dim; ++j) grad[j] = r * x[j];
    grad[spec.dim] = r;
    return;
  }
  const MlpView m{spec.dim, spec.hidden};
  std::vector<double> act(spec.hidden);
  double z = params[m.b2()];
  for (int64_t k = 0; k < spec.hidden; ++k) {
    double pre = params[m.b1() + k];
    for (int64_t j = 0; j < spec.dim; ++j) {
      pre += params[m.w1() + k * spec.dim + j] * x[j];
    }
    act[k] = std::tanh(pre);
    z += params[m.w2() + k] * act[k];
  }
  const double r = Sigmoid(z) - label;
  grad[m.b2()] = r;
  for (int64_t k = 0; k < spec.hidden; ++k) {
    grad[m.w2() + k] = r * act[k];
    const double back = r * params[m.w2() + k] * (1.0 - act[k] * act[k]);
    grad[m.b1() + k] = back;
    for (int64_t j = 0; j < spec.dim; ++j) {
      grad[m.w1() + k * spec.dim + j] = back * x[j];
    }
  }
}

absl::StatusOr<std::vector<std::vector<double>>> PerExampleGradients(
    const ModelSpec& spec, std::span<const double> params,
    const Dataset& dataset, std::span<const int64_t> indices) {
  if (static_cast<int64_t>(params.size()) != ParameterCount(spec) ||
      spec.dim != dataset.dim) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Model expects dim %d and %d parameters; got dim %d and %d.", spec.dim,
        ParameterCount(spec), dataset.dim, params.size()));
  }
  std::vector<std::vector<double>> out;
  out.reserve(indices.size());
  for (int64_t i : indices) {
    if (i < 0 || i >= dataset.num_examples) {
      return absl::OutOfRangeError(absl::StrFormat("Example %d out of range.", i));
    }
    std::vector<double> g(params.size());
    ExampleGradient(spec, params, dataset.row(i), dataset.labels[i], g);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<double> GradientNorms(const ModelSpec& spec,
                                  std::span<const double> params,
                                  const Dataset& dataset) {
  std::vector<double> norms(dataset.num_examples);
  std::vector<double> g(params.size());
  for (int64_t i = 0; i < dataset.num_examples; ++i) {
    ExampleGradient(spec, params, dataset.row(i), dataset.labels[i], g);
    norms[i] = Norm(g);
  }
  return norms;
}

std::vector<double> Clip(std::span<const double> g, double threshold) {
  std::vector<double> out(g.begin(), g.end());
  const double norm = Norm(g);
  if (norm > threshold) {
    const double scale = threshold / norm;
    for (double& v : out) v *= scale;
  }
  return out;
}

std::vector<int64_t> PoissonSample(int64_t n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<int64_t> out;
  for (int64_t i = 0; i < n; ++i) {
    if (uniform(rng) < p) out.push_back(i);
  }
  return out;
}

absl::Status SimConfig::Validate() const {
  if (!(sampling_prob > 0.0 && sampling_prob <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sampling_prob must lie in (0, 1], got %g.", sampling_prob));
  }
  if (!(learning_rate > 0.0)) {
    return absl::InvalidArgumentError("learning_rate must be > 0.");
  }
  if (epochs < 1) return absl::InvalidArgumentError("epochs must be >= 1.");
  if (norm_updates_per_epoch < 1) {
    return absl::InvalidArgumentError("norm_updates_per_epoch must be >= 1.");
  }
  if (max_clip.has_value() && !(*max_clip > 0.0)) {
    return absl::InvalidArgumentError("max_clip must be > 0.");
  }
  if (!(noise_std >= 0.0)) {
    return absl::InvalidArgumentError("noise_std must be >= 0.");
  }
  if (noise_multiplier.has_value() && !(*noise_multiplier >= 0.0)) {
    return absl::InvalidArgumentError("noise_multiplier must be >= 0.");
  }
  if (rounding.has_value() && !(*rounding >= 0.0)) {
    return absl::InvalidArgumentError("rounding must be >= 0.");
  }
  if (!(rounding_fraction >= 0.0 && rounding_fraction <= 1.0)) {
    return absl::InvalidArgumentError("rounding_fraction must lie in [0, 1].");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1).");
  }
  if (model == ModelKind::kMlp && hidden < 1) {
    return absl::InvalidArgumentError("MLP hidden width must be >= 1.");
  }
  if (tracked_examples < 0 || tracked_examples > data.num_examples) {
    return absl::InvalidArgumentError(
        "tracked_examples must lie in [0, num_examples].");
  }
  return absl::OkStatus();
}

int64_t SimConfig::StepsPerEpoch() const {
  return std::max<int64_t>(1, std::llround(1.0 / sampling_prob));
}

AccountantConfig TrainOutput::AccountingConfig(double delta) const {
  AccountantConfig config;
  config.noise_std = noise_std;
  config.max_clip = max_clip;
  config.rounding = rounding;
  config.frequency = frequency;
  config.delta = delta;
  if (ledger.has_value()) config.sampling_prob = ledger->config().sampling_prob;
  return config;
}

absl::StatusOr<TrainOutput> Train(const SimConfig& config,
                                  const Dataset& dataset) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (dataset.num_examples < 1 || dataset.dim < 1) {
    return absl::InvalidArgumentError("Empty dataset.");
  }
  const int64_t n = dataset.num_examples;
  const ModelSpec spec{config.model, dataset.dim, config.hidden};

  TrainOutput out;
  out.parameters = InitialParameters(spec, config.seed);
  out.steps_per_epoch = config.StepsPerEpoch();
  out.frequency = std::max<int64_t>(
      1, out.steps_per_epoch / config.norm_updates_per_epoch);
  out.total_steps = config.epochs * out.steps_per_epoch;

  std::vector<double> norms = GradientNorms(spec, out.parameters, dataset);
  out.max_clip = config.max_clip.has_value() ? *config.max_clip : Median(norms);
  if (!(out.max_clip > 0.0)) {
    return absl::FailedPreconditionError(
        "Median initial gradient norm is 0; set max_clip explicitly.");
  }
  const bool finite_clip = std::isfinite(out.max_clip);
  if (config.target_epsilon.has_value()) {
    if (!finite_clip) {
      return absl::InvalidArgumentError(
          "target_epsilon needs a finite clipping threshold.");
    }
    absl::StatusOr<double> multiplier =
        CalibrateNoise(*config.target_epsilon, config.delta,
                       config.sampling_prob, out.total_steps,
                       OrderGrid::Default());
    if (!multiplier.ok()) return multiplier.status();
    out.noise_std = *multiplier * out.max_clip;
  } else if (config.noise_multiplier.has_value()) {
    out.noise_std = finite_clip ? *config.noise_multiplier * out.max_clip : 0.0;
  } else {
    out.noise_std = config.noise_std;
  }
  if (finite_clip) {
    out.rounding = config.rounding.has_value()
                       ? *config.rounding
                       : config.rounding_fraction * out.max_clip;
  }

  if (finite_clip && out.noise_std > 0.0) {
    AccountantConfig acct;
    acct.noise_std = out.noise_std;
    acct.max_clip = out.max_clip;
    acct.sampling_prob = config.sampling_prob;
    acct.rounding = out.rounding;
    acct.frequency = out.frequency;
    acct.delta = config.delta;
    absl::StatusOr<IndividualLedger> ledger = IndividualLedger::Create(acct, n);
    if (!ledger.ok()) return ledger.status();
    out.ledger.emplace(*std::move(ledger));
  } else if (config.clipping == ClippingMode::kIndividual) {
    return absl::InvalidArgumentError(
        "Individual clipping needs an active ledger (noise > 0, finite C).");
  }

  std::mt19937_64 rng(config.seed ^ kTrainStreamSalt);
  if (config.tracked_examples > 0) {
    std::vector<int64_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::sample(all.begin(), all.end(), std::back_inserter(out.tracked_ids),
                config.tracked_examples, rng);
  }
  for (int64_t i = 0; i < n; ++i) {
    out.initial_losses.push_back(ExampleLoss(spec, out.parameters,
                                             dataset.row(i), dataset.labels[i]));
  }

  const int64_t num_params = ParameterCount(spec);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> update(num_params);
  std::vector<double> g(num_params);
  for (int64_t t = 0; t < out.total_steps; ++t) {
    const bool refresh = t % out.frequency == 0;
    if (refresh) {
      if (t > 0) norms = GradientNorms(spec, out.parameters, dataset);
      for (int64_t i = 0; i < n; ++i) out.trace.push_back({t, i, norms[i]});
      if (out.ledger.has_value()) {
        if (absl::Status s = out.ledger->UpdateAssignments(norms, t); !s.ok()) {
          return s;
        }
      }
    }
    for (int64_t i : out.tracked_ids) {
      double norm;
      if (refresh) {
        norm = norms[i];
      } else {
        ExampleGradient(spec, out.parameters, dataset.row(i), dataset.labels[i],
                        g);
        norm = Norm(g);
      }
      double bound = out.max_clip;
      if (config.clipping == ClippingMode::kIndividual) {
        bound = *out.ledger->CurrentBucket(i);
      }
      out.tracked.push_back({t, i, norm, bound});
    }
    if (out.ledger.has_value()) {
      if (absl::Status s = out.ledger->RecordStep(t); !s.ok()) return s;
    }

    std::fill(update.begin(), update.end(), 0.0);
    for (int64_t i : PoissonSample(n, config.sampling_prob, rng)) {
      ExampleGradient(spec, out.parameters, dataset.row(i), dataset.labels[i],
                      g);
      const double threshold = config.clipping == ClippingMode::kIndividual
                                   ? *out.ledger->CurrentBucket(i)
                                   : out.max_clip;
      const double norm = Norm(g);
      const double scale = norm > threshold ? threshold / norm : 1.0;
      for (int64_t k = 0; k < num_params; ++k) update[k] += scale * g[k];
    }
    for (int64_t k = 0; k < num_params; ++k) {
      const double noise = out.noise_std * normal(rng);
      out.parameters[k] -= config.learning_rate * (update[k] + noise);
      if (!std::isfinite(out.parameters[k])) {
        return absl::InternalError(absl::StrFormat(
            "Parameters became non-finite at step %d.", t));
      }
    }
  }

  for (int64_t i = 0; i < n; ++i) {
    const double z = ExampleLogit(spec, out.parameters, dataset.row(i));
    out.final_losses.push_back(Softplus(z) - dataset.labels[i] * z);
    out.final_correct.push_back((z > 0.0) == (dataset.labels[i] == 1));
  }
  return out;
}

absl::StatusOr<ExactAccounting> ExactReferenceAccounting(
    std::span<const NormTraceRecord> records, const AccountantConfig& config,
    int64_t total_steps) {
  AccountantConfig exact = config;
  exact.rounding = 0.0;
  exact.frequency = 1;
  if (absl::Status s = exact.Validate(); !s.ok()) return s;
  if (total_steps < 1) return absl::InvalidArgumentError("total_steps < 1.");

  // Each step's curve is computed from that step's own norm. Curves of equal
  // sensitivities are equal, so they are memoized within the call.
  BucketCache curves(exact.sampling_prob, exact.noise_std, exact.grid);
  std::map<int64_t, std::pair<RdpCurve, int64_t>> accumulated;
  for (const NormTraceRecord& r : records) {
    if (r.step == 0) {
      accumulated.try_emplace(r.example, RdpCurve::Zero(exact.grid), 0);
    }
    auto it = accumulated.find(r.example);
    if (it == accumulated.end()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Example %d has no record at step 0.", r.example));
    }
    auto& [curve, next_step] = it->second;
    if (r.step != next_step) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Example %d is missing step %d (next record is step %d).", r.example,
          next_step, r.step));
    }
    absl::StatusOr<double> z = ClipSensitivity(r.norm, exact.max_clip);
    if (!z.ok()) return z.status();
    absl::StatusOr<const RdpCurve*> step_curve = curves.GetOrCompute(*z);
    if (!step_curve.ok()) return step_curve.status();
    absl::StatusOr<RdpCurve> composed = Compose(curve, **step_curve);
    if (!composed.ok()) return composed.status();
    curve = *std::move(composed);
    ++next_step;
  }
  if (accumulated.empty()) {
    return absl::InvalidArgumentError("No tracked examples in the records.");
  }

  ExactAccounting out;
  for (const auto& [id, entry] : accumulated) {
    if (entry.second != total_steps) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Example %d has %d of %d steps.", id, entry.second, total_steps));
    }
    absl::StatusOr<DpConversion> dp = RdpToDp(entry.first, exact.delta);
    if (!dp.ok()) return dp.status();
    out.ids.push_back(id);
    out.epsilons.push_back(dp->epsilon);
  }
  return out;
}

std::vector<NormTraceRecord> RealizedSensitivities(
    std::span<const TrackedRecord> tracked) {
  std::vector<NormTraceRecord> out;
  out.reserve(tracked.size());
  for (const TrackedRecord& r : tracked) {
    out.push_back({r.step, r.example, r.clip_bound});
  }
  return out;
}

std::vector<NormTraceRecord> TrackedNorms(
    std::span<const TrackedRecord> tracked) {
  std::vector<NormTraceRecord> out;
  out.reserve(tracked.size());
  for (const TrackedRecord& r : tracked) out.push_back({r.step, r.example, r.norm});
  return out;
}

}  // namespace indiv_privacy
