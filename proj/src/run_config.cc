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

#include "indiv_privacy/run_config.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/string_view.h"
#include "indiv_privacy/io_util.h"
#include "json.hpp"

namespace indiv_privacy {
namespace {

using nlohmann::json;

int64_t LineOf(absl::string_view text, size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + std::count(text.begin(), text.begin() + offset, '\n');
}

// Walks the parsed document while mapping keys back to source lines. A key's
// line is the first occurrence of "key" after the line of its parent.
class Reader {
 public:
  Reader(absl::string_view text, absl::string_view source)
      : text_(text), source_(source) {}

  size_t Locate(size_t from, absl::string_view key) const {
    const std::string quoted = absl::StrCat("\"", key, "\"");
    const size_t at = text_.find(quoted, from);
    return at == absl::string_view::npos ? from : at;
  }

  absl::Status Error(size_t offset, absl::string_view message) const {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s:%d: %s", source_, LineOf(text_, offset), message));
  }

  absl::Status CheckKeys(const json& object, size_t offset,
                         absl::string_view where,
                         std::initializer_list<absl::string_view> allowed) const {
    if (!object.is_object()) {
      return Error(offset, absl::StrFormat("\"%s\" must be an object", where));
    }
    for (const auto& [key, value] : object.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        return Error(Locate(offset, key),
                     absl::StrFormat("unknown key \"%s\" in %s", key, where));
      }
    }
    return absl::OkStatus();
  }

  template <typename T>
  absl::Status Get(const json& object, size_t offset, absl::string_view key,
                   T& out) const {
    auto it = object.find(std::string(key));
    if (it == object.end()) return absl::OkStatus();
    const size_t at = Locate(offset, key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) return Error(at, absl::StrCat(key, " must be a boolean"));
      out = it->template get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) {
        return Error(at, absl::StrCat(key, " must be an integer"));
      }
      if (std::is_unsigned_v<T> && it->is_number_integer() &&
          !it->is_number_unsigned()) {
        return Error(at, absl::StrCat(key, " must be non-negative"));
      }
      out = it->template get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) return Error(at, absl::StrCat(key, " must be a number"));
      out = it->template get<double>();
    } else {
      if (!it->is_string()) return Error(at, absl::StrCat(key, " must be a string"));
      out = it->template get<std::string>();
    }
    return absl::OkStatus();
  }

  template <typename T>
  absl::Status GetOptional(const json& object, size_t offset,
                           absl::string_view key, std::optional<T>& out) const {
    auto it = object.find(std::string(key));
    if (it == object.end()) return absl::OkStatus();
    if (it->is_null()) {
      out.reset();
      return absl::OkStatus();
    }
    T value{};
    if (absl::Status s = Get(object, offset, key, value); !s.ok()) return s;
    out = value;
    return absl::OkStatus();
  }

 private:
  absl::string_view text_;
  absl::string_view source_;
};

#define RETURN_IF_ERROR(expr)                  \
  do {                                         \
    if (absl::Status _s = (expr); !_s.ok()) {  \
      return _s;                               \
    }                                          \
  } while (0)

absl::Status ReadData(const Reader& r, const json& j, size_t at,
                      SyntheticSpec& data) {
  RETURN_IF_ERROR(r.CheckKeys(j, at, "data",
                              {"num_examples", "dim", "unit_norm", "groups"}));
  RETURN_IF_ERROR(r.Get(j, at, "num_examples", data.num_examples));
  RETURN_IF_ERROR(r.Get(j, at, "dim", data.dim));
  RETURN_IF_ERROR(r.Get(j, at, "unit_norm", data.unit_norm));
  auto it = j.find("groups");
  if (it == j.end()) return absl::OkStatus();
  size_t pos = r.Locate(at, "groups");
  if (!it->is_array() || it->empty()) {
    return r.Error(pos, "groups must be a non-empty array");
  }
  data.groups.clear();
  for (const json& g : *it) {
    pos = r.Locate(pos + 1, g.empty() ? "" : g.items().begin().key());
    GroupSpec spec;
    RETURN_IF_ERROR(r.CheckKeys(
        g, pos, "a group",
        {"proportion", "label", "separation", "spread", "group"}));
    RETURN_IF_ERROR(r.Get(g, pos, "proportion", spec.proportion));
    RETURN_IF_ERROR(r.Get(g, pos, "label", spec.label));
    RETURN_IF_ERROR(r.Get(g, pos, "separation", spec.separation));
    RETURN_IF_ERROR(r.Get(g, pos, "spread", spec.spread));
    RETURN_IF_ERROR(r.Get(g, pos, "group", spec.group_id));
    data.groups.push_back(spec);
  }
  return absl::OkStatus();
}

absl::Status ReadModel(const Reader& r, const json& j, size_t at,
                       SimConfig& sim) {
  RETURN_IF_ERROR(r.CheckKeys(j, at, "model", {"kind", "hidden"}));
  std::string kind = sim.model == ModelKind::kMlp ? "mlp" : "logistic";
  RETURN_IF_ERROR(r.Get(j, at, "kind", kind));
  if (kind == "logistic") {
    sim.model = ModelKind::kLogistic;
  } else if (kind == "mlp") {
    sim.model = ModelKind::kMlp;
  } else {
    return r.Error(r.Locate(at, "kind"),
                   absl::StrFormat("model kind must be \"logistic\" or \"mlp\", "
                                   "got \"%s\"",
                                   kind));
  }
  return r.Get(j, at, "hidden", sim.hidden);
}

absl::Status ReadTraining(const Reader& r, const json& j, size_t at,
                          SimConfig& sim) {
  RETURN_IF_ERROR(r.CheckKeys(
      j, at, "training",
      {"learning_rate", "epochs", "sampling_prob", "max_clip",
       "noise_multiplier", "noise_std", "target_epsilon",
       "norm_updates_per_epoch", "clipping", "tracked_examples"}));
  RETURN_IF_ERROR(r.Get(j, at, "learning_rate", sim.learning_rate));
  RETURN_IF_ERROR(r.Get(j, at, "epochs", sim.epochs));
  RETURN_IF_ERROR(r.Get(j, at, "sampling_prob", sim.sampling_prob));
  RETURN_IF_ERROR(r.GetOptional(j, at, "max_clip", sim.max_clip));
  RETURN_IF_ERROR(r.GetOptional(j, at, "noise_multiplier", sim.noise_multiplier));
  RETURN_IF_ERROR(r.Get(j, at, "noise_std", sim.noise_std));
  if (j.contains("noise_std") && !j.contains("noise_multiplier")) {
    sim.noise_multiplier.reset();
  }
  RETURN_IF_ERROR(r.GetOptional(j, at, "target_epsilon", sim.target_epsilon));
  RETURN_IF_ERROR(
      r.Get(j, at, "norm_updates_per_epoch", sim.norm_updates_per_epoch));
  RETURN_IF_ERROR(r.Get(j, at, "tracked_examples", sim.tracked_examples));
  std::string clipping =
      sim.clipping == ClippingMode::kIndividual ? "individual" : "max";
  RETURN_IF_ERROR(r.Get(j, at, "clipping", clipping));
  if (clipping == "max") {
    sim.clipping = ClippingMode::kMax;
  } else if (clipping == "individual") {
    sim.clipping = ClippingMode::kIndividual;
  } else {
    return r.Error(r.Locate(at, "clipping"),
                   absl::StrFormat("clipping must be \"max\" or \"individual\", "
                                   "got \"%s\"",
                                   clipping));
  }
  return absl::OkStatus();
}

absl::Status ReadRelease(const Reader& r, const json& j, size_t at,
                         ReleaseConfig& release) {
  RETURN_IF_ERROR(r.CheckKeys(j, at, "release",
                              {"epsilon", "delta", "targets", "steps",
                               "step_size", "zero_noise"}));
  RETURN_IF_ERROR(r.Get(j, at, "epsilon", release.budget.epsilon));
  RETURN_IF_ERROR(r.Get(j, at, "delta", release.budget.delta));
  RETURN_IF_ERROR(r.Get(j, at, "steps", release.quantile.steps));
  RETURN_IF_ERROR(r.Get(j, at, "step_size", release.quantile.step_size));
  RETURN_IF_ERROR(r.Get(j, at, "zero_noise", release.zero_noise));
  auto it = j.find("targets");
  if (it != j.end()) {
    const size_t pos = r.Locate(at, "targets");
    if (!it->is_array()) return r.Error(pos, "targets must be an array");
    release.targets.clear();
    for (const json& t : *it) {
      if (!t.is_number()) return r.Error(pos, "targets must be numbers");
      release.targets.push_back(t.get<double>());
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status RunConfig::Validate() const {
  if (absl::Status s = sim.Validate(); !s.ok()) return s;
  if (histogram_bins < 1) {
    return absl::InvalidArgumentError("analysis.bins must be >= 1.");
  }
  if (output_dir.empty()) {
    return absl::InvalidArgumentError("output_dir must not be empty.");
  }
  ReleaseConfig release_check = release;
  release_check.bound = 1.0;
  return release_check.Validate();
}

RunConfig DefaultRunConfig() {
  RunConfig config;
  SimConfig& sim = config.sim;
  sim.data.num_examples = 2000;
  sim.data.dim = 5;
  sim.data.unit_norm = true;
  sim.data.groups = {{0.45, 0, 1.0, 1.0, 0},
                     {0.45, 1, 1.0, 1.0, 0},
                     {0.05, 0, 0.25, 1.0, 1},
                     {0.05, 1, 0.25, 1.0, 1}};
  sim.model = ModelKind::kLogistic;
  sim.learning_rate = 0.01;
  sim.epochs = 50;
  sim.sampling_prob = 0.05;
  sim.noise_multiplier = 2.0;
  sim.norm_updates_per_epoch = 1;
  sim.rounding_fraction = 0.01;
  sim.clipping = ClippingMode::kMax;
  sim.delta = kDefaultDelta;
  return config;
}

absl::StatusOr<RunConfig> ParseRunConfig(absl::string_view text,
                                         absl::string_view source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s:%d: malformed JSON: %s", source, LineOf(text, offset), e.what()));
  }
  const Reader r(text, source);
  RETURN_IF_ERROR(r.CheckKeys(root, 0, "the top level",
                              {"seed", "delta", "output_dir", "data", "model",
                               "training", "accounting", "release",
                               "analysis"}));
  RunConfig config = DefaultRunConfig();
  SimConfig& sim = config.sim;
  RETURN_IF_ERROR(r.Get(root, 0, "seed", sim.seed));
  RETURN_IF_ERROR(r.Get(root, 0, "delta", sim.delta));
  RETURN_IF_ERROR(r.Get(root, 0, "output_dir", config.output_dir));

  auto section = [&](absl::string_view name) -> std::pair<const json*, size_t> {
    auto it = root.find(std::string(name));
    if (it == root.end()) return {nullptr, 0};
    return {&*it, r.Locate(0, name)};
  };
  if (auto [j, at] = section("data"); j != nullptr) {
    RETURN_IF_ERROR(ReadData(r, *j, at, sim.data));
  }
  if (auto [j, at] = section("model"); j != nullptr) {
    RETURN_IF_ERROR(ReadModel(r, *j, at, sim));
  }
  if (auto [j, at] = section("training"); j != nullptr) {
    RETURN_IF_ERROR(ReadTraining(r, *j, at, sim));
  }
  if (auto [j, at] = section("accounting"); j != nullptr) {
    RETURN_IF_ERROR(r.CheckKeys(*j, at, "accounting",
                                {"rounding", "rounding_fraction"}));
    RETURN_IF_ERROR(r.GetOptional(*j, at, "rounding", sim.rounding));
    RETURN_IF_ERROR(r.Get(*j, at, "rounding_fraction", sim.rounding_fraction));
  }
  if (auto [j, at] = section("release"); j != nullptr) {
    RETURN_IF_ERROR(ReadRelease(r, *j, at, config.release));
  }
  if (auto [j, at] = section("analysis"); j != nullptr) {
    RETURN_IF_ERROR(r.CheckKeys(*j, at, "analysis", {"bins"}));
    RETURN_IF_ERROR(r.Get(*j, at, "bins", config.histogram_bins));
  }
  if (absl::Status s = config.Validate(); !s.ok()) {
    // Anchor to the key the message starts with, when the file mentions it.
    absl::string_view message = s.message();
    const size_t end = message.find_first_not_of(
        "abcdefghijklmnopqrstuvwxyz_.", 0);
    absl::string_view key = message.substr(0, end);
    if (const size_t dot = key.rfind('.'); dot != absl::string_view::npos) {
      key = key.substr(dot + 1);
    }
    const std::string quoted = absl::StrCat("\"", key, "\"");
    if (!key.empty() && text.find(quoted) != absl::string_view::npos) {
      return r.Error(text.find(quoted), message);
    }
    return absl::InvalidArgumentError(absl::StrCat(source, ": ", message));
  }
  return config;
}

absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  return ParseRunConfig(*text, path);
}

}  // namespace indiv_privacy
