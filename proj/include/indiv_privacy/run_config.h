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

// JSON run configuration. Units: noise_std and max_clip are in gradient-norm
// units, noise_multiplier is noise_std / max_clip, probabilities are
// dimensionless. Unknown keys are rejected and every error names the line it
// refers to.
//
//   {
//     "seed": 0,
//     "delta": 1e-5,
//     "output_dir": "out",
//     "data": {"num_examples": 2000, "dim": 5, "unit_norm": true,
//              "groups": [{"proportion": 0.5, "label": 0, "separation": 1.0,
//                          "spread": 1.0, "group": 0}, ...]},
//     "model": {"kind": "logistic", "hidden": 16},
//     "training": {"learning_rate": 0.01, "epochs": 50, "sampling_prob": 0.05,
//                  "max_clip": 1.0, "noise_multiplier": 2.0, "noise_std": 0.0,
//                  "target_epsilon": 3.0, "norm_updates_per_epoch": 1,
//                  "clipping": "max", "tracked_examples": 0},
//     "accounting": {"rounding": 0.01, "rounding_fraction": 0.01},
//     "release": {"epsilon": 0.1, "delta": 1e-5,
//                 "targets": [0.1, 0.3, 0.5, 0.7, 0.9], "steps": 20,
//                 "step_size": 0.2, "zero_noise": false},
//     "analysis": {"bins": 50}
//   }
//
// Every key is optional.

#ifndef INDIV_PRIVACY_RUN_CONFIG_H_
#define INDIV_PRIVACY_RUN_CONFIG_H_

#include <cstdint>
#include <string>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "indiv_privacy/dpsgd_sim.h"
#include "indiv_privacy/release.h"

namespace indiv_privacy {

struct RunConfig {
  SimConfig sim;
  // The bound is filled in from the report's worst-case epsilon.
  ReleaseConfig release;
  int64_t histogram_bins = 50;
  std::string output_dir = "out";

  absl::Status Validate() const;
};

// The desk configuration used by the examples and acceptance checks.
RunConfig DefaultRunConfig();

// `source` names the input in error messages.
absl::StatusOr<RunConfig> ParseRunConfig(absl::string_view text,
                                         absl::string_view source = "config");
absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_RUN_CONFIG_H_
