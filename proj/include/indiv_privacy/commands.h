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


// The subcommands behind the idp command-line tool. Each writes its files
// atomically into an output directory and prints a short JSON summary.

#ifndef INDIV_PRIVACY_COMMANDS_H_
#define INDIV_PRIVACY_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "indiv_privacy/run_config.h"

namespace indiv_privacy {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitVerification = 3,
};

// Bad input maps to kExitValidation, everything else to kExitRuntime.
int ExitCodeFor(const absl::Status& status);

// Command-line flags that override the config file.
struct Overrides {
  std::optional<uint64_t> seed;
  std::optional<double> delta;
  std::optional<std::string> clipping;
  std::optional<double> rounding;
  std::optional<int64_t> gamma;
  std::optional<std::string> out_dir;
};

absl::Status ApplyOverrides(const Overrides& overrides, RunConfig& config);

// Trains, then writes trace.jsonl, losses.csv, report.json, analysis.json,
// histogram.csv and run.json. report.csv and scatter.csv hold per-example
// values and are written only with `unsafe_export`.
absl::Status Simulate(const RunConfig& config, bool unsafe_export,
                      std::ostream& out);

struct AccountOptions {
  std::string trace_path;
  std::optional<std::string> losses_path;
  double delta = kDefaultDelta;
  int64_t histogram_bins = 50;
  std::string out_dir = "out";
  bool unsafe_export = false;
};

// Rebuilds the ledger from a trace and writes the same report files as
// Simulate. Analysis files need losses.
absl::Status Account(const AccountOptions& options, std::ostream& out);

struct ReportOptions {
  std::optional<std::string> report_path;
  std::optional<std::string> trace_path;
  double delta = kDefaultDelta;
  std::optional<int64_t> example;
};

// Prints the aggregate summary, or one example's epsilon when `example` is
// set. With a trace, only that example's ledger entry is evaluated.
absl::Status Report(const ReportOptions& options, std::ostream& out);

struct ReleaseOptions {
  std::optional<std::string> report_path;
  std::optional<std::string> trace_path;
  double delta = kDefaultDelta;  // for epsilons recomputed from a trace
  ReleaseConfig release;         // bound is taken from the report
  std::string out_dir = "out";
};

// Writes release.json.
absl::Status Release(const ReleaseOptions& options, std::ostream& out);

struct VerifyOptions {
  std::string suite = "all";  // all, quadrature, enumeration or bucketed
  uint64_t seed = 0;
  bool corrupt_cache = false;
};

// Prints a JSON summary. Sets `all_passed`.
absl::Status Verify(const VerifyOptions& options, std::ostream& out,
                    bool& all_passed);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_COMMANDS_H_
