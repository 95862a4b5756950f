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


// idp: individual privacy accounting for DP-SGD.
//
//   idp simulate --config run.json [--out DIR] [--unsafe-export-per-example]
//   idp account  --trace trace.jsonl [--losses losses.csv] [--out DIR]
//   idp report   (--report report.json | --trace trace.jsonl) [--example ID]
//   idp release  (--report report.json | --trace trace.jsonl) [--zero-noise]
//   idp verify   [--suite all|quadrature|enumeration|bucketed]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "indiv_privacy/commands.h"

namespace ip = indiv_privacy;

namespace {

int Fail(const absl::Status& status) {
  std::cerr << "idp: " << status.message() << "\n";
  return ip::ExitCodeFor(status);
}

template <typename T>
std::optional<T> Value(CLI::App* cmd, const std::string& name) {
  CLI::Option* option = cmd->get_option_no_throw(name);
  if (option == nullptr || option->count() == 0) return std::nullopt;
  return option->as<T>();
}

void AddCommon(CLI::App* cmd) {
  cmd->add_option("--config", "Run configuration (JSON)");
  cmd->add_option("--seed", "Random seed (unsigned 64-bit)");
  cmd->add_option("--delta", "Target delta for reported epsilons");
  cmd->add_option("--out", "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Individual privacy accounting for DP-SGD."};
  app.require_subcommand(1);

  CLI::App* simulate = app.add_subcommand("simulate", "Train and account");
  AddCommon(simulate);
  simulate->add_option("--clipping", "max or individual")
      ->check(CLI::IsMember({"max", "individual"}));
  simulate->add_option(
      "--rounding",
      "Absolute bucket width r in gradient-norm units; 0 disables rounding");
  simulate->add_option("--gamma", "Norm refreshes per epoch");
  simulate->add_flag("--unsafe-export-per-example",
                     "Also write per-example epsilons");

  CLI::App* account = app.add_subcommand("account", "Account a norm trace");
  AddCommon(account);
  account->add_option("--trace", "Trace (JSON Lines)")->required();
  account->add_option("--losses", "losses.csv, for groups and analysis");
  account->add_flag("--unsafe-export-per-example",
                    "Also write per-example epsilons");

  CLI::App* report = app.add_subcommand("report", "Summarize or query a report");
  AddCommon(report);
  report->add_option("--report", "report.json");
  report->add_option("--trace", "Trace (JSON Lines)");
  report->add_option("--example", "Owner-scoped query for one example id");

  CLI::App* release =
      app.add_subcommand("release", "Private statistics of the epsilons");
  AddCommon(release);
  release->add_option("--report", "report.json with per-example epsilons");
  release->add_option("--trace", "Trace (JSON Lines)");
  release->add_flag("--zero-noise", "Release exact statistics (no privacy)");

  CLI::App* verify = app.add_subcommand("verify", "Run the oracle suites");
  verify->add_option("--suite", "all, quadrature, enumeration or bucketed")
      ->check(CLI::IsMember({"all", "quadrature", "enumeration", "bucketed"}));
  verify->add_option("--seed", "Random seed");
  verify->add_flag("--corrupt-cache",
                   "Negative control: corrupt one cached curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ip::kExitValidation;
  }
  CLI::App* cmd = app.get_subcommands().front();

  try {
    if (cmd == verify) {
      ip::VerifyOptions options;
      options.suite = Value<std::string>(verify, "--suite").value_or("all");
      options.seed = Value<uint64_t>(verify, "--seed").value_or(0);
      options.corrupt_cache = verify->get_option("--corrupt-cache")->count() > 0;
      bool passed = false;
      absl::Status status = ip::Verify(options, std::cout, passed);
      if (!status.ok()) return Fail(status);
      return passed ? ip::kExitOk : ip::kExitVerification;
    }

    ip::RunConfig config = ip::DefaultRunConfig();
    if (std::optional<std::string> path = Value<std::string>(cmd, "--config")) {
      absl::StatusOr<ip::RunConfig> loaded = ip::LoadRunConfig(*path);
      if (!loaded.ok()) return Fail(loaded.status());
      config = *std::move(loaded);
    }
    ip::Overrides overrides;
    overrides.seed = Value<uint64_t>(cmd, "--seed");
    overrides.delta = Value<double>(cmd, "--delta");
    overrides.out_dir = Value<std::string>(cmd, "--out");
    overrides.clipping = Value<std::string>(cmd, "--clipping");
    overrides.rounding = Value<double>(cmd, "--rounding");
    overrides.gamma = Value<int64_t>(cmd, "--gamma");
    if (absl::Status s = ip::ApplyOverrides(overrides, config); !s.ok()) {
      return Fail(s);
    }
    const bool unsafe_export =
        Value<bool>(cmd, "--unsafe-export-per-example").value_or(false);

    absl::Status status;
    if (cmd == simulate) {
      status = ip::Simulate(config, unsafe_export, std::cout);
    } else if (cmd == account) {
      ip::AccountOptions options;
      options.trace_path = *Value<std::string>(cmd, "--trace");
      options.losses_path = Value<std::string>(cmd, "--losses");
      options.delta = config.sim.delta;
      options.histogram_bins = config.histogram_bins;
      options.out_dir = config.output_dir;
      options.unsafe_export = unsafe_export;
      status = ip::Account(options, std::cout);
    } else if (cmd == report) {
      ip::ReportOptions options;
      options.report_path = Value<std::string>(cmd, "--report");
      options.trace_path = Value<std::string>(cmd, "--trace");
      options.delta = config.sim.delta;
      options.example = Value<int64_t>(cmd, "--example");
      status = ip::Report(options, std::cout);
    } else {
      ip::ReleaseOptions options;
      options.report_path = Value<std::string>(cmd, "--report");
      options.trace_path = Value<std::string>(cmd, "--trace");
      options.delta = config.sim.delta;
      options.release = config.release;
      options.release.seed = config.sim.seed;
      if (Value<bool>(cmd, "--zero-noise").value_or(false)) {
        options.release.zero_noise = true;
      }
      options.out_dir = config.output_dir;
      status = ip::Release(options, std::cout);
    }
    if (!status.ok()) return Fail(status);
    return ip::kExitOk;
  } catch (const CLI::ConversionError& e) {
    std::cerr << "idp: " << e.what() << "\n";
    return ip::kExitValidation;
  }
}
