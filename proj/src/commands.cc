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


#include "indiv_privacy/commands.h"

#include <filesystem>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/string_view.h"
#include "indiv_privacy/analysis.h"
#include "indiv_privacy/io_util.h"
#include "indiv_privacy/report_io.h"
#include "indiv_privacy/trace_io.h"
#include "indiv_privacy/verification.h"
#include "json.hpp"

namespace indiv_privacy {
namespace {

using nlohmann::ordered_json;

#define RETURN_IF_ERROR(expr)                  \
  do {                                         \
    if (absl::Status _s = (expr); !_s.ok()) {  \
      return _s;                               \
    }                                          \
  } while (0)

absl::Status EnsureDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(
        absl::StrCat("Cannot create output directory ", dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

std::string PathIn(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

// Report and analysis files shared by simulate and account, so that both
// produce byte-identical outputs from the same ledger.
absl::StatusOr<PrivacyReport> WriteAccountingOutputs(
    const IndividualLedger& ledger, double delta, const LossTable* losses,
    int64_t bins, bool unsafe_export, const std::string& dir) {
  std::optional<std::span<const int64_t>> labels;
  if (losses != nullptr) {
    if (static_cast<int64_t>(losses->losses.size()) != ledger.num_examples()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Losses cover %d examples but the ledger has %d.",
          losses->losses.size(), ledger.num_examples()));
    }
    labels = losses->groups;
  }
  absl::StatusOr<PrivacyReport> report = MakeReport(ledger, delta, labels);
  if (!report.ok()) return report.status();
  RETURN_IF_ERROR(WriteFileAtomically(PathIn(dir, "report.json"),
                                      FormatReportJson(*report, unsafe_export)));
  if (unsafe_export) {
    RETURN_IF_ERROR(
        WriteFileAtomically(PathIn(dir, "report.csv"), FormatReportCsv(*report)));
  }

  absl::StatusOr<EpsilonHistogram> histogram =
      Histogram(report->epsilons, report->worst_case_epsilon, bins);
  if (!histogram.ok()) return histogram.status();
  RETURN_IF_ERROR(WriteFileAtomically(PathIn(dir, "histogram.csv"),
                                      FormatHistogramCsv(*histogram)));
  std::optional<CorrelationResult> correlation;
  std::optional<GroupSummary> groups;
  if (losses != nullptr) {
    absl::StatusOr<CorrelationResult> c =
        EpsLossCorrelation(*report, losses->losses);
    // A constant epsilon or loss vector has no correlation to report.
    if (c.ok()) correlation = *c;
    absl::StatusOr<GroupSummary> g =
        SummarizeGroups(report->epsilons, losses->losses, losses->groups);
    if (!g.ok()) return g.status();
    groups = *g;
    if (unsafe_export) {
      RETURN_IF_ERROR(WriteFileAtomically(
          PathIn(dir, "scatter.csv"),
          FormatScatterCsv(*report, losses->losses, losses->groups)));
    }
  }
  RETURN_IF_ERROR(WriteFileAtomically(
      PathIn(dir, "analysis.json"),
      FormatAnalysisJson(*report, correlation, groups, *histogram)));
  return report;
}

ordered_json SummaryLine(const PrivacyReport& report) {
  const ReportSummary s = Summarize(report.epsilons);
  ordered_json j;
  j["n"] = s.n;
  j["total_steps"] = report.total_steps;
  j["delta"] = report.delta;
  j["worst_case_epsilon"] = report.worst_case_epsilon;
  j["min_epsilon"] = s.min;
  j["mean_epsilon"] = s.mean;
  j["median_epsilon"] = s.median;
  j["max_epsilon"] = s.max;
  return j;
}

absl::StatusOr<PrivacyReport> ReportFromTrace(const std::string& path,
                                              double delta) {
  absl::StatusOr<Trace> trace = ReadTrace(path);
  if (!trace.ok()) return trace.status();
  absl::StatusOr<IndividualLedger> ledger = ReplayTrace(*trace, delta);
  if (!ledger.ok()) return ledger.status();
  return MakeReport(*ledger, delta);
}

absl::Status ExactlyOneSource(const std::optional<std::string>& report,
                              const std::optional<std::string>& trace) {
  if (report.has_value() == trace.has_value()) {
    return absl::InvalidArgumentError(
        "Give exactly one of --report and --trace.");
  }
  return absl::OkStatus();
}

}  // namespace

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kAlreadyExists:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

absl::Status ApplyOverrides(const Overrides& overrides, RunConfig& config) {
  SimConfig& sim = config.sim;
  if (overrides.seed.has_value()) sim.seed = *overrides.seed;
  if (overrides.delta.has_value()) sim.delta = *overrides.delta;
  if (overrides.rounding.has_value()) sim.rounding = *overrides.rounding;
  if (overrides.gamma.has_value()) sim.norm_updates_per_epoch = *overrides.gamma;
  if (overrides.out_dir.has_value()) config.output_dir = *overrides.out_dir;
  if (overrides.clipping.has_value()) {
    if (*overrides.clipping == "max") {
      sim.clipping = ClippingMode::kMax;
    } else if (*overrides.clipping == "individual") {
      sim.clipping = ClippingMode::kIndividual;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "--clipping must be max or individual, got ", *overrides.clipping));
    }
  }
  return config.Validate();
}

absl::Status Simulate(const RunConfig& config, bool unsafe_export,
                      std::ostream& out) {
  RETURN_IF_ERROR(config.Validate());
  const SimConfig& sim = config.sim;
  absl::StatusOr<Dataset> data = GenerateSynthetic(sim.data, sim.seed);
  if (!data.ok()) return data.status();
  absl::StatusOr<TrainOutput> trained = Train(sim, *data);
  if (!trained.ok()) return trained.status();
  if (!trained->ledger.has_value()) {
    return absl::FailedPreconditionError(
        "Simulation needs noise > 0 and a finite clipping threshold to "
        "account privacy.");
  }
  const IndividualLedger& ledger = *trained->ledger;
  const std::string& dir = config.output_dir;
  RETURN_IF_ERROR(EnsureDir(dir));

  RETURN_IF_ERROR(WriteTrace(
      PathIn(dir, "trace.jsonl"),
      MakeTraceHeader(ledger.config(), ledger.num_examples(),
                      trained->total_steps),
      trained->trace));
  LossTable losses{data->groups, trained->final_losses};
  RETURN_IF_ERROR(WriteFileAtomically(
      PathIn(dir, "losses.csv"), FormatLossesCsv(losses.groups, losses.losses)));
  absl::StatusOr<PrivacyReport> report = WriteAccountingOutputs(
      ledger, sim.delta, &losses, config.histogram_bins, unsafe_export, dir);
  if (!report.ok()) return report.status();

  double mean_loss = 0.0;
  int64_t correct = 0;
  for (size_t i = 0; i < losses.losses.size(); ++i) {
    mean_loss += losses.losses[i];
    correct += trained->final_correct[i];
  }
  ordered_json run;
  run["seed"] = sim.seed;
  run["num_examples"] = data->num_examples;
  run["max_clip"] = trained->max_clip;
  run["noise_std"] = trained->noise_std;
  run["noise_multiplier"] = trained->noise_std / trained->max_clip;
  run["sampling_prob"] = sim.sampling_prob;
  run["rounding"] = trained->rounding;
  run["frequency"] = trained->frequency;
  run["steps_per_epoch"] = trained->steps_per_epoch;
  run["total_steps"] = trained->total_steps;
  run["clipping"] =
      sim.clipping == ClippingMode::kIndividual ? "individual" : "max";
  run["delta"] = sim.delta;
  run["worst_case_epsilon"] = report->worst_case_epsilon;
  run["mean_final_loss"] = mean_loss / losses.losses.size();
  run["train_accuracy"] =
      static_cast<double>(correct) / static_cast<double>(losses.losses.size());
  RETURN_IF_ERROR(WriteFileAtomically(PathIn(dir, "run.json"), run.dump(2) + "\n"));

  ordered_json summary = SummaryLine(*report);
  summary["mean_final_loss"] = run["mean_final_loss"];
  summary["output_dir"] = dir;
  out << summary.dump() << "\n";
  return absl::OkStatus();
}

absl::Status Account(const AccountOptions& options, std::ostream& out) {
  absl::StatusOr<Trace> trace = ReadTrace(options.trace_path);
  if (!trace.ok()) return trace.status();
  std::optional<LossTable> losses;
  if (options.losses_path.has_value()) {
    absl::StatusOr<std::string> text = ReadFile(*options.losses_path);
    if (!text.ok()) return text.status();
    absl::StatusOr<LossTable> parsed = ParseLossesCsv(*text, *options.losses_path);
    if (!parsed.ok()) return parsed.status();
    losses = *std::move(parsed);
  }
  absl::StatusOr<IndividualLedger> ledger = ReplayTrace(*trace, options.delta);
  if (!ledger.ok()) return ledger.status();
  RETURN_IF_ERROR(EnsureDir(options.out_dir));
  absl::StatusOr<PrivacyReport> report = WriteAccountingOutputs(
      *ledger, options.delta, losses.has_value() ? &*losses : nullptr,
      options.histogram_bins, options.unsafe_export, options.out_dir);
  if (!report.ok()) return report.status();
  ordered_json summary = SummaryLine(*report);
  summary["output_dir"] = options.out_dir;
  out << summary.dump() << "\n";
  return absl::OkStatus();
}

absl::Status Report(const ReportOptions& options, std::ostream& out) {
  RETURN_IF_ERROR(ExactlyOneSource(options.report_path, options.trace_path));
  if (options.trace_path.has_value()) {
    absl::StatusOr<Trace> trace = ReadTrace(*options.trace_path);
    if (!trace.ok()) return trace.status();
    absl::StatusOr<IndividualLedger> ledger = ReplayTrace(*trace, options.delta);
    if (!ledger.ok()) return ledger.status();
    if (options.example.has_value()) {
      absl::StatusOr<EpsilonResult> eps =
          ledger->EpsilonOf(*options.example, options.delta);
      if (!eps.ok()) return eps.status();
      absl::StatusOr<double> worst =
          WorstCaseEpsilon(ledger->config(), ledger->total_steps());
      if (!worst.ok()) return worst.status();
      ordered_json j;
      j["id"] = *options.example;
      j["epsilon"] = eps->epsilon;
      j["best_order"] = eps->best_order;
      j["delta"] = options.delta;
      j["worst_case_epsilon"] = *worst;
      out << j.dump() << "\n";
      return absl::OkStatus();
    }
    absl::StatusOr<PrivacyReport> report = MakeReport(*ledger, options.delta);
    if (!report.ok()) return report.status();
    out << SummaryLine(*report).dump() << "\n";
    return absl::OkStatus();
  }

  absl::StatusOr<std::string> text = ReadFile(*options.report_path);
  if (!text.ok()) return text.status();
  absl::StatusOr<LoadedReport> loaded = ParseReportJson(*text, *options.report_path);
  if (!loaded.ok()) return loaded.status();
  const PrivacyReport& report = loaded->report;
  if (options.example.has_value()) {
    if (!loaded->has_per_example) {
      return absl::FailedPreconditionError(
          "This report holds aggregates only; query an example with --trace, "
          "or re-run account with --unsafe-export-per-example.");
    }
    const int64_t i = *options.example;
    if (i < 0 || i >= report.size()) {
      return absl::OutOfRangeError(absl::StrFormat(
          "Example %d is outside [0, %d).", i, report.size()));
    }
    ordered_json j;
    j["id"] = i;
    j["epsilon"] = report.epsilons[i];
    j["best_order"] = report.best_orders[i];
    j["delta"] = report.delta;
    j["worst_case_epsilon"] = report.worst_case_epsilon;
    out << j.dump() << "\n";
    return absl::OkStatus();
  }
  ordered_json j;
  j["n"] = loaded->summary.n;
  j["total_steps"] = report.total_steps;
  j["delta"] = report.delta;
  j["worst_case_epsilon"] = report.worst_case_epsilon;
  j["min_epsilon"] = loaded->summary.min;
  j["mean_epsilon"] = loaded->summary.mean;
  j["median_epsilon"] = loaded->summary.median;
  j["max_epsilon"] = loaded->summary.max;
  ordered_json groups = ordered_json::array();
  for (const GroupAggregate& g : report.groups) {
    groups.push_back({{"label", g.label},
                      {"size", g.size},
                      {"mean_epsilon", g.mean_epsilon}});
  }
  j["groups"] = groups;
  out << j.dump() << "\n";
  return absl::OkStatus();
}

absl::Status Release(const ReleaseOptions& options, std::ostream& out) {
  RETURN_IF_ERROR(ExactlyOneSource(options.report_path, options.trace_path));
  PrivacyReport report;
  if (options.trace_path.has_value()) {
    absl::StatusOr<PrivacyReport> r =
        ReportFromTrace(*options.trace_path, options.delta);
    if (!r.ok()) return r.status();
    report = *std::move(r);
  } else {
    absl::StatusOr<std::string> text = ReadFile(*options.report_path);
    if (!text.ok()) return text.status();
    absl::StatusOr<LoadedReport> loaded =
        ParseReportJson(*text, *options.report_path);
    if (!loaded.ok()) return loaded.status();
    if (!loaded->has_per_example) {
      return absl::FailedPreconditionError(
          "Release needs per-example epsilons: pass --trace, or a report "
          "written with --unsafe-export-per-example.");
    }
    report = std::move(loaded->report);
  }
  ReleaseConfig config = options.release;
  config.bound = report.worst_case_epsilon;
  absl::StatusOr<ReleasedStats> stats = ReleaseAll(report.epsilons, config);
  if (!stats.ok()) return stats.status();
  RETURN_IF_ERROR(EnsureDir(options.out_dir));
  const std::string json = FormatReleaseJson(config, *stats);
  RETURN_IF_ERROR(WriteFileAtomically(PathIn(options.out_dir, "release.json"), json));
  out << json;
  return absl::OkStatus();
}

absl::Status Verify(const VerifyOptions& options, std::ostream& out,
                    bool& all_passed) {
  const std::string& suite = options.suite;
  if (suite != "all" && suite != "quadrature" && suite != "enumeration" &&
      suite != "bucketed") {
    return absl::InvalidArgumentError(absl::StrCat(
        "Unknown suite ", suite, "; use all, quadrature, enumeration or "
        "bucketed."));
  }
  std::vector<SuiteResult> results;
  if (suite == "all" || suite == "quadrature") {
    absl::StatusOr<SuiteResult> r = RunQuadratureSuite();
    if (!r.ok()) return r.status();
    results.push_back(*r);
  }
  if (suite == "all" || suite == "enumeration") {
    absl::StatusOr<SuiteResult> r = RunEnumerationSuite(options.seed);
    if (!r.ok()) return r.status();
    results.push_back(*r);
  }
  if (suite == "all" || suite == "bucketed") {
    BucketedSuiteOptions bucketed;
    bucketed.seed = options.seed;
    bucketed.corrupt_cache = options.corrupt_cache;
    absl::StatusOr<SuiteResult> r = RunBucketedSuite(bucketed);
    if (!r.ok()) return r.status();
    results.push_back(*r);
  }
  all_passed = true;
  ordered_json rows = ordered_json::array();
  for (const SuiteResult& r : results) {
    all_passed = all_passed && r.passed;
    ordered_json row;
    row["suite"] = r.name;
    row["passed"] = r.passed;
    row["cases"] = r.cases;
    row["max_error"] = r.max_error;
    row["tolerance"] = r.tolerance;
    row["seconds"] = r.seconds;
    row["worst_case"] = r.detail;
    rows.push_back(row);
  }
  ordered_json j;
  j["passed"] = all_passed;
  j["suites"] = rows;
  out << j.dump(2) << "\n";
  return absl::OkStatus();
}

}  // namespace indiv_privacy
