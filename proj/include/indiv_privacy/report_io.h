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


// On-disk formats for privacy reports, losses, analysis outputs and releases.
// Per-example epsilons are sensitive; they are serialized only when the
// caller asks for it explicitly.

#ifndef INDIV_PRIVACY_REPORT_IO_H_
#define INDIV_PRIVACY_REPORT_IO_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "indiv_privacy/accountant.h"
#include "indiv_privacy/analysis.h"
#include "indiv_privacy/release.h"

namespace indiv_privacy {

struct ReportSummary {
  int64_t n = 0;
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
};

ReportSummary Summarize(std::span<const double> epsilons);

std::string FormatReportJson(const PrivacyReport& report,
                             bool include_per_example);
// One row per example: example_id,epsilon,best_order[,group].
std::string FormatReportCsv(const PrivacyReport& report);

struct LoadedReport {
  PrivacyReport report;  // epsilons empty unless present in the file
  ReportSummary summary;
  bool has_per_example = false;
};

absl::StatusOr<LoadedReport> ParseReportJson(absl::string_view text,
                                             absl::string_view source = "report");

struct LossTable {
  std::vector<int64_t> groups;
  std::vector<double> losses;
};

// example_id,group,final_loss
std::string FormatLossesCsv(std::span<const int64_t> groups,
                            std::span<const double> losses);
absl::StatusOr<LossTable> ParseLossesCsv(absl::string_view text,
                                         absl::string_view source = "losses");

std::string FormatAnalysisJson(const PrivacyReport& report,
                               const std::optional<CorrelationResult>& correlation,
                               const std::optional<GroupSummary>& groups,
                               const EpsilonHistogram& histogram);
// bin_low,bin_high,count
std::string FormatHistogramCsv(const EpsilonHistogram& histogram);
// example_id,epsilon,log_loss,group
std::string FormatScatterCsv(const PrivacyReport& report,
                             std::span<const double> losses,
                             std::span<const int64_t> groups);

std::string FormatReleaseJson(const ReleaseConfig& config,
                              const ReleasedStats& stats);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_REPORT_IO_H_
