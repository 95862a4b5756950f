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


#include "indiv_privacy/report_io.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "indiv_privacy/io_util.h"
#include "json.hpp"

namespace indiv_privacy {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr absl::string_view kReportFormat = "idp-report";
constexpr int64_t kReportVersion = 1;

ordered_json ConfigJson(const AccountantConfig& config) {
  ordered_json j;
  j["noise_std"] = config.noise_std;
  j["max_clip"] = config.max_clip;
  j["sampling_prob"] = config.sampling_prob;
  j["rounding"] = config.rounding;
  j["frequency"] = config.frequency;
  j["orders"] = config.grid.orders();
  return j;
}

ordered_json SummaryJson(const ReportSummary& s) {
  ordered_json j;
  j["n"] = s.n;
  j["min"] = s.min;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["max"] = s.max;
  return j;
}

std::string Dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// Splits CSV text into lines, skipping a trailing empty line.
std::vector<absl::string_view> Lines(absl::string_view text) {
  std::vector<absl::string_view> lines = absl::StrSplit(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (absl::string_view& l : lines) l = absl::StripSuffix(l, "\r");
  return lines;
}

}  // namespace

ReportSummary Summarize(std::span<const double> epsilons) {
  ReportSummary s;
  s.n = static_cast<int64_t>(epsilons.size());
  if (epsilons.empty()) return s;
  std::vector<double> sorted(epsilons.begin(), epsilons.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double e : epsilons) sum += e;
  s.min = sorted.front();
  s.max = sorted.back();
  s.mean = sum / s.n;
  const size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid]
                                    : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return s;
}

std::string FormatReportJson(const PrivacyReport& report,
                             bool include_per_example) {
  ordered_json j;
  j["format"] = kReportFormat;
  j["version"] = kReportVersion;
  j["config"] = ConfigJson(report.config);
  j["total_steps"] = report.total_steps;
  j["delta"] = report.delta;
  j["worst_case_epsilon"] = report.worst_case_epsilon;
  j["summary"] = SummaryJson(Summarize(report.epsilons));
  ordered_json groups = ordered_json::array();
  for (const GroupAggregate& g : report.groups) {
    ordered_json row;
    row["label"] = g.label;
    row["size"] = g.size;
    row["mean_epsilon"] = g.mean_epsilon;
    groups.push_back(row);
  }
  j["groups"] = groups;
  if (include_per_example) {
    ordered_json rows = ordered_json::array();
    for (int64_t i = 0; i < report.size(); ++i) {
      ordered_json row;
      row["id"] = i;
      row["epsilon"] = report.epsilons[i];
      row["best_order"] = report.best_orders[i];
      if (!report.group_labels.empty()) row["group"] = report.group_labels[i];
      rows.push_back(row);
    }
    j["per_example"] = rows;
  }
  return Dump(j);
}

std::string FormatReportCsv(const PrivacyReport& report) {
  const bool grouped = !report.group_labels.empty();
  std::string out = grouped ? "example_id,epsilon,best_order,group\n"
                            : "example_id,epsilon,best_order\n";
  for (int64_t i = 0; i < report.size(); ++i) {
    absl::StrAppend(&out, i, ",", FormatDouble(report.epsilons[i]), ",",
                    FormatDouble(report.best_orders[i]));
    if (grouped) absl::StrAppend(&out, ",", report.group_labels[i]);
    out.push_back('\n');
  }
  return out;
}

absl::StatusOr<LoadedReport> ParseReportJson(absl::string_view text,
                                             absl::string_view source) {
  LoadedReport out;
  PrivacyReport& report = out.report;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != kReportFormat) {
      return absl::InvalidArgumentError(
          absl::StrCat(source, ": not an idp-report file"));
    }
    if (j.at("version").get<int64_t>() > kReportVersion) {
      return absl::InvalidArgumentError(
          absl::StrCat(source, ": report version is newer than supported"));
    }
    const json& c = j.at("config");
    report.config.noise_std = c.at("noise_std").get<double>();
    report.config.max_clip = c.at("max_clip").get<double>();
    report.config.sampling_prob = c.at("sampling_prob").get<double>();
    report.config.rounding = c.at("rounding").get<double>();
    report.config.frequency = c.at("frequency").get<int64_t>();
    absl::StatusOr<OrderGrid> grid =
        OrderGrid::Create(c.at("orders").get<std::vector<double>>());
    if (!grid.ok()) return grid.status();
    report.config.grid = *grid;
    report.total_steps = j.at("total_steps").get<int64_t>();
    report.delta = j.at("delta").get<double>();
    report.config.delta = report.delta;
    report.worst_case_epsilon = j.at("worst_case_epsilon").get<double>();
    const json& s = j.at("summary");
    out.summary = {s.at("n").get<int64_t>(), s.at("min").get<double>(),
                   s.at("mean").get<double>(), s.at("median").get<double>(),
                   s.at("max").get<double>()};
    for (const json& g : j.at("groups")) {
      report.groups.push_back({g.at("label").get<int64_t>(),
                               g.at("size").get<int64_t>(),
                               g.at("mean_epsilon").get<double>()});
    }
    if (j.contains("per_example")) {
      out.has_per_example = true;
      const json& rows = j["per_example"];
      for (size_t i = 0; i < rows.size(); ++i) {
        const json& row = rows[i];
        if (row.at("id").get<int64_t>() != static_cast<int64_t>(i)) {
          return absl::InvalidArgumentError(absl::StrFormat(
              "%s: per_example row %d has id %d", source, i,
              row.at("id").get<int64_t>()));
        }
        report.epsilons.push_back(row.at("epsilon").get<double>());
        report.best_orders.push_back(row.at("best_order").get<double>());
        if (row.contains("group")) {
          report.group_labels.push_back(row["group"].get<int64_t>());
        }
      }
      if (!report.group_labels.empty() &&
          report.group_labels.size() != report.epsilons.size()) {
        return absl::InvalidArgumentError(
            absl::StrCat(source, ": group labels on only some rows"));
      }
      if (report.size() != out.summary.n) {
        return absl::InvalidArgumentError(
            absl::StrCat(source, ": per_example length disagrees with summary"));
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat(source, ": malformed report: ", e.what()));
  }
  return out;
}

std::string FormatLossesCsv(std::span<const int64_t> groups,
                            std::span<const double> losses) {
  std::string out = "example_id,group,final_loss\n";
  for (size_t i = 0; i < losses.size(); ++i) {
    absl::StrAppend(&out, i, ",", groups[i], ",", FormatDouble(losses[i]), "\n");
  }
  return out;
}

absl::StatusOr<LossTable> ParseLossesCsv(absl::string_view text,
                                         absl::string_view source) {
  const std::vector<absl::string_view> lines = Lines(text);
  if (lines.empty() || lines[0] != "example_id,group,final_loss") {
    return absl::InvalidArgumentError(absl::StrCat(
        source, ":1: expected header example_id,group,final_loss"));
  }
  LossTable table;
  for (size_t k = 1; k < lines.size(); ++k) {
    std::vector<absl::string_view> cells = absl::StrSplit(lines[k], ',');
    int64_t id = 0;
    int64_t group = 0;
    double loss = 0.0;
    if (cells.size() != 3 || !absl::SimpleAtoi(cells[0], &id) ||
        !absl::SimpleAtoi(cells[1], &group) ||
        !absl::SimpleAtod(cells[2], &loss)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s:%d: malformed row", source, k + 1));
    }
    if (id != static_cast<int64_t>(k - 1)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%s:%d: expected example_id %d, found %d", source, k + 1, k - 1, id));
    }
    if (!std::isfinite(loss) || loss < 0.0) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%s:%d: loss must be finite and >= 0", source, k + 1));
    }
    table.groups.push_back(group);
    table.losses.push_back(loss);
  }
  return table;
}

std::string FormatAnalysisJson(const PrivacyReport& report,
                               const std::optional<CorrelationResult>& correlation,
                               const std::optional<GroupSummary>& groups,
                               const EpsilonHistogram& histogram) {
  ordered_json j;
  j["n"] = report.size();
  j["worst_case_epsilon"] = report.worst_case_epsilon;
  if (correlation.has_value()) {
    ordered_json c;
    c["pearson_r"] = correlation->pearson_r;
    c["slope"] = correlation->slope;
    c["intercept"] = correlation->intercept;
    c["count"] = correlation->count;
    c["capped_at_worst_case"] = correlation->capped;
    j["eps_vs_log_loss"] = c;
  }
  if (groups.has_value()) {
    ordered_json rows = ordered_json::array();
    for (const GroupStats& g : groups->groups) {
      ordered_json row;
      row["label"] = g.label;
      row["size"] = g.size;
      row["mean_epsilon"] = g.mean_epsilon;
      row["mean_loss"] = g.mean_loss;
      if (g.accuracy.has_value()) row["accuracy"] = *g.accuracy;
      rows.push_back(row);
    }
    ordered_json summary;
    summary["groups"] = rows;
    summary["disparity"] = groups->disparity.has_value()
                               ? ordered_json(*groups->disparity)
                               : ordered_json(nullptr);
    j["group_summary"] = summary;
  }
  ordered_json h;
  h["edges"] = histogram.edges;
  h["counts"] = histogram.counts;
  h["quantile_levels"] = histogram.quantile_levels;
  h["quantile_markers"] = histogram.quantile_markers;
  h["worst_case_marker"] = histogram.worst_case_marker;
  j["histogram"] = h;
  return Dump(j);
}

std::string FormatHistogramCsv(const EpsilonHistogram& histogram) {
  std::string out = "bin_low,bin_high,count\n";
  for (size_t b = 0; b < histogram.counts.size(); ++b) {
    absl::StrAppend(&out, FormatDouble(histogram.edges[b]), ",",
                    FormatDouble(histogram.edges[b + 1]), ",",
                    histogram.counts[b], "\n");
  }
  return out;
}

std::string FormatScatterCsv(const PrivacyReport& report,
                             std::span<const double> losses,
                             std::span<const int64_t> groups) {
  std::string out = "example_id,epsilon,log_loss,group\n";
  for (int64_t i = 0; i < report.size(); ++i) {
    absl::StrAppend(&out, i, ",", FormatDouble(report.epsilons[i]), ",",
                    FormatDouble(std::log(std::max(losses[i], kLossFloor))),
                    ",", groups[i], "\n");
  }
  return out;
}

std::string FormatReleaseJson(const ReleaseConfig& config,
                              const ReleasedStats& stats) {
  ordered_json j;
  ordered_json budget;
  budget["epsilon"] = config.zero_noise ? ordered_json(nullptr)
                                        : ordered_json(config.budget.epsilon);
  budget["delta"] = config.budget.delta;
  j["requested_budget"] = budget;
  j["zero_noise"] = config.zero_noise;
  j["bound"] = config.bound;
  j["seed"] = config.seed;
  ordered_json mean;
  mean["value"] = stats.mean.value;
  mean["noise_std"] = stats.mean.noise_std;
  mean["noise_multiplier"] = stats.mean_multiplier;
  j["mean"] = mean;
  ordered_json quantiles = ordered_json::array();
  for (const QuantileRelease& q : stats.quantiles) {
    ordered_json row;
    row["target"] = q.target;
    row["value"] = q.value;
    row["count_noise_std"] = q.count_noise_std;
    quantiles.push_back(row);
  }
  j["quantiles"] = quantiles;
  ordered_json realized;
  realized["epsilon"] = config.zero_noise ? ordered_json(nullptr)
                                          : ordered_json(stats.realized_epsilon);
  realized["delta"] = stats.realized_delta;
  realized["queries"] = stats.num_queries;
  realized["steps_per_quantile"] = config.quantile.steps;
  j["realized_budget"] = realized;
  return Dump(j);
}

}  // namespace indiv_privacy
