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


#include "indiv_privacy/trace_io.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/string_view.h"
#include "indiv_privacy/io_util.h"
#include "json.hpp"

namespace indiv_privacy {
namespace {

using nlohmann::json;

constexpr absl::string_view kTraceFormat = "idp-trace";

absl::Status LineError(absl::string_view source, int64_t line,
                       absl::string_view message) {
  return absl::InvalidArgumentError(
      absl::StrFormat("%s:%d: %s", source, line, message));
}

absl::Status ExpectKeys(const json& j, std::initializer_list<absl::string_view> keys,
                        absl::string_view source, int64_t line) {
  if (!j.is_object()) return LineError(source, line, "expected a JSON object");
  for (absl::string_view key : keys) {
    if (!j.contains(std::string(key))) {
      return LineError(source, line, absl::StrCat("missing key \"", key, "\""));
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      return LineError(source, line, absl::StrCat("unknown key \"", key, "\""));
    }
  }
  return absl::OkStatus();
}

}  // namespace

AccountantConfig TraceHeader::ToAccountantConfig(double delta) const {
  AccountantConfig config;
  config.noise_std = noise_std;
  config.max_clip = max_clip;
  config.sampling_prob = sampling_prob;
  config.rounding = rounding;
  config.frequency = frequency;
  config.delta = delta;
  return config;
}

int64_t TraceHeader::num_updates() const {
  return (total_steps + frequency - 1) / frequency;
}

TraceHeader MakeTraceHeader(const AccountantConfig& config,
                            int64_t num_examples, int64_t total_steps) {
  TraceHeader header;
  header.num_examples = num_examples;
  header.max_clip = config.max_clip;
  header.noise_std = config.noise_std;
  header.sampling_prob = config.sampling_prob;
  header.frequency = config.frequency;
  header.rounding = config.rounding;
  header.total_steps = total_steps;
  return header;
}

std::string FormatTrace(const TraceHeader& header,
                        std::span<const NormTraceRecord> records) {
  json h = json::object();
  h["format"] = kTraceFormat;
  h["version"] = header.version;
  h["n"] = header.num_examples;
  h["C"] = header.max_clip;
  h["sigma"] = header.noise_std;
  h["p"] = header.sampling_prob;
  h["K"] = header.frequency;
  h["r"] = header.rounding;
  h["steps"] = header.total_steps;
  std::string out = h.dump();
  out.push_back('\n');
  for (const NormTraceRecord& r : records) {
    absl::StrAppend(&out, "{\"step\":", r.step, ",\"id\":", r.example,
                    ",\"norm\":", FormatDouble(r.norm), "}\n");
  }
  return out;
}

absl::Status WriteTrace(const std::string& path, const TraceHeader& header,
                        std::span<const NormTraceRecord> records) {
  return WriteFileAtomically(path, FormatTrace(header, records));
}

absl::StatusOr<Trace> ParseTrace(absl::string_view text,
                                 absl::string_view source) {
  Trace trace;
  TraceHeader& h = trace.header;
  int64_t line = 0;
  int64_t expected = 0;
  int64_t total_records = -1;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == absl::string_view::npos) end = text.size();
    absl::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (raw.find_first_not_of(" \t\r") == absl::string_view::npos) continue;

    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error& e) {
      return LineError(source, line, absl::StrCat("malformed JSON: ", e.what()));
    }
    try {
      if (total_records < 0) {
        if (!j.is_object() || j.value("format", "") != kTraceFormat) {
          return LineError(source, line,
                           "the first line must be an idp-trace header");
        }
        if (!j.contains("version") || !j["version"].is_number_integer()) {
          return LineError(source, line, "header lacks an integer version");
        }
        h.version = j["version"].get<int64_t>();
        if (h.version > kTraceVersion) {
          return LineError(source, line,
                           absl::StrFormat("trace version %d is newer than the "
                                           "supported version %d",
                                           h.version, kTraceVersion));
        }
        if (h.version < 1) {
          return LineError(source, line, "invalid trace version");
        }
        if (absl::Status s = ExpectKeys(
                j, {"format", "version", "n", "C", "sigma", "p", "K", "r", "steps"},
                source, line);
            !s.ok()) {
          return s;
        }
        h.num_examples = j["n"].get<int64_t>();
        h.max_clip = j["C"].get<double>();
        h.noise_std = j["sigma"].get<double>();
        h.sampling_prob = j["p"].get<double>();
        h.frequency = j["K"].get<int64_t>();
        h.rounding = j["r"].get<double>();
        h.total_steps = j["steps"].get<int64_t>();
        if (h.num_examples < 1 || h.frequency < 1 || h.total_steps < 1) {
          return LineError(source, line, "n, K and steps must all be >= 1");
        }
        if (absl::Status s = h.ToAccountantConfig(kDefaultDelta).Validate();
            !s.ok()) {
          return LineError(source, line, s.message());
        }
        total_records = h.num_updates() * h.num_examples;
        trace.norms.assign(h.num_updates(),
                           std::vector<double>(h.num_examples, 0.0));
        continue;
      }
      if (absl::Status s = ExpectKeys(j, {"step", "id", "norm"}, source, line);
          !s.ok()) {
        return s;
      }
      if (!j["step"].is_number_integer() || !j["id"].is_number_integer() ||
          !j["norm"].is_number()) {
        return LineError(source, line, "step and id must be integers, norm a number");
      }
      const int64_t step = j["step"].get<int64_t>();
      const int64_t id = j["id"].get<int64_t>();
      const double norm = j["norm"].get<double>();
      if (expected >= total_records) {
        return LineError(source, line,
                         absl::StrFormat("record beyond the %d declared by the "
                                         "header",
                                         total_records));
      }
      const int64_t want_step = (expected / h.num_examples) * h.frequency;
      const int64_t want_id = expected % h.num_examples;
      if (step != want_step || id != want_id) {
        return LineError(
            source, line,
            absl::StrFormat("expected step %d id %d, found step %d id %d "
                            "(records must cover every example at every "
                            "update step, sorted by step then id)",
                            want_step, want_id, step, id));
      }
      if (!std::isfinite(norm) || norm < 0.0) {
        return LineError(source, line,
                         absl::StrFormat("norm must be finite and >= 0, got %g",
                                         norm));
      }
      trace.norms[expected / h.num_examples][want_id] = norm;
      ++expected;
    } catch (const json::exception& e) {
      return LineError(source, line, e.what());
    }
  }
  if (total_records < 0) {
    return LineError(source, std::max<int64_t>(line, 1), "missing header");
  }
  if (expected != total_records) {
    return LineError(source, line,
                     absl::StrFormat("trace ends after %d of %d records",
                                     expected, total_records));
  }
  return trace;
}

absl::StatusOr<Trace> ReadTrace(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  return ParseTrace(*text, path);
}

absl::StatusOr<IndividualLedger> ReplayTrace(const Trace& trace, double delta) {
  const TraceHeader& h = trace.header;
  absl::StatusOr<IndividualLedger> ledger =
      IndividualLedger::Create(h.ToAccountantConfig(delta), h.num_examples);
  if (!ledger.ok()) return ledger.status();
  for (int64_t t = 0; t < h.total_steps; ++t) {
    if (t % h.frequency == 0) {
      absl::Status s =
          ledger->UpdateAssignments(trace.norms[t / h.frequency], t);
      if (!s.ok()) return s;
    }
    if (absl::Status s = ledger->RecordStep(t); !s.ok()) return s;
  }
  return ledger;
}

}  // namespace indiv_privacy
