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


// Gradient-norm trace files (JSON Lines). The first line is a header
//
//   {"format":"idp-trace","version":1,"n":...,"C":...,"sigma":...,"p":...,
//    "K":...,"r":...,"steps":...}
//
// followed by one {"step":s,"id":i,"norm":x} object per example at every
// update step s = 0, K, 2K, ... < steps, sorted by (step, id). Only norms are
// stored; gradients never leave the trainer.

#ifndef INDIV_PRIVACY_TRACE_IO_H_
#define INDIV_PRIVACY_TRACE_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "indiv_privacy/accountant.h"
#include "indiv_privacy/dpsgd_sim.h"

namespace indiv_privacy {

inline constexpr int64_t kTraceVersion = 1;

struct TraceHeader {
  int64_t version = kTraceVersion;
  int64_t num_examples = 0;
  double max_clip = 0.0;
  double noise_std = 0.0;
  double sampling_prob = 0.0;
  int64_t frequency = 1;
  double rounding = 0.0;
  int64_t total_steps = 0;

  AccountantConfig ToAccountantConfig(double delta) const;
  // Number of update steps, ceil(total_steps / K).
  int64_t num_updates() const;
};

TraceHeader MakeTraceHeader(const AccountantConfig& config,
                            int64_t num_examples, int64_t total_steps);

struct Trace {
  TraceHeader header;
  // Row u holds every example's norm at step u * K.
  std::vector<std::vector<double>> norms;
};

std::string FormatTrace(const TraceHeader& header,
                        std::span<const NormTraceRecord> records);
absl::Status WriteTrace(const std::string& path, const TraceHeader& header,
                        std::span<const NormTraceRecord> records);

// Errors name the offending line of `source`.
absl::StatusOr<Trace> ParseTrace(absl::string_view text,
                                 absl::string_view source = "trace");
absl::StatusOr<Trace> ReadTrace(const std::string& path);

// Replays UpdateAssignments / RecordStep exactly as the trainer did.
absl::StatusOr<IndividualLedger> ReplayTrace(const Trace& trace, double delta);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_TRACE_IO_H_
