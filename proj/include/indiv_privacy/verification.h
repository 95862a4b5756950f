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


// Oracle suites that cross-check the accounting math end to end.

#ifndef INDIV_PRIVACY_VERIFICATION_H_
#define INDIV_PRIVACY_VERIFICATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace indiv_privacy {

struct SuiteResult {
  std::string name;
  bool passed = false;
  int64_t cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string detail;  // worst case, for humans
};

// Closed-form subsampled Gaussian RDP against quadrature over
// q in {0.001, 0.01, 0.1, 0.5}, sigma' in {0.5, 1, 2, 4}, alpha in 2..32.
// Error is relative; tolerance 1e-6.
absl::StatusOr<SuiteResult> RunQuadratureSuite();

// Adaptive versus fixed-prefix composition on `specs` random toy processes of
// three steps and at most eight outcomes. Tolerance 1e-12.
absl::StatusOr<SuiteResult> RunEnumerationSuite(uint64_t seed, int specs = 10);

struct BucketedSuiteOptions {
  uint64_t seed = 0;
  int64_t num_examples = 200;
  int64_t epochs = 4;
  // Scales one cached bucket curve before reporting. Negative control only.
  bool corrupt_cache = false;
};

// Mini-simulation with individual clipping: exact per-step re-accounting of
// the realized sensitivities against the ledger. Absolute epsilon error,
// tolerance 1e-12.
absl::StatusOr<SuiteResult> RunBucketedSuite(const BucketedSuiteOptions& options);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_VERIFICATION_H_
