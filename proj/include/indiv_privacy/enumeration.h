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

// Exhaustive check, on small finite mechanisms, that an adaptive composition
// and the composition with its earlier outcomes pinned to a fixed prefix
// assign the same probability to every trajectory extending that prefix.
// This is the fact that lets per-step RDP computed along one realized
// training trajectory compose like constants.

#ifndef INDIV_PRIVACY_ENUMERATION_H_
#define INDIV_PRIVACY_ENUMERATION_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "boost/multiprecision/cpp_int.hpp"

namespace indiv_privacy {

using Rational = boost::multiprecision::cpp_rational;

// One step of an adaptive process. `rows[prefix * 2 + bit]` is the outcome
// distribution given the earlier outcomes (mixed-radix index, first outcome
// most significant) and the one-bit dataset difference.
struct ToyMechanism {
  int num_outcomes = 2;
  std::vector<std::vector<Rational>> rows;
};

struct ToySpec {
  std::vector<ToyMechanism> mechanisms;
};

// Rejects malformed tables and rows that are not probability distributions.
absl::Status ValidateToySpec(const ToySpec& spec);

// Max |P[adaptive = theta] - P[fixed-prefix = theta]| over every step t, every
// trajectory theta of length t and both datasets. Exact arithmetic, so a sound
// spec gives 0.
absl::StatusOr<double> EnumerateAdaptiveVsFixed(const ToySpec& spec);

// Random spec with `steps` mechanisms of 2..max_outcomes outcomes whose
// probabilities are small-denominator rationals depending on the prefix and
// the dataset bit.
ToySpec RandomToySpec(uint64_t seed, int steps, int max_outcomes);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_ENUMERATION_H_
