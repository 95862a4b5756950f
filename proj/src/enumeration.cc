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

#include "indiv_privacy/enumeration.h"

#include <random>

#include "absl/strings/str_format.h"

namespace indiv_privacy {
namespace {

constexpr int kMaxOutcomes = 8;

// Number of distinct prefixes before mechanism `t`.
int64_t PrefixCount(const ToySpec& spec, size_t t) {
  int64_t count = 1;
  for (size_t s = 0; s < t; ++s) count *= spec.mechanisms[s].num_outcomes;
  return count;
}

}  // namespace

absl::Status ValidateToySpec(const ToySpec& spec) {
  if (spec.mechanisms.empty()) {
    return absl::InvalidArgumentError("Toy spec has no mechanisms.");
  }
  for (size_t t = 0; t < spec.mechanisms.size(); ++t) {
    const ToyMechanism& mech = spec.mechanisms[t];
    if (mech.num_outcomes < 1 || mech.num_outcomes > kMaxOutcomes) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Mechanism %d has %d outcomes; expected 1..%d.", t, mech.num_outcomes,
          kMaxOutcomes));
    }
    const int64_t expected_rows = 2 * PrefixCount(spec, t);
    if (static_cast<int64_t>(mech.rows.size()) != expected_rows) {
      return absl::InvalidArgumentError(
          absl::StrFormat("Mechanism %d has %d rows; expected %d.", t,
                          mech.rows.size(), expected_rows));
    }
    for (size_t r = 0; r < mech.rows.size(); ++r) {
      const auto& row = mech.rows[r];
      if (static_cast<int>(row.size()) != mech.num_outcomes) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "Mechanism %d row %d has the wrong length.", t, r));
      }
      Rational sum = 0;
      for (const Rational& p : row) {
        if (p < 0) {
          return absl::InvalidArgumentError(absl::StrFormat(
              "Mechanism %d row %d has a negative probability.", t, r));
        }
        sum += p;
      }
      if (sum != 1) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "Mechanism %d row %d is not stochastic (sums to %s).", t, r,
            sum.str()));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<double> EnumerateAdaptiveVsFixed(const ToySpec& spec) {
  if (absl::Status s = ValidateToySpec(spec); !s.ok()) return s;
  const size_t steps = spec.mechanisms.size();
  Rational max_diff = 0;

  for (int bit = 0; bit < 2; ++bit) {
    // Joint law of the full adaptive run, built by propagating the running
    // prefix distribution one mechanism at a time.
    std::vector<Rational> full = {Rational(1)};
    for (size_t t = 0; t < steps; ++t) {
      const ToyMechanism& mech = spec.mechanisms[t];
      std::vector<Rational> next(full.size() * mech.num_outcomes);
      for (size_t prefix = 0; prefix < full.size(); ++prefix) {
        const auto& row = mech.rows[prefix * 2 + bit];
        for (int o = 0; o < mech.num_outcomes; ++o) {
          next[prefix * mech.num_outcomes + o] = full[prefix] * row[o];
        }
      }
      full = std::move(next);
    }

    for (size_t t = 1; t <= steps; ++t) {
      // P[A^(t) = theta] by marginalizing the later outcomes of the full run.
      const int64_t prefixes = PrefixCount(spec, t);
      const int64_t suffixes = static_cast<int64_t>(full.size()) / prefixes;
      for (int64_t theta = 0; theta < prefixes; ++theta) {
        Rational adaptive = 0;
        for (int64_t s = 0; s < suffixes; ++s) {
          adaptive += full[theta * suffixes + s];
        }
        // P[A-hat^(t)(theta_1..theta_{t-1}) = theta]: each mechanism is fed
        // the fixed earlier outcomes instead of its own random ones.
        std::vector<int> digits(t);
        int64_t rest = theta;
        for (size_t s = t; s-- > 0;) {
          digits[s] = static_cast<int>(rest % spec.mechanisms[s].num_outcomes);
          rest /= spec.mechanisms[s].num_outcomes;
        }
        Rational fixed = 1;
        int64_t prefix = 0;
        for (size_t s = 0; s < t; ++s) {
          fixed *= spec.mechanisms[s].rows[prefix * 2 + bit][digits[s]];
          prefix = prefix * spec.mechanisms[s].num_outcomes + digits[s];
        }
        Rational diff = adaptive - fixed;
        if (diff < 0) diff = -diff;
        if (diff > max_diff) max_diff = diff;
      }
    }
  }
  return static_cast<double>(max_diff);
}

ToySpec RandomToySpec(uint64_t seed, int steps, int max_outcomes) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> outcomes_dist(2, std::max(2, max_outcomes));
  std::uniform_int_distribution<int> weight_dist(0, 9);
  ToySpec spec;
  int64_t prefixes = 1;
  for (int t = 0; t < steps; ++t) {
    ToyMechanism mech;
    mech.num_outcomes = outcomes_dist(rng);
    for (int64_t r = 0; r < 2 * prefixes; ++r) {
      std::vector<int> weights(mech.num_outcomes);
      int total = 0;
      while (total == 0) {
        total = 0;
        for (int& w : weights) {
          w = weight_dist(rng);
          total += w;
        }
      }
      std::vector<Rational> row;
      for (int w : weights) row.emplace_back(w, total);
      mech.rows.push_back(std::move(row));
    }
    prefixes *= mech.num_outcomes;
    spec.mechanisms.push_back(std::move(mech));
  }
  return spec;
}

}  // namespace indiv_privacy
