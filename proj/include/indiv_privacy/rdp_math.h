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

// Renyi-DP curves for the Gaussian and the Poisson-subsampled Gaussian
// mechanism, their composition, conversion to (epsilon, delta) and noise
// calibration. Everything here is pure and safe to call concurrently.

#ifndef INDIV_PRIVACY_RDP_MATH_H_
#define INDIV_PRIVACY_RDP_MATH_H_

#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace indiv_privacy {

// Default delta used by every report and conversion unless overridden.
inline constexpr double kDefaultDelta = 1e-5;

// A non-empty, strictly increasing list of Renyi orders, all > 1.
class OrderGrid {
 public:
  static absl::StatusOr<OrderGrid> Create(std::vector<double> orders);

  // {2, 3, ..., 64} U {128, 256}.
  static const OrderGrid& Default();

  const std::vector<double>& orders() const { return orders_; }
  size_t size() const { return orders_.size(); }
  double operator[](size_t i) const { return orders_[i]; }
  double max_order() const { return orders_.back(); }

  // True when every order is an integer (required by the closed form).
  bool IsIntegral() const;

  friend bool operator==(const OrderGrid& a, const OrderGrid& b) {
    return a.orders_ == b.orders_;
  }

 private:
  explicit OrderGrid(std::vector<double> orders) : orders_(std::move(orders)) {}
  std::vector<double> orders_;
};

struct MechanismParams {
  double sampling_prob = 1.0;     // q in [0, 1]
  double noise_multiplier = 1.0;  // noise std over sensitivity, > 0
};

absl::Status ValidateMechanismParams(const MechanismParams& params);

// RDP values aligned with a grid. Values are non-negative and non-decreasing
// in the order.
struct RdpCurve {
  OrderGrid grid = OrderGrid::Default();
  std::vector<double> values;

  static RdpCurve Zero(const OrderGrid& grid);
};

// Checks length, non-negativity and order monotonicity.
absl::Status CheckRdpCurveInvariants(const RdpCurve& curve);

// alpha / (2 * noise_multiplier^2).
absl::StatusOr<double> GaussianRdp(double noise_multiplier, double alpha);

// Gaussian RDP over every order of `grid`.
absl::StatusOr<RdpCurve> GaussianRdpCurve(double noise_multiplier,
                                          const OrderGrid& grid);

// RDP of the Poisson-subsampled Gaussian mechanism at an integer order,
// D_alpha(mixture || base), from the binomial expansion
//   A = sum_k C(alpha,k) (1-q)^(alpha-k) q^k exp(k(k-1) / (2 m^2))
// evaluated entirely in log space.
absl::StatusOr<double> SgmRdpInt(const MechanismParams& params, int64_t alpha);

// SgmRdpInt over the grid. Every order must be an integer >= 2.
absl::StatusOr<RdpCurve> SgmRdpCurve(const MechanismParams& params,
                                     const OrderGrid& grid);

// Pointwise sum. Fails on mismatched grids.
absl::StatusOr<RdpCurve> Compose(const RdpCurve& a, const RdpCurve& b);

// `times` copies of `curve` composed.
RdpCurve Scale(const RdpCurve& curve, double times);

struct DpConversion {
  double epsilon = 0.0;
  double best_order = 0.0;
};

// epsilon = min_alpha rho_alpha + log(1/delta) / (alpha - 1). Ties resolve to
// the smallest order.
absl::StatusOr<DpConversion> RdpToDp(const RdpCurve& curve, double delta);

inline constexpr double kCalibrationTolerance = 1e-3;

// Smallest-ish noise multiplier whose composed subsampled-Gaussian guarantee
// over `steps` lands in [target - 1e-3, target].
absl::StatusOr<double> CalibrateNoise(double target_epsilon, double delta,
                                      double sampling_prob, int64_t steps,
                                      const OrderGrid& grid);

enum class DivergenceDirection {
  kMixtureVsBase,  // D_alpha((1-q)N(0) + qN(1) || N(0))
  kBaseVsMixture,  // D_alpha(N(0) || (1-q)N(0) + qN(1))
};

// Independent numerical evaluation of the subsampled Gaussian divergence by
// one-dimensional adaptive Gauss-Kronrod quadrature. Works for any real
// order > 1; used as a test oracle for SgmRdpInt.
absl::StatusOr<double> SgmRdpQuadratureOracle(const MechanismParams& params,
                                              double alpha,
                                              DivergenceDirection direction);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_RDP_MATH_H_
