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

#include "indiv_privacy/rdp_math.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_format.h"

namespace indiv_privacy {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Largest noise multiplier tried by the calibration search.
constexpr double kCalibrationUpperBound = 1e6;
constexpr int kCalibrationMaxIterations = 200;

// Quadrature tails beyond this many noise standard deviations are dropped.
constexpr double kQuadratureTailSigmas = 20.0;
constexpr double kQuadratureAbsTolerance = 1e-12;

double LogAddExp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

bool IsInteger(double x) { return std::isfinite(x) && std::floor(x) == x; }

// log((1 - q) + q * exp(s)), the log density ratio of the mixture
// (1-q)N(0, m^2) + qN(1, m^2) against N(0, m^2) with s = (2x - 1) / (2 m^2).
double LogMixtureRatio(double q, double s) {
  if (q == 0.0) return 0.0;
  if (q == 1.0) return s;
  if (s < 30.0) return std::log1p(q * std::expm1(s));
  return LogAddExp(std::log1p(-q), std::log(q) + s);
}

// log(e^{a u} - 1 - a (e^u - 1)); the bracket is >= 0 by convexity.
double LogConvexGap(double alpha, double u) {
  if (u == 0.0) return kNegInf;
  const double au = alpha * u;
  if (std::abs(au) < 1e-2) {
    // sum_{k>=2} (alpha^k - alpha) u^k / k!
    double sum = 0.0;
    double alpha_pow = alpha;
    double u_pow_over_fact = u;
    for (int k = 2; k <= 14; ++k) {
      alpha_pow *= alpha;
      u_pow_over_fact *= u / k;
      sum += (alpha_pow - alpha) * u_pow_over_fact;
    }
    return std::log(sum);
  }
  if (au > 30.0) {
    return au + std::log1p(-std::exp(-au) * (1.0 + alpha * std::expm1(u)));
  }
  return std::log(std::expm1(au) - alpha * std::expm1(u));
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Weights of the embedded Gauss rule on the odd-indexed Kronrod nodes.
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

template <typename F>
QuadratureResult GaussKronrod15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

// Bisects until each piece meets its share of the absolute tolerance.
template <typename F>
QuadratureResult AdaptiveGaussKronrod(const F& f, double a, double b,
                                      double tolerance, int depth) {
  QuadratureResult whole = GaussKronrod15(f, a, b);
  if (whole.error <= tolerance || depth == 0) return whole;
  const double mid = 0.5 * (a + b);
  QuadratureResult left =
      AdaptiveGaussKronrod(f, a, mid, 0.5 * tolerance, depth - 1);
  QuadratureResult right =
      AdaptiveGaussKronrod(f, mid, b, 0.5 * tolerance, depth - 1);
  return {left.value + right.value, left.error + right.error};
}

}  // namespace

absl::StatusOr<OrderGrid> OrderGrid::Create(std::vector<double> orders) {
  if (orders.empty()) {
    return absl::InvalidArgumentError("Order grid must be non-empty.");
  }
  for (size_t i = 0; i < orders.size(); ++i) {
    if (!std::isfinite(orders[i]) || orders[i] <= 1.0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("Renyi order must be finite and > 1, got %g.",
                          orders[i]));
    }
    if (i > 0 && orders[i] <= orders[i - 1]) {
      return absl::InvalidArgumentError(
          "Order grid must be strictly increasing.");
    }
  }
  return OrderGrid(std::move(orders));
}

const OrderGrid& OrderGrid::Default() {
  static const OrderGrid* const kGrid = [] {
    std::vector<double> orders;
    for (int a = 2; a <= 64; ++a) orders.push_back(a);
    orders.push_back(128);
    orders.push_back(256);
    return new OrderGrid(std::move(orders));
  }();
  return *kGrid;
}

bool OrderGrid::IsIntegral() const {
  return std::all_of(orders_.begin(), orders_.end(), IsInteger);
}

absl::Status ValidateMechanismParams(const MechanismParams& params) {
  if (!(params.sampling_prob >= 0.0 && params.sampling_prob <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Sampling probability must lie in [0, 1], got %g.",
        params.sampling_prob));
  }
  if (!(params.noise_multiplier > 0.0) ||
      !std::isfinite(params.noise_multiplier)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Noise multiplier must be finite and > 0, got %g.",
        params.noise_multiplier));
  }
  return absl::OkStatus();
}

RdpCurve RdpCurve::Zero(const OrderGrid& grid) {
  return RdpCurve{grid, std::vector<double>(grid.size(), 0.0)};
}

absl::Status CheckRdpCurveInvariants(const RdpCurve& curve) {
  if (curve.values.size() != curve.grid.size()) {
    return absl::InvalidArgumentError("RDP curve and grid lengths differ.");
  }
  for (size_t i = 0; i < curve.values.size(); ++i) {
    const double v = curve.values[i];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("RDP value at order %g is %g.", curve.grid[i], v));
    }
    if (i > 0 && v < curve.values[i - 1] * (1.0 - 1e-12)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "RDP curve decreases between orders %g and %g.", curve.grid[i - 1],
          curve.grid[i]));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<double> GaussianRdp(double noise_multiplier, double alpha) {
  if (!(alpha > 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Renyi order must be > 1, got %g.", alpha));
  }
  if (!(noise_multiplier > 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Noise multiplier must be > 0, got %g.", noise_multiplier));
  }
  return alpha / (2.0 * noise_multiplier * noise_multiplier);
}

absl::StatusOr<RdpCurve> GaussianRdpCurve(double noise_multiplier,
                                          const OrderGrid& grid) {
  RdpCurve curve = RdpCurve::Zero(grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    absl::StatusOr<double> rho = GaussianRdp(noise_multiplier, grid[i]);
    if (!rho.ok()) return rho.status();
    curve.values[i] = *rho;
  }
  return curve;
}

absl::StatusOr<double> SgmRdpInt(const MechanismParams& params,
                                 int64_t alpha) {
  if (absl::Status s = ValidateMechanismParams(params); !s.ok()) return s;
  if (alpha < 2) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Integer Renyi order must be >= 2, got %d.", alpha));
  }
  const double q = params.sampling_prob;
  const double m = params.noise_multiplier;
  if (q == 0.0) return 0.0;
  if (q == 1.0) return static_cast<double>(alpha) / (2.0 * m * m);

  const double a = static_cast<double>(alpha);
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double log_fact_a = std::lgamma(a + 1.0);
  const double inv_two_var = 1.0 / (2.0 * m * m);

  // A - 1 summed over k >= 2; the k = 0 and k = 1 terms cancel the leading 1.
  std::vector<double> terms;
  terms.reserve(alpha - 1);
  double max_term = kNegInf;
  for (int64_t k = 2; k <= alpha; ++k) {
    const double kd = static_cast<double>(k);
    const double log_binom =
        log_fact_a - std::lgamma(kd + 1.0) - std::lgamma(a - kd + 1.0);
    const double x = kd * (kd - 1.0) * inv_two_var;
    const double log_expm1 =
        x > 1.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
    terms.push_back(log_binom + (a - kd) * log_1mq + kd * log_q + log_expm1);
    max_term = std::max(max_term, terms.back());
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  const double log_excess = max_term + std::log(sum);
  const double log_a = log_excess > 0.0
                           ? log_excess + std::log1p(std::exp(-log_excess))
                           : std::log1p(std::exp(log_excess));
  return std::max(0.0, log_a / (a - 1.0));
}

absl::StatusOr<RdpCurve> SgmRdpCurve(const MechanismParams& params,
                                     const OrderGrid& grid) {
  RdpCurve curve = RdpCurve::Zero(grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!IsInteger(grid[i])) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Closed-form subsampled Gaussian RDP needs integer orders, got %g.",
          grid[i]));
    }
    absl::StatusOr<double> rho =
        SgmRdpInt(params, static_cast<int64_t>(grid[i]));
    if (!rho.ok()) return rho.status();
    curve.values[i] = *rho;
  }
  return curve;
}

absl::StatusOr<RdpCurve> Compose(const RdpCurve& a, const RdpCurve& b) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
    return absl::InvalidArgumentError("Cannot compose curves on different grids.");
  }
  RdpCurve out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

RdpCurve Scale(const RdpCurve& curve, double times) {
  RdpCurve out = curve;
  for (double& v : out.values) v *= times;
  return out;
}

absl::StatusOr<DpConversion> RdpToDp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g.", delta));
  }
  if (curve.values.size() != curve.grid.size() || curve.values.empty()) {
    return absl::InvalidArgumentError("Malformed RDP curve.");
  }
  const double log_inv_delta = -std::log(delta);
  DpConversion best{std::numeric_limits<double>::infinity(), 0.0};
  for (size_t i = 0; i < curve.values.size(); ++i) {
    const double alpha = curve.grid[i];
    const double eps = curve.values[i] + log_inv_delta / (alpha - 1.0);
    if (eps < best.epsilon) best = {eps, alpha};
  }
  return best;
}

absl::StatusOr<double> CalibrateNoise(double target_epsilon, double delta,
                                      double sampling_prob, int64_t steps,
                                      const OrderGrid& grid) {
  if (!(target_epsilon > 0.0) || !std::isfinite(target_epsilon)) {
    return absl::InvalidArgumentError("Target epsilon must be finite and > 0.");
  }
  if (steps < 1) return absl::InvalidArgumentError("steps must be >= 1.");
  if (!(sampling_prob > 0.0 && sampling_prob <= 1.0)) {
    return absl::InvalidArgumentError(
        "Calibration needs a sampling probability in (0, 1].");
  }
  auto epsilon_at = [&](double multiplier) -> absl::StatusOr<double> {
    absl::StatusOr<RdpCurve> curve =
        SgmRdpCurve({sampling_prob, multiplier}, grid);
    if (!curve.ok()) return curve.status();
    absl::StatusOr<DpConversion> dp =
        RdpToDp(Scale(*curve, static_cast<double>(steps)), delta);
    if (!dp.ok()) return dp.status();
    return dp->epsilon;
  };

  double hi = kCalibrationUpperBound;
  absl::StatusOr<double> eps_hi = epsilon_at(hi);
  if (!eps_hi.ok()) return eps_hi.status();
  if (*eps_hi > target_epsilon) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "Target epsilon %g is infeasible: even noise multiplier %g gives %g.",
        target_epsilon, hi, *eps_hi));
  }
  double lo = 1.0;
  for (int i = 0;; ++i) {
    absl::StatusOr<double> eps_lo = epsilon_at(lo);
    if (!eps_lo.ok()) return eps_lo.status();
    if (*eps_lo > target_epsilon) break;
    if (*eps_lo >= target_epsilon - kCalibrationTolerance) return lo;
    if (i >= 60) {
      return absl::FailedPreconditionError(
          "Could not bracket the target epsilon from below.");
    }
    hi = lo;
    lo /= 2.0;
  }
  for (int i = 0; i < kCalibrationMaxIterations; ++i) {
    absl::StatusOr<double> eps = epsilon_at(hi);
    if (!eps.ok()) return eps.status();
    if (*eps >= target_epsilon - kCalibrationTolerance) return hi;
    const double mid = std::sqrt(lo * hi);
    absl::StatusOr<double> eps_mid = epsilon_at(mid);
    if (!eps_mid.ok()) return eps_mid.status();
    if (*eps_mid > target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return absl::DeadlineExceededError(absl::StrFormat(
      "Noise calibration did not converge in %d iterations.",
      kCalibrationMaxIterations));
}

absl::StatusOr<double> SgmRdpQuadratureOracle(const MechanismParams& params,
                                              double alpha,
                                              DivergenceDirection direction) {
  if (absl::Status s = ValidateMechanismParams(params); !s.ok()) return s;
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Renyi order must be finite and > 1, got %g.", alpha));
  }
  const double q = params.sampling_prob;
  const double m = params.noise_multiplier;
  if (q == 0.0) return 0.0;

  const double inv_two_var = 1.0 / (2.0 * m * m);
  const double log_norm = std::log(m * std::sqrt(2.0 * std::numbers::pi));
  const bool mixture_first = direction == DivergenceDirection::kMixtureVsBase;

  // Integrand nu(x) * (r^a - 1 - a (r - 1)) with r = dmu/dnu. Its integral is
  // int (dmu/dnu)^a dnu - 1 because E_nu[r] = 1, and it is non-negative, so
  // it can be rescaled by its maximum without cancellation.
  auto log_integrand = [&](double x) {
    const double log_base = -x * x * inv_two_var - log_norm;
    const double lm = LogMixtureRatio(q, (2.0 * x - 1.0) * inv_two_var);
    if (mixture_first) return log_base + LogConvexGap(alpha, lm);
    return log_base + lm + LogConvexGap(alpha, -lm);
  };

  // The mixture-vs-base integrand peaks near x = alpha; the reverse one
  // near x = 1 - alpha when q = 1.
  const double lower = -alpha - kQuadratureTailSigmas * m;
  const double upper = alpha + 1.0 + kQuadratureTailSigmas * m;
  const double panel_width = 0.5 * m;
  const int panels =
      static_cast<int>(std::ceil((upper - lower) / panel_width));

  double log_scale = kNegInf;
  for (int i = 0; i <= 8 * panels; ++i) {
    const double x = lower + (upper - lower) * i / (8.0 * panels);
    log_scale = std::max(log_scale, log_integrand(x));
  }
  if (log_scale == kNegInf) return 0.0;

  auto scaled = [&](double x) {
    const double lf = log_integrand(x);
    return lf == kNegInf ? 0.0 : std::exp(lf - log_scale);
  };
  double integral = 0.0;
  double error = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = lower + (upper - lower) * i / panels;
    const double b = lower + (upper - lower) * (i + 1) / panels;
    QuadratureResult piece = AdaptiveGaussKronrod(
        scaled, a, b, kQuadratureAbsTolerance / panels, /*depth=*/20);
    integral += piece.value;
    error += piece.error;
  }
  if (!(error <= kQuadratureAbsTolerance) || !std::isfinite(integral)) {
    return absl::InternalError(absl::StrFormat(
        "Quadrature error estimate %g exceeds tolerance %g (q=%g, m=%g, "
        "alpha=%g).",
        error, kQuadratureAbsTolerance, q, m, alpha));
  }
  // log(1 + e^{log_scale} * integral)
  const double log_moment =
      log_scale <= 0.0
          ? std::log1p(std::exp(log_scale) * integral)
          : log_scale + std::log(std::exp(-log_scale) + integral);
  return std::max(0.0, log_moment / (alpha - 1.0));
}

}  // namespace indiv_privacy
