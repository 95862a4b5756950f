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

#include <cmath>
#include <limits>
#include <vector>

#include "test_util.h"

namespace indiv_privacy {
namespace {

using ::indiv_privacy::testing::StatusIs;
using ::testing::DoubleNear;
using ::testing::HasSubstr;

// Direct evaluation of the binomial expansion in long double, without any
// log-space tricks. Only usable where the terms stay representable.
double DirectSgmRdp(double q, double m, int alpha) {
  long double sum = 0.0L;
  long double binom = 1.0L;
  for (int k = 0; k <= alpha; ++k) {
    if (k > 0) binom = binom * (alpha - k + 1) / k;
    sum += binom * std::pow(1.0L - q, alpha - k) * std::pow((long double)q, k) *
           std::exp((long double)k * (k - 1) / (2.0L * m * m));
  }
  return static_cast<double>(std::log(sum) / (alpha - 1));
}

TEST(OrderGridTest, DefaultGrid) {
  const OrderGrid& grid = OrderGrid::Default();
  EXPECT_EQ(grid.size(), 65u);
  EXPECT_EQ(grid[0], 2.0);
  EXPECT_EQ(grid[62], 64.0);
  EXPECT_EQ(grid.max_order(), 256.0);
  EXPECT_TRUE(grid.IsIntegral());
}

TEST(OrderGridTest, RejectsBadOrders) {
  EXPECT_THAT(OrderGrid::Create({}), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(OrderGrid::Create({1.0, 2.0}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(OrderGrid::Create({3.0, 2.0}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(OrderGrid::Create({2.0, 2.0}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  ASSERT_OK_AND_ASSIGN(OrderGrid real, OrderGrid::Create({1.5, 2.0}));
  EXPECT_FALSE(real.IsIntegral());
}

TEST(GaussianRdpTest, ClosedForm) {
  ASSERT_OK_AND_ASSIGN(double rho, GaussianRdp(2.0, 8.0));
  EXPECT_DOUBLE_EQ(rho, 1.0);
  EXPECT_THAT(GaussianRdp(0.0, 2.0), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(GaussianRdp(1.0, 1.0), StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(SgmRdpTest, OrderTwoHasClosedForm) {
  // At alpha = 2 the expansion collapses to log(1 + q^2 (e^{1/m^2} - 1)).
  for (double q : {0.001, 0.01, 0.3, 0.9}) {
    for (double m : {0.5, 1.0, 3.0}) {
      ASSERT_OK_AND_ASSIGN(double rho, SgmRdpInt({q, m}, 2));
      const double expected = std::log1p(q * q * std::expm1(1.0 / (m * m)));
      EXPECT_NEAR(rho, expected, 1e-14 * expected) << q << " " << m;
    }
  }
  ASSERT_OK_AND_ASSIGN(double rho, SgmRdpInt({0.01, 1.0}, 2));
  EXPECT_NEAR(rho, 1.718134221e-4, 1e-13);
}

TEST(SgmRdpTest, MatchesDirectSummation) {
  for (double q : {0.01, 0.1, 0.5}) {
    for (double m : {1.0, 2.0, 4.0}) {
      for (int alpha : {2, 3, 5, 8, 16, 24}) {
        ASSERT_OK_AND_ASSIGN(double rho, SgmRdpInt({q, m}, alpha));
        EXPECT_NEAR(rho, DirectSgmRdp(q, m, alpha), 1e-10 * std::abs(rho) + 1e-18)
            << "q=" << q << " m=" << m << " alpha=" << alpha;
      }
    }
  }
}

TEST(SgmRdpTest, MatchesQuadratureOracle) {
  for (double q : {0.001, 0.1, 0.5}) {
    for (double m : {0.5, 2.0}) {
      for (int alpha : {2, 7, 32}) {
        ASSERT_OK_AND_ASSIGN(double closed, SgmRdpInt({q, m}, alpha));
        ASSERT_OK_AND_ASSIGN(
            double numeric,
            SgmRdpQuadratureOracle({q, m}, alpha,
                                   DivergenceDirection::kMixtureVsBase));
        EXPECT_NEAR(closed, numeric, 1e-6 * numeric);
      }
    }
  }
}

TEST(SgmRdpTest, MixtureDirectionDominates) {
  for (double q : {0.01, 0.2}) {
    for (double alpha : {2.0, 4.5, 10.0}) {
      ASSERT_OK_AND_ASSIGN(
          double forward,
          SgmRdpQuadratureOracle({q, 1.0}, alpha,
                                 DivergenceDirection::kMixtureVsBase));
      ASSERT_OK_AND_ASSIGN(
          double backward,
          SgmRdpQuadratureOracle({q, 1.0}, alpha,
                                 DivergenceDirection::kBaseVsMixture));
      EXPECT_GE(forward, backward);
    }
  }
}

TEST(SgmRdpTest, Limits) {
  ASSERT_OK_AND_ASSIGN(double zero, SgmRdpInt({0.0, 1.0}, 10));
  EXPECT_EQ(zero, 0.0);
  ASSERT_OK_AND_ASSIGN(double full, SgmRdpInt({1.0, 2.0}, 10));
  EXPECT_DOUBLE_EQ(full, 10.0 / 8.0);
}

TEST(SgmRdpTest, Monotone) {
  double previous = 0.0;
  for (int alpha = 2; alpha <= 64; ++alpha) {
    ASSERT_OK_AND_ASSIGN(double rho, SgmRdpInt({0.05, 1.0}, alpha));
    EXPECT_GE(rho, previous);
    previous = rho;
  }
  ASSERT_OK_AND_ASSIGN(double small_q, SgmRdpInt({0.01, 1.0}, 8));
  ASSERT_OK_AND_ASSIGN(double big_q, SgmRdpInt({0.02, 1.0}, 8));
  EXPECT_LT(small_q, big_q);
  ASSERT_OK_AND_ASSIGN(double more_noise, SgmRdpInt({0.01, 2.0}, 8));
  EXPECT_LT(more_noise, small_q);
}

TEST(SgmRdpTest, StableForLargeOrdersAndSmallNoise) {
  ASSERT_OK_AND_ASSIGN(RdpCurve curve, SgmRdpCurve({0.05, 0.3}, OrderGrid::Default()));
  EXPECT_OK(CheckRdpCurveInvariants(curve));
  for (double v : curve.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(SgmRdpTest, RejectsBadParameters) {
  EXPECT_THAT(SgmRdpInt({1.5, 1.0}, 2), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(SgmRdpInt({0.1, 0.0}, 2), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(SgmRdpInt({0.1, 1.0}, 1), StatusIs(absl::StatusCode::kInvalidArgument));
  ASSERT_OK_AND_ASSIGN(OrderGrid real, OrderGrid::Create({1.5, 2.0}));
  EXPECT_THAT(SgmRdpCurve({0.1, 1.0}, real),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(ComposeTest, AddsPointwiseAndChecksGrids) {
  ASSERT_OK_AND_ASSIGN(RdpCurve a, GaussianRdpCurve(1.0, OrderGrid::Default()));
  ASSERT_OK_AND_ASSIGN(RdpCurve b, GaussianRdpCurve(2.0, OrderGrid::Default()));
  ASSERT_OK_AND_ASSIGN(RdpCurve sum, Compose(a, b));
  for (size_t i = 0; i < sum.values.size(); ++i) {
    EXPECT_DOUBLE_EQ(sum.values[i], a.values[i] + b.values[i]);
  }
  const RdpCurve tripled = Scale(a, 3.0);
  EXPECT_DOUBLE_EQ(tripled.values[0], 3.0 * a.values[0]);

  ASSERT_OK_AND_ASSIGN(OrderGrid other, OrderGrid::Create({2.0, 3.0}));
  ASSERT_OK_AND_ASSIGN(RdpCurve c, GaussianRdpCurve(1.0, other));
  EXPECT_THAT(Compose(a, c), StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(RdpToDpTest, MatchesBruteForceMinimum) {
  ASSERT_OK_AND_ASSIGN(RdpCurve curve, GaussianRdpCurve(3.0, OrderGrid::Default()));
  const double delta = 1e-5;
  double best = std::numeric_limits<double>::infinity();
  double best_order = 0.0;
  for (size_t i = 0; i < curve.grid.size(); ++i) {
    const double a = curve.grid[i];
    const double eps = a / 18.0 + std::log(1.0 / delta) / (a - 1.0);
    if (eps < best) {
      best = eps;
      best_order = a;
    }
  }
  ASSERT_OK_AND_ASSIGN(DpConversion dp, RdpToDp(curve, delta));
  EXPECT_NEAR(dp.epsilon, best, 1e-12);
  EXPECT_EQ(dp.best_order, best_order);
}

TEST(RdpToDpTest, TiesGoToSmallestOrder) {
  ASSERT_OK_AND_ASSIGN(OrderGrid grid, OrderGrid::Create({2.0, 3.0}));
  // rho_2 + L and rho_3 + L/2 are equal when rho_2 = rho_3 - L/2.
  const double log_inv_delta = std::log(1e3);
  RdpCurve curve{grid, {1.0, 1.0 + log_inv_delta / 2.0}};
  ASSERT_OK_AND_ASSIGN(DpConversion dp, RdpToDp(curve, 1e-3));
  EXPECT_EQ(dp.best_order, 2.0);
}

TEST(RdpToDpTest, RejectsBadDelta) {
  const RdpCurve zero = RdpCurve::Zero(OrderGrid::Default());
  EXPECT_THAT(RdpToDp(zero, 0.0), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(RdpToDp(zero, 1.0), StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(CalibrateNoiseTest, RoundTrip) {
  const double q = 256.0 / 60000.0;
  for (double target : {1.0, 3.0, 8.0}) {
    ASSERT_OK_AND_ASSIGN(double m,
                         CalibrateNoise(target, 1e-5, q, 2000, OrderGrid::Default()));
    ASSERT_OK_AND_ASSIGN(RdpCurve curve, SgmRdpCurve({q, m}, OrderGrid::Default()));
    ASSERT_OK_AND_ASSIGN(DpConversion dp, RdpToDp(Scale(curve, 2000), 1e-5));
    EXPECT_LE(dp.epsilon, target);
    EXPECT_THAT(dp.epsilon, DoubleNear(target, kCalibrationTolerance));
  }
}

TEST(CalibrateNoiseTest, MoreStepsNeedMoreNoise) {
  ASSERT_OK_AND_ASSIGN(double few, CalibrateNoise(2.0, 1e-5, 0.01, 100,
                                                  OrderGrid::Default()));
  ASSERT_OK_AND_ASSIGN(double many, CalibrateNoise(2.0, 1e-5, 0.01, 10000,
                                                   OrderGrid::Default()));
  EXPECT_LT(few, many);
}

TEST(CalibrateNoiseTest, InfeasibleTarget) {
  // With alpha <= 256 the conversion term alone exceeds 0.04 at delta 1e-5.
  EXPECT_THAT(CalibrateNoise(0.01, 1e-5, 1.0, 1, OrderGrid::Default()),
              StatusIs(absl::StatusCode::kFailedPrecondition,
                       HasSubstr("infeasible")));
  EXPECT_THAT(CalibrateNoise(-1.0, 1e-5, 0.1, 1, OrderGrid::Default()),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

}  // namespace
}  // namespace indiv_privacy
