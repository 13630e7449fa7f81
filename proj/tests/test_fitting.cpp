// Copyright 2026 The lrufilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lrufilter/fitting.hpp"

namespace lrufilter {
namespace {

TEST(ExpDecay, RecoversLifetimeWithOffset) {
  const auto t = linspace(0.0, 400e-6, 400);
  std::vector<double> y;
  for (double ti : t) y.push_back(0.93 * std::exp(-ti / 100e-6) + 0.02);
  const DecayFit fit = fit_exp_decay(t, y);
  EXPECT_NEAR(fit.tau, 100e-6, 100e-6 * 1e-3);
  EXPECT_NEAR(fit.amplitude, 0.93, 1e-6);
  EXPECT_NEAR(fit.offset, 0.02, 1e-6);
  EXPECT_TRUE(fit.report.converged);
}

TEST(ExpDecay, RecoversLifetimeUnderNoiseWithinErrorBars) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 2e-3);
  const auto t = linspace(0.0, 50e-9, 300);
  std::vector<double> y;
  for (double ti : t) y.push_back(std::exp(-ti / 9.89e-9) + noise(rng));
  const DecayFit fit = fit_exp_decay(t, y);
  EXPECT_NEAR(fit.tau, 9.89e-9, 4.0 * fit.tau_stderr);
  EXPECT_GT(fit.tau_stderr, 0.0);
  EXPECT_LT(fit.tau_stderr, 0.02 * fit.tau);
}

TEST(ExpDecay, WithoutOffsetAndFailureModes) {
  const auto t = linspace(0.0, 3.0, 50);
  std::vector<double> y;
  for (double ti : t) y.push_back(2.0 * std::exp(-ti / 0.7));
  EXPECT_NEAR(fit_exp_decay(t, y, false).tau, 0.7, 1e-9);
  EXPECT_THROW(fit_exp_decay({0.0, 1.0}, {1.0, 0.5}), FitError);
  EXPECT_THROW(fit_exp_decay(t, std::vector<double>(49, 1.0)), FitError);
  std::vector<double> rising;
  for (double ti : t) rising.push_back(std::exp(ti));
  EXPECT_THROW(fit_exp_decay(t, rising, false), FitError);
}

TEST(Pleak, ExactCurveRecoversRates) {
  const double gl = 1.0 / 67.9;
  const double gs = 1.0 / 54.9;
  std::vector<double> m, p;
  for (int k = 1; k <= 60; ++k) {
    m.push_back(k);
    const double total = gl + gs;
    p.push_back(gl / total * (1.0 - std::exp(-total * k)));
  }
  const PleakFit fit = fit_pleak(m, p);
  EXPECT_NEAR(fit.gamma_l / gl, 1.0, 1e-6);
  EXPECT_NEAR(fit.gamma_s / gs, 1.0, 1e-6);
  EXPECT_TRUE(fit.identifiable);
  EXPECT_NEAR(pleak_model(fit.gamma_l, fit.gamma_s, 1e9), gl / (gl + gs), 1e-6);
}

TEST(Pleak, ZeroSeepageIsConsistentWithZero) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 1e-3);
  std::vector<double> m, p;
  for (int k = 1; k <= 60; ++k) {
    m.push_back(k);
    p.push_back(1.0 - std::exp(-0.02 * k) + noise(rng));
  }
  const PleakFit fit = fit_pleak(m, p);
  EXPECT_NEAR(fit.gamma_l, 0.02, 1e-3);
  EXPECT_LE(fit.gamma_s, 3.0 * std::sqrt(fit.covariance(1, 1)) + 1e-9);
}

TEST(Pleak, DegenerateSeriesAreFlagged) {
  std::vector<double> m, flat, zero;
  for (int k = 1; k <= 60; ++k) {
    m.push_back(k);
    flat.push_back(0.3);
    zero.push_back(0.0);
  }
  const PleakFit c = fit_pleak(m, flat);
  EXPECT_FALSE(c.identifiable);
  EXPECT_FALSE(c.note.empty());
  const PleakFit z = fit_pleak(m, zero);
  EXPECT_FALSE(z.identifiable);
  EXPECT_EQ(z.gamma_l, 0.0);
  EXPECT_THROW(fit_pleak({1, 2, 3}, {0.1, 0.2, 0.3}), FitError);
}

TEST(LeastSquares, CovarianceMatchesLinearRegression) {
  // y = a + b x with known noise: LM covariance must equal the OLS formula.
  std::vector<double> xs{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<double> ys{0.1, 1.2, 1.9, 3.05, 4.2, 4.9, 6.1, 7.0};
  const detail::ResidualFn fn = [&](const RVector& p, RVector& r) {
    for (std::size_t i = 0; i < xs.size(); ++i) r(static_cast<Eigen::Index>(i)) = p(0) + p(1) * xs[i] - ys[i];
  };
  RVector p = RVector::Zero(2);
  ASSERT_TRUE(detail::least_squares(fn, p, 8));
  RMatrix a(8, 2);
  RVector b(8);
  for (int i = 0; i < 8; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = xs[static_cast<std::size_t>(i)];
    b(i) = ys[static_cast<std::size_t>(i)];
  }
  const RVector ols = a.colPivHouseholderQr().solve(b);
  EXPECT_NEAR(p(0), ols(0), 1e-9);
  EXPECT_NEAR(p(1), ols(1), 1e-9);
  RVector r(8);
  fn(p, r);
  bool ok = false;
  const RMatrix cov = detail::covariance_from_jacobian(detail::numeric_jacobian(fn, p, 8), r.squaredNorm(), ok);
  const RMatrix expected = r.squaredNorm() / 6.0 * (a.transpose() * a).inverse();
  EXPECT_TRUE(ok);
  EXPECT_LT((cov - expected).cwiseAbs().maxCoeff(), 1e-8 * expected.cwiseAbs().maxCoeff());
}

}  // namespace
}  // namespace lrufilter
