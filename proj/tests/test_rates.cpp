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
#include <vector>

#include "lrufilter/rates.hpp"

namespace lrufilter {
namespace {

FilterSpec default_spec() { return FilterSpec::from_band_edges(7, ghz_to_rad(2.7), ghz_to_rad(4.5), 0.1); }

TEST(Ldos, SumRuleFromPolesAndQuadrature) {
  const FilterModel m = synthesize(default_spec());
  EXPECT_NEAR(ldos_integral(m, -1e20, 1e20), 1.0, 1e-3);
  // trapezoid over a wide window plus the Lorentzian-like tails
  const double a = ghz_to_rad(-20.0), b = ghz_to_rad(30.0);
  const auto grid = linspace(a, b, 400001);
  double trap = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    trap += 0.5 * (ldos(m, grid[i]) + ldos(m, grid[i - 1])) * (grid[i] - grid[i - 1]);
  EXPECT_NEAR(trap, ldos_integral(m, a, b), 1e-5);
  EXPECT_GT(trap, 0.99);
}

TEST(Ldos, SingleSiteIsLorentzian) {
  FilterSpec s = default_spec();
  s.order = 1;
  const FilterModel m = synthesize(s);
  const double half = 0.5 * m.kappa_f;
  for (double df : {-2.0, -0.3, 0.0, 0.1, 1.5}) {
    const double w = s.omega0 + ghz_to_rad(df);
    const double d = w - s.omega0;
    EXPECT_NEAR(ldos(m, w), half / std::numbers::pi / (d * d + half * half), 1e-22);
  }
}

TEST(Ldos, ConcentratesOnTheChainModes) {
  const FilterSpec s = default_spec();
  const FilterModel m = synthesize(s);
  const RVector modes = filter_mode_frequencies(m);
  const double pad = ghz_to_rad(0.1);
  EXPECT_GT(ldos_integral(m, modes(0) - pad, modes(modes.size() - 1) + pad), 0.99);
  // stopband suppression: orders of magnitude below the passband level
  EXPECT_LT(ldos(m, ghz_to_rad(5.0)), 1e-3 * ldos(m, ghz_to_rad(3.6)));
  EXPECT_LT(ldos(m, ghz_to_rad(2.2)), 1e-3 * ldos(m, ghz_to_rad(3.6)));
  // weakly damped outermost mode just above the upper edge
  EXPECT_GT(modes(modes.size() - 1), s.upper_edge());
  EXPECT_GT(ldos(m, ghz_to_rad(4.55)), ldos(m, ghz_to_rad(3.6)));
}

TEST(Fgr, MatchesImaginaryPartOfDressedPole) {
  const FilterModel m = synthesize(default_spec());
  for (double f : {4.75, 4.9, 5.2}) {
    const auto eig = diagonalize_transmon(invert_targets(ghz_to_rad(f), ghz_to_rad(-0.325)));
    const double g = ghz_to_rad(0.02);
    const RatePrediction pred = fgr_rates(eig, m, g);
    // qubit + chain, one excitation, non-Hermitian
    CMatrix h = CMatrix::Zero(8, 8);
    h(0, 0) = eig.omega_ge;
    h.bottomRightCorner(7, 7) = damped_chain_matrix(m);
    h(0, 1) = h(1, 0) = g * eig.charge_elements(0, 1);
    Eigen::ComplexEigenSolver<CMatrix> solver(h);
    Eigen::Index k = 0;
    (solver.eigenvectors().row(0).cwiseAbs()).maxCoeff(&k);
    const double pole_rate = -2.0 * solver.eigenvalues()(k).imag();
    EXPECT_NEAR(pred.gamma_eg / pole_rate, 1.0, 0.05) << f;
  }
}

TEST(Fgr, ScalesWithCouplingSquared) {
  const FilterModel m = synthesize(default_spec());
  const auto eig = diagonalize_transmon(invert_targets(ghz_to_rad(4.9), ghz_to_rad(-0.325)));
  const RatePrediction a = fgr_rates(eig, m, ghz_to_rad(0.01));
  const RatePrediction b = fgr_rates(eig, m, ghz_to_rad(0.02));
  EXPECT_NEAR(b.gamma_eg / a.gamma_eg, 4.0, 1e-12);
  EXPECT_NEAR(b.gamma_fe / a.gamma_fe, 4.0, 1e-12);
  EXPECT_NEAR(a.omega_ef - a.omega_ge, eig.alpha, 1e-3);
  EXPECT_FALSE(a.gamma_hf.has_value());
}

TEST(Fgr, CouplingCalibrationHitsTarget) {
  DeviceParams p;
  std::vector<double> grid;
  for (double f : stepped_grid(4.45, 4.97, 0.01)) grid.push_back(ghz_to_rad(f));
  const double g = calibrate_coupling_to_t1f(p, grid, 361e-9);
  double best = 1.0;
  for (double w : grid) {
    const auto eig = diagonalize_transmon(invert_targets(w, p.alpha));
    best = std::min(best, 1.0 / (fgr_rates(eig, synthesize(p.filter), g, w).gamma_fe + 2.0 / p.t1));
  }
  EXPECT_NEAR(best, 361e-9, 1e-12);
}

TEST(Compare, StopbandLifetimesAgreeWithGoldenRule) {
  DeviceParams p;
  CompareOptions opt;
  opt.points = 201;
  const CompareRow row = compare_point(p, ghz_to_rad(5.3), opt);
  ASSERT_TRUE(row.fit_ok) << row.message;
  EXPECT_NEAR(row.full_t1f / row.fgr_t1f, 1.0, 0.1);
  EXPECT_NEAR(row.full_t1e / row.fgr_t1e, 1.0, 0.1);
  EXPECT_GT(row.full_t1e, 50e-6);
}

}  // namespace
}  // namespace lrufilter
