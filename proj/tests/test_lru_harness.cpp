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
#include <cstdlib>
#include <vector>

#include "lrufilter/lru_harness.hpp"

namespace lrufilter {
namespace {

constexpr double kGammaL = 1.0 / 67.9;
constexpr double kGammaS = 1.0 / 54.9;

LruConfig ideal_readout(LruConfig c = {}) {
  c.sigma_iq = 0.0;
  c.readout_decay = false;
  return c;
}

TEST(Mitigation, IdentityAndExactInverse) {
  const std::vector<std::array<double, 3>> f{{0.5, 0.4, 0.1}, {0.2, 0.2, 0.6}};
  const MitigationResult id = mitigate(f, Eigen::Matrix3d::Identity());
  for (std::size_t m = 0; m < f.size(); ++m)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(id.mitigated[m][k], f[m][k], 1e-15);
  EXPECT_NEAR(id.condition_number, 1.0, 1e-12);

  Eigen::Matrix3d a;
  a << 0.9, 0.08, 0.02, 0.1, 0.8, 0.1, 0.03, 0.12, 0.85;
  const Eigen::Vector3d p(0.3, 0.45, 0.25);
  const Eigen::Vector3d observed = a.transpose() * p;
  const MitigationResult r = mitigate({{observed(0), observed(1), observed(2)}}, a);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.mitigated[0][static_cast<std::size_t>(k)], p(k), 1e-12);
  EXPECT_FALSE(r.ill_conditioned);
}

TEST(Mitigation, SimplexProjection) {
  const auto in = project_to_simplex({0.2, 0.3, 0.5});
  EXPECT_NEAR(in[0], 0.2, 1e-15);
  const auto out = project_to_simplex({1.2, -0.1, -0.1});
  EXPECT_NEAR(out[0], 1.0, 1e-15);
  EXPECT_EQ(out[1], 0.0);
  const auto mixed = project_to_simplex({0.7, 0.5, -0.2});
  EXPECT_NEAR(mixed[0] + mixed[1] + mixed[2], 1.0, 1e-15);
  EXPECT_NEAR(mixed[0] - mixed[1], 0.2, 1e-15);
  Eigen::Matrix3d singular = Eigen::Matrix3d::Constant(1.0 / 3.0);
  EXPECT_THROW(mitigate({{0.3, 0.3, 0.4}}, singular), NumericError);
}

TEST(Cycle, SeepageProbabilityFromLifetime) {
  LruConfig c;
  c.t1f = 361e-9;
  EXPECT_NEAR(c.seep_probability(), 1.0 - std::exp(-314.2 / 361.0), 1e-15);
  EXPECT_NEAR(c.seep_probability(), 0.58, 0.005);
  LruConfig longer = c;
  longer.t_cycle *= 2.0;
  EXPECT_GT(longer.seep_probability(), c.seep_probability());
  EXPECT_EQ(LruConfig{}.seep_probability(), 0.0);
}

TEST(Cycle, ExpectedLeakageIsMonotoneAndNearTheContinuousModel) {
  const LruConfig c = config_for_rates(LruConfig{}, kGammaL, kGammaS);
  const auto p = expected_leakage(c);
  for (std::size_t m = 1; m < p.size(); ++m) EXPECT_GE(p[m], p[m - 1]);
  const PleakFit fit = fit_pleak(measurement_index(c.n_meas), p);
  EXPECT_NEAR(fit.gamma_l / kGammaL, 1.0, 0.01);
  EXPECT_NEAR(fit.gamma_s / kGammaS, 1.0, 0.01);
  EXPECT_NEAR(fit.gamma_l + fit.gamma_s, kGammaL + kGammaS, 1e-3 * (kGammaL + kGammaS));
}

TEST(Shots, SeededRunsAreReproducibleAcrossWorkerCounts) {
  LruConfig c = config_for_rates(LruConfig{}, kGammaL, kGammaS);
  c.n_shots = 800;
  c.calib_shots = 800;
  setenv("LRUFILTER_WORKERS", "1", 1);
  const LruRecord a = simulate_shots(c);
  setenv("LRUFILTER_WORKERS", "4", 1);
  const LruRecord b = simulate_shots(c);
  unsetenv("LRUFILTER_WORKERS");
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.p_leak_mitigated, b.p_leak_mitigated);
  EXPECT_EQ(a.fit.gamma_l, b.fit.gamma_l);
  c.seed = 2;
  EXPECT_NE(simulate_shots(c).assignments, a.assignments);
}

TEST(Shots, NoLeakageGivesEmptyLeakageSeries) {
  LruConfig c = ideal_readout();
  c.n_shots = 2000;
  c.t1f = 361e-9;
  const LruRecord r = simulate_shots(c);
  for (double p : r.p_leak_mitigated) EXPECT_EQ(p, 0.0);
  EXPECT_FALSE(r.fit.identifiable);
}

TEST(Shots, InfiniteLifetimeGivesNoSeepage) {
  LruConfig c = ideal_readout(config_for_rates(LruConfig{}, kGammaL, 0.0));
  c.n_shots = 3000;
  const LruRecord r = simulate_shots(c);
  EXPECT_NEAR(r.fit.gamma_s, 0.0, 3.0 * std::sqrt(r.fit.covariance(1, 1)) + 1e-4);
  EXPECT_NEAR(r.fit.gamma_l / kGammaL, 1.0, 0.05);
}

TEST(Shots, LargeRunsConvergeToInjectedRates) {
  LruConfig c = ideal_readout(config_for_rates(LruConfig{}, kGammaL, kGammaS));
  c.n_shots = 50000;
  const LruRecord r = simulate_shots(c);
  // the noiseless recursion carries the small discrete-cycle bias of the fit;
  // shot noise across seeds is about 1.5% on gamma_l and 3% on gamma_s here
  const PleakFit exact = fit_pleak(measurement_index(c.n_meas), expected_leakage(c));
  EXPECT_NEAR(exact.gamma_l / kGammaL, 1.0, 0.015);
  EXPECT_NEAR(exact.gamma_s / kGammaS, 1.0, 0.015);
  EXPECT_NEAR(r.fit.gamma_l / exact.gamma_l, 1.0, 0.045);
  EXPECT_NEAR(r.fit.gamma_s / exact.gamma_s, 1.0, 0.09);
  EXPECT_EQ(r.p_leak_raw, r.p_leak_truth);
}

TEST(Shots, MitigationMovesTowardTruth) {
  LruConfig c = config_for_rates(LruConfig{}, kGammaL, kGammaS);
  c.sigma_iq = sigma_for_confusion(2.0, 0.05);
  c.readout_decay = false;
  const LruRecord r = simulate_shots(c);
  EXPECT_NEAR(r.assignment_matrix(0, 1) + r.assignment_matrix(0, 2), 0.1, 0.015);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.assignment_matrix.row(k).sum(), 1.0, 1e-12);
  double raw = 0.0, mit = 0.0;
  for (std::size_t m = 0; m < r.p_leak_truth.size(); ++m) {
    raw += std::abs(r.p_leak_raw[m] - r.p_leak_truth[m]);
    mit += std::abs(r.p_leak_mitigated[m] - r.p_leak_truth[m]);
  }
  EXPECT_LE(mit, raw);
}

TEST(Sweep, SeepagePeaksWhereLifetimeIsShortest) {
  LruConfig c = config_for_rates(LruConfig{}, kGammaL, 0.0);
  c.n_shots = 2000;
  c.calib_shots = 2000;
  const std::vector<double> f{4.6, 4.7, 4.8};
  const std::vector<double> t1f{2e-6, 361e-9, 2e-6};
  const auto rows = sweep_seepage_vs_frequency(c, f, t1f, 5);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(rows[1].gamma_s, rows[0].gamma_s);
  EXPECT_GT(rows[1].gamma_s, rows[2].gamma_s);
  EXPECT_THROW(sweep_seepage_vs_frequency(c, f, {1.0}, 5), ConfigError);
}

}  // namespace
}  // namespace lrufilter
