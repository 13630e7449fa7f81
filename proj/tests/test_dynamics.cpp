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

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

#include "lrufilter/device.hpp"
#include "lrufilter/dynamics.hpp"

namespace lrufilter {
namespace {

Device device_at(double f_ghz, double g_ghz = 0.02, double frame_ghz = 3.6) {
  DeviceParams p;
  p.g = ghz_to_rad(g_ghz);
  return build_device(p, ghz_to_rad(f_ghz), ghz_to_rad(frame_ghz));
}

// One-excitation amplitudes under H - (i kappa/2) |L><L| built directly from
// the chain couplings. Index 0 is the bare qubit, 1..L the sites.
CMatrix single_excitation_generator(const Device& d, double frame) {
  const FilterModel& m = d.model;
  const int L = m.order();
  CMatrix h = CMatrix::Zero(L + 1, L + 1);
  h(0, 0) = d.eig.omega_ge - frame;
  for (int k = 0; k < L; ++k) h(k + 1, k + 1) = m.omega(k) - frame;
  for (int k = 0; k + 1 < L; ++k) h(k + 1, k + 2) = h(k + 2, k + 1) = m.J(k);
  const double gn = d.system.ops.coupling * d.eig.charge_elements(0, 1);
  h(0, 1) = h(1, 0) = gn;
  h(L, L) -= cplx(0.0, 0.5 * m.kappa_f);
  return h;
}

TEST(Dynamics, VacuumIsStationary) {
  const Device d = device_at(4.9);
  const CMatrix rho0 = pure_state(bare_transmon_state(d.system.ops.basis, 0));
  const EvolutionResult r = evolve(d.system, rho0, std::nullopt, linspace(0.0, 50e-9, 11));
  for (double p : r.series("P_g")) EXPECT_NEAR(p, 1.0, 1e-12);
  EXPECT_LT(r.trace_drift, 1e-9);
}

TEST(Dynamics, SingleExcitationMatchesNonHermitianPropagation) {
  Device d = device_at(4.6);
  d.system.gamma1 = 0.0;
  d.system.gamma_phi = 0.0;
  const double frame = d.system.ops.frame;
  const CMatrix gen = single_excitation_generator(d, frame);
  const auto times = linspace(0.0, 40e-9, 21);
  const CMatrix rho0 = pure_state(bare_transmon_state(d.system.ops.basis, 1));
  const EvolutionResult r = evolve(d.system, rho0, std::nullopt, times);
  const EvolutionResult s = evolve_static(d.system, rho0, times);
  CVector psi0 = CVector::Zero(gen.rows());
  psi0(0) = 1.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const CVector psi = (cplx(0.0, -times[k]) * gen).exp() * psi0;
    EXPECT_NEAR(r.series("P_e")[k], std::norm(psi(0)), 1e-8) << k;
    EXPECT_NEAR(s.series("P_e")[k], std::norm(psi(0)), 1e-9) << k;
    EXPECT_NEAR(r.series("N1")[k], psi.squaredNorm(), 1e-8) << k;
  }
  EXPECT_LT(r.trace_drift, 1e-9);
  EXPECT_LT(r.hermiticity_drift, 1e-9);
  EXPECT_GT(r.min_eigenvalue_final, -1e-8);
}

TEST(Dynamics, DecoupledTransmonFollowsIntrinsicRates) {
  const Device d = device_at(4.9, 0.0);
  const auto& basis = d.system.ops.basis;
  const DressedStates dressed = find_dressed_states(d.system.ops);
  EXPECT_NEAR(dressed.overlap_sq, 1.0, 1e-12);
  EvolveOptions eo;
  eo.dressed = &dressed;
  const auto times = linspace(0.0, 200e-6, 201);
  const CVector plus = (bare_transmon_state(basis, 0) + bare_transmon_state(basis, 1)) / std::sqrt(2.0);
  const EvolutionResult r = evolve_static(d.system, pure_state(plus), times, eo);
  const double g1 = d.system.gamma1;
  const double gp = d.system.gamma_phi;
  for (std::size_t k = 0; k < times.size(); k += 20) {
    EXPECT_NEAR(r.series("P_e")[k], 0.5 * std::exp(-g1 * times[k]), 1e-10);
    EXPECT_NEAR(r.series("coh_ge_bar")[k], 0.5 * std::exp(-(0.5 * g1 + gp) * times[k]), 1e-10);
  }
  const EvolutionResult e = evolve_static(d.system, pure_state(bare_transmon_state(basis, 1)), times, eo);
  EXPECT_NEAR(fit_t1(e, DecayLevel::e), 100e-6, 1e-7);
  EXPECT_NEAR(fit_t2(r, 100e-6), 100e-6, 1e-7);
  const auto short_times = linspace(0.0, 100e-6, 201);
  const EvolutionResult f = evolve_static(d.system, pure_state(bare_transmon_state(basis, 2)), short_times, eo);
  EXPECT_NEAR(fit_t1(f, DecayLevel::f), 50e-6, 5e-8);
}

TEST(Dynamics, StaticPropagatorAgreesWithAdaptiveStepper) {
  const Device d = device_at(4.9);
  const auto times = linspace(0.0, 30e-9, 31);
  const CMatrix rho0 = pure_state(bare_transmon_state(d.system.ops.basis, 2));
  const EvolutionResult a = evolve(d.system, rho0, std::nullopt, times);
  const EvolutionResult b = evolve_static(d.system, rho0, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_NEAR(a.series("P_f")[k], b.series("P_f")[k], 1e-9);
    EXPECT_NEAR(a.series("two_excitation")[k], b.series("two_excitation")[k], 1e-9);
  }
  EXPECT_LT((a.final_state - b.final_state).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Dynamics, PopulationsDoNotDependOnFrameOrCouplingSign) {
  const auto times = linspace(0.0, 10e-9, 11);
  const Device lab = device_at(4.9, 0.02, 0.0);
  const Device rot = device_at(4.9, 0.02, 4.9);
  const Device neg = device_at(4.9, -0.02, 4.9);
  const CVector psi = (bare_transmon_state(lab.system.ops.basis, 1) + bare_transmon_state(lab.system.ops.basis, 2)) /
                      std::sqrt(2.0);
  const EvolutionResult a = evolve(lab.system, pure_state(psi), std::nullopt, times);
  const EvolutionResult b = evolve(rot.system, pure_state(psi), std::nullopt, times);
  const EvolutionResult c = evolve(neg.system, pure_state(psi), std::nullopt, times);
  for (const char* name : {"P_g", "P_e", "P_f", "N1", "N2"})
    for (std::size_t k = 0; k < times.size(); ++k) {
      EXPECT_NEAR(a.series(name)[k], b.series(name)[k], 1e-8) << name;
      EXPECT_NEAR(c.series(name)[k], b.series(name)[k], 1e-8) << name;
    }
}

TEST(Dynamics, DrivenRunPreservesTraceAndPositivity) {
  const Device d = device_at(4.9, 0.02, 4.9);
  const double rabi = ghz_to_rad(0.05);
  const DriveTerm drive{[rabi](double) { return cplx(rabi, 0.0); }};
  const CMatrix rho0 = pure_state(bare_transmon_state(d.system.ops.basis, 0));
  const EvolutionResult r = evolve(d.system, rho0, drive, linspace(0.0, 10e-9, 51));
  EXPECT_LT(r.trace_drift, 1e-9);
  EXPECT_LT(r.hermiticity_drift, 1e-9);
  EXPECT_GT(r.min_eigenvalue_final, -1e-8);
  double peak = 0.0;
  for (double p : r.series("P_e")) peak = std::max(peak, p);
  EXPECT_GT(peak, 0.9);
}

TEST(Dynamics, ThermalBathPopulatesTheFilter) {
  Device d = device_at(4.9, 0.0);
  d.system.n_th = 0.05;
  const CMatrix rho0 = pure_state(bare_transmon_state(d.system.ops.basis, 0));
  const EvolutionResult r = evolve(d.system, rho0, std::nullopt, linspace(0.0, 200e-9, 5));
  EXPECT_GT(r.series("N1").back(), 0.01);
  EXPECT_LT(r.trace_drift, 1e-9);
  EXPECT_THROW(evolve(d.system, CMatrix::Identity(3, 3), std::nullopt, {0.0, 1e-9}), ConfigError);
}

}  // namespace
}  // namespace lrufilter
