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

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lrufilter/common.hpp"
#include "lrufilter/device.hpp"
#include "lrufilter/dynamics.hpp"
#include "lrufilter/filter_synth.hpp"
#include "lrufilter/transmon_hilbert.hpp"

namespace lrufilter {

/// L x L chain matrix with the port loss -i kappa_f/2 on the last site.
inline CMatrix damped_chain_matrix(const FilterModel& model) {
  CMatrix m = model.coupling_matrix().cast<cplx>();
  const int L = model.order();
  m(L - 1, L - 1) -= cplx(0.0, 0.5 * model.kappa_f);
  return m;
}

/// Local density of states of site 1, -Im G(omega)_11 / pi, in 1/(rad/s).
inline double ldos(const FilterModel& model, double omega) {
  const int L = model.order();
  CMatrix a = -damped_chain_matrix(model);
  a.diagonal().array() += omega;
  CVector e1 = CVector::Zero(L);
  e1(0) = 1.0;
  const CVector col = a.partialPivLu().solve(e1);
  return -col(0).imag() / std::numbers::pi;
}

struct LdosCurve {
  std::vector<double> omega;
  std::vector<double> rho;
};

inline LdosCurve ldos_curve(const FilterModel& model, const std::vector<double>& omega_grid) {
  LdosCurve out;
  out.omega = omega_grid;
  out.rho.resize(omega_grid.size());
  parallel_for(omega_grid.size(), [&](std::size_t i) { out.rho[i] = ldos(model, omega_grid[i]); });
  return out;
}

/// Exact integral of the LDOS over [a, b] from the pole expansion of G_11.
inline double ldos_integral(const FilterModel& model, double a, double b) {
  const CMatrix m = damped_chain_matrix(model);
  Eigen::ComplexEigenSolver<CMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw NumericError("chain eigendecomposition failed");
  const CMatrix& v = solver.eigenvectors();
  const CMatrix vinv = v.inverse();
  cplx total = 0.0;
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const cplx residue = v(0, k) * vinv(k, 0);
    const cplx lambda = solver.eigenvalues()(k);
    total += residue * (std::log(cplx(b) - lambda) - std::log(cplx(a) - lambda));
  }
  return -total.imag() / std::numbers::pi;
}

/// Golden-rule decay rates (rad/s) of the transmon ladder into the filter.
struct RatePrediction {
  double gamma_eg = 0.0;
  double gamma_fe = 0.0;
  std::optional<double> gamma_hf;
  double omega_ge = 0.0;  ///< transition frequencies used
  double omega_ef = 0.0;
};

/// Rates 2 pi g^2 |n_ij|^2 rho(omega_ij) at the given g-e frequency; the e-f
/// frequency is omega_ge + alpha. Pass the bare frequency for the default
/// convention or a dressed one for the sensitivity variant.
inline RatePrediction fgr_rates(const TransmonEigensystem& eig, const FilterModel& model, double g,
                                double omega_ge) {
  RatePrediction out;
  out.omega_ge = omega_ge;
  out.omega_ef = omega_ge + eig.alpha;
  const double n_ge = eig.charge_elements(0, 1);
  const double n_ef = eig.charge_elements(1, 2);
  const double pref = two_pi * g * g;
  out.gamma_eg = std::max(0.0, pref * n_ge * n_ge * ldos(model, out.omega_ge));
  out.gamma_fe = std::max(0.0, pref * n_ef * n_ef * ldos(model, out.omega_ef));
  if (eig.levels() >= 4) {
    const double n_hf = eig.charge_elements(2, 3);
    const double omega_hf = out.omega_ef + (eig.energies(3) - eig.energies(2) - eig.omega_ef);
    out.gamma_hf = std::max(0.0, pref * n_hf * n_hf * ldos(model, omega_hf));
  }
  return out;
}

inline RatePrediction fgr_rates(const TransmonEigensystem& eig, const FilterModel& model, double g) {
  return fgr_rates(eig, model, g, eig.omega_ge);
}

/// Grid frequency with the fastest golden-rule f decay (smallest T1,f).
inline double fgr_operating_point(const DeviceParams& p, const std::vector<double>& omega_grid) {
  if (omega_grid.empty()) throw ConfigError("operating-point grid is empty");
  const FilterModel model = synthesize(p.filter);
  std::vector<double> gamma(omega_grid.size());
  parallel_for(omega_grid.size(), [&](std::size_t i) {
    const auto eig = diagonalize_transmon(invert_targets(omega_grid[i], p.alpha, p.n_charge, p.levels));
    gamma[i] = fgr_rates(eig, model, 1.0, omega_grid[i]).gamma_fe;
  });
  return omega_grid[static_cast<std::size_t>(std::max_element(gamma.begin(), gamma.end()) - gamma.begin())];
}

/// Coupling that makes the smallest golden-rule T1,f over `omega_grid` equal
/// to target_t1f, with the intrinsic f decay 2/T1 included.
inline double calibrate_coupling_to_t1f(const DeviceParams& p, const std::vector<double>& omega_grid,
                                        double target_t1f) {
  double worst = 0.0;
  for (double w : omega_grid) {
    const auto eig = diagonalize_transmon(invert_targets(w, p.alpha, p.n_charge, p.levels));
    worst = std::max(worst, fgr_rates(eig, synthesize(p.filter), 1.0, w).gamma_fe);
  }
  const double needed = 1.0 / target_t1f - 2.0 / p.t1;
  if (!(worst > 0.0) || !(needed > 0.0)) throw ConfigError("target T1,f cannot be reached");
  return std::sqrt(needed / worst);
}

/// One row of the golden-rule versus master-equation comparison. Lifetimes in s.
struct CompareRow {
  double f_ghz = 0.0;
  double fgr_t1e = 0.0;
  double full_t1e = std::numeric_limits<double>::quiet_NaN();
  double fgr_t1f = 0.0;
  double full_t1f = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();  ///< Gamma_fe full / golden rule
  bool band_edge = false;
  bool fit_ok = false;
  double dressed_overlap = 1.0;
  std::string message;
};

struct CompareOptions {
  int points = 301;
  double t1e_horizon = 3.0;  ///< in units of the predicted T1,e
  double t1f_horizon = 5.0;  ///< in units of the predicted T1,f
};

/// Fits one frequency point. Intrinsic rates are added to the golden-rule
/// prediction (f decays intrinsically at 2/T1).
inline CompareRow compare_point(const DeviceParams& p, double omega_ge, const CompareOptions& opt = {}) {
  CompareRow row;
  row.f_ghz = rad_to_ghz(omega_ge);
  const FilterModel model = synthesize(p.filter);
  const Device dev = build_device(p, omega_ge, model.omega(0));
  const RatePrediction fgr = fgr_rates(dev.eig, model, p.filter_on ? p.g : 0.0, omega_ge);
  row.fgr_t1e = 1.0 / (fgr.gamma_eg + 1.0 / p.t1);
  row.fgr_t1f = 1.0 / (fgr.gamma_fe + 2.0 / p.t1);

  double j_min = model.J.size() > 0 ? model.J.minCoeff() : 0.0;
  const double edge_distance = std::min(std::abs(fgr.omega_ef - p.filter.upper_edge()),
                                        std::abs(fgr.omega_ef - p.filter.lower_edge()));
  row.band_edge = edge_distance <= 2.0 * j_min;

  const DressedStates dressed = find_dressed_states(dev.system.ops);
  row.dressed_overlap = dressed.overlap_sq;
  EvolveOptions eo;
  eo.dressed = &dressed;
  const auto attempt = [&](const char* label, auto&& body) {
    try {
      body();
      return true;
    } catch (const FitError& err) {
      row.message += std::string(row.message.empty() ? "" : "; ") + label + ": " + err.what();
    } catch (const NumericError& err) {
      row.message += std::string(row.message.empty() ? "" : "; ") + label + ": " + err.what();
    }
    return false;
  };
  const bool ok_e = attempt("T1,e", [&] {
    const auto grid = linspace(0.0, opt.t1e_horizon * row.fgr_t1e, static_cast<std::size_t>(opt.points));
    row.full_t1e = fit_t1(evolve_static(dev.system, pure_state(dressed.e), grid, eo), DecayLevel::e);
  });
  const bool ok_f = attempt("T1,f", [&] {
    const auto grid = linspace(0.0, opt.t1f_horizon * row.fgr_t1f, static_cast<std::size_t>(opt.points));
    const CMatrix rho0 = pure_state(bare_transmon_state(dev.system.ops.basis, 2));
    row.full_t1f = fit_t1(evolve_static(dev.system, rho0, grid, eo), DecayLevel::f);
    row.ratio = row.fgr_t1f / row.full_t1f;
  });
  row.fit_ok = ok_e && ok_f;
  return row;
}

/// Golden-rule versus master-equation lifetimes over a grid of bare qubit
/// frequencies (rad/s). Failed fits are reported per row.
inline std::vector<CompareRow> compare_fgr_vs_full(const DeviceParams& p, const std::vector<double>& omega_grid,
                                                   const CompareOptions& opt = {}) {
  std::vector<CompareRow> rows(omega_grid.size());
  parallel_for(omega_grid.size(), [&](std::size_t i) { rows[i] = compare_point(p, omega_grid[i], opt); });
  return rows;
}

}  // namespace lrufilter
