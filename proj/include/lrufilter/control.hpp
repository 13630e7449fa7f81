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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "lrufilter/common.hpp"
#include "lrufilter/dynamics.hpp"

namespace lrufilter {

enum class GateTarget { x_pi, x_pi_2, identity };

inline std::string to_string(GateTarget t) {
  switch (t) {
    case GateTarget::x_pi: return "X_pi";
    case GateTarget::x_pi_2: return "X_pi_2";
    default: return "identity";
  }
}

inline GateTarget gate_target_from_string(const std::string& s) {
  if (s == "X_pi" || s == "x_pi" || s == "X") return GateTarget::x_pi;
  if (s == "X_pi_2" || s == "x_pi_2") return GateTarget::x_pi_2;
  if (s == "identity" || s == "I") return GateTarget::identity;
  throw ConfigError("unknown gate target '" + s + "' (expected X_pi, X_pi_2 or identity)");
}

/// Rotation angle of the target about x.
inline double target_angle(GateTarget t) {
  switch (t) {
    case GateTarget::x_pi: return std::numbers::pi;
    case GateTarget::x_pi_2: return 0.5 * std::numbers::pi;
    default: return 0.0;
  }
}

/// Baseline-subtracted Gaussian with a DRAG quadrature. Rates in rad/s.
struct PulseSpec {
  double t_g = 14.2e-9;
  double sigma = 0.0;  ///< 0 selects t_g / 4
  double amp = 0.0;    ///< peak qubit Rabi rate
  double drag_lambda = 0.0;
  double detuning = 0.0;  ///< drive frequency minus dressed omega_ge
  double anharmonicity = ghz_to_rad(-0.325);
  GateTarget target = GateTarget::x_pi;

  double width() const { return sigma > 0.0 ? sigma : 0.25 * t_g; }

  void validate() const {
    if (!(t_g > 0.0)) throw ConfigError("gate time must be positive");
    if (!(width() > 0.0)) throw ConfigError("pulse width must be positive");
    if (drag_lambda != 0.0 && !(anharmonicity != 0.0))
      throw ConfigError("DRAG needs a nonzero anharmonicity");
  }
};

/// Complex envelope Omega(t) + i lambda dOmega/dt / alpha in the drive frame.
inline cplx envelope(const PulseSpec& p, double t) {
  if (t <= 0.0 || t >= p.t_g) return 0.0;
  const double s = p.width();
  const double mid = 0.5 * p.t_g;
  const auto gauss = [&](double x) { return std::exp(-0.5 * (x - mid) * (x - mid) / (s * s)); };
  const double g0 = gauss(0.0);
  const double norm = p.amp / (1.0 - g0);
  const double gt = gauss(t);
  const double omega = norm * (gt - g0);
  const double d_omega = -norm * gt * (t - mid) / (s * s);
  const double quad = p.anharmonicity != 0.0 ? p.drag_lambda * d_omega / p.anharmonicity : 0.0;
  return {omega, quad};
}

/// Area of the in-phase envelope per unit amplitude.
inline double envelope_area_per_amp(const PulseSpec& p) {
  const double s = p.width();
  const double mid = 0.5 * p.t_g;
  const double g0 = std::exp(-0.5 * mid * mid / (s * s));
  const double gauss_area = s * std::sqrt(two_pi) * std::erf(mid / (s * std::sqrt(2.0)));
  return (gauss_area - g0 * p.t_g) / (1.0 - g0);
}

struct GateOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  int transient_points = 143;
  bool renormalized = false;  ///< divide by the qubit-subspace population
};

struct GateResult {
  double avg_fidelity = 0.0;
  double avg_infidelity = 1.0;
  double leakage_out = 0.0;
  double transient_two_exct_max = 0.0;
  std::vector<double> transient_times;  ///< from the g_bar input
  std::map<std::string, std::vector<double>> transient;
  std::array<double, 6> state_fidelities{};
};

namespace detail {

inline Eigen::Matrix2cd target_unitary(GateTarget t) {
  const double theta = target_angle(t);
  Eigen::Matrix2cd u;
  u << std::cos(0.5 * theta), cplx(0.0, -std::sin(0.5 * theta)), cplx(0.0, -std::sin(0.5 * theta)),
      std::cos(0.5 * theta);
  return u;
}

/// Cardinal states +z(g), -z(e), +x, -x, +y, -y as (g, e) amplitudes.
inline std::array<Eigen::Vector2cd, 6> cardinal_states() {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  return {Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(0.0, 1.0), Eigen::Vector2cd(r, r),
          Eigen::Vector2cd(r, -r),    Eigen::Vector2cd(r, i * r),  Eigen::Vector2cd(r, -i * r)};
}

inline DriveTerm make_drive(const PulseSpec& p) {
  return DriveTerm{[p](double t) {
    const cplx c = envelope(p, t);
    if (p.detuning == 0.0) return c;
    return c * std::exp(cplx(0.0, -p.detuning * t));
  }};
}

/// 2x2 block of rho on the dressed qubit states.
inline Eigen::Matrix2cd qubit_block(const CMatrix& rho, const DressedStates& d) {
  const CVector rg = rho * d.g;
  const CVector re = rho * d.e;
  Eigen::Matrix2cd m;
  m << d.g.dot(rg), d.g.dot(re), d.e.dot(rg), d.e.dot(re);
  return m;
}

}  // namespace detail

/// Evolves the six cardinal dressed-qubit states through the pulse and averages
/// the overlap with the ideal outputs. `system` must rotate at the dressed
/// qubit frequency.
inline GateResult simulate_gate(const LindbladSystem& system, const DressedStates& dressed, const PulseSpec& p,
                                const GateOptions& opt = {}) {
  p.validate();
  if (std::abs(system.ops.frame - dressed.omega_ge_dressed) > 1e-6 * std::abs(dressed.omega_ge_dressed))
    throw ConfigError("gate simulation must run in the dressed qubit frame");
  const auto inputs = detail::cardinal_states();
  const Eigen::Matrix2cd u = detail::target_unitary(p.target);
  const DriveTerm drive = detail::make_drive(p);
  const std::vector<double> endpoints{0.0, p.t_g};
  const auto transient_grid = linspace(0.0, p.t_g, static_cast<std::size_t>(std::max(2, opt.transient_points)));

  GateResult out;
  std::array<double, 6> leak{};
  EvolveOptions eo;
  eo.rtol = opt.rtol;
  eo.atol = opt.atol;
  eo.dressed = &dressed;
  parallel_for(inputs.size(), [&](std::size_t k) {
    const CVector psi = inputs[k](0) * dressed.g + inputs[k](1) * dressed.e;
    const auto& grid = k == 0 ? transient_grid : endpoints;
    const EvolutionResult run = evolve(system, pure_state(psi), drive, grid, eo);
    const Eigen::Matrix2cd m = detail::qubit_block(run.final_state, dressed);
    const double pop = m.trace().real();
    const Eigen::Vector2cd ideal = u * inputs[k];
    double f = ideal.dot(m * ideal).real();
    if (opt.renormalized && pop > 0.0) f /= pop;
    out.state_fidelities[k] = f;
    leak[k] = std::max(0.0, 1.0 - pop);
    if (k == 0) {
      out.transient_times = run.times;
      out.transient = run.observables;
    }
  });
  double fsum = 0.0;
  double lsum = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    fsum += out.state_fidelities[k];
    lsum += leak[k];
  }
  out.avg_fidelity = std::clamp(fsum / 6.0, 0.0, 1.0);
  out.avg_infidelity = 1.0 - fsum / 6.0;
  out.leakage_out = lsum / 6.0;
  const auto& two = out.transient.at("two_excitation");
  out.transient_two_exct_max = *std::max_element(two.begin(), two.end());
  return out;
}

/// Rotation angle about x, in [0, 2 pi), reached from g_bar.
inline double rotation_angle(const LindbladSystem& system, const DressedStates& dressed, const PulseSpec& p,
                             const GateOptions& opt = {}) {
  EvolveOptions eo;
  eo.rtol = opt.rtol;
  eo.atol = opt.atol;
  const EvolutionResult run =
      evolve(system, pure_state(dressed.g), detail::make_drive(p), std::vector<double>{0.0, p.t_g}, eo);
  const Eigen::Matrix2cd m = detail::qubit_block(run.final_state, dressed);
  const double sz = (m(0, 0) - m(1, 1)).real();
  const double sy = 2.0 * m(1, 0).imag();
  double theta = std::atan2(-sy, sz);
  if (theta < 0.0) theta += two_pi;
  return theta;
}

/// Amplitude for which the pulse reaches the target rotation angle.
inline double calibrate_amplitude(const LindbladSystem& system, const DressedStates& dressed, PulseSpec p,
                                  const GateOptions& opt = {}) {
  const double goal = target_angle(p.target);
  if (goal == 0.0) return 0.0;
  const double guess = goal / envelope_area_per_amp(p);
  const auto err = [&](double amp) {
    p.amp = amp;
    return rotation_angle(system, dressed, p, opt) - goal;
  };
  double lo = 0.85 * guess;
  double hi = 1.15 * guess;
  double flo = err(lo);
  double fhi = err(hi);
  for (int tries = 0; flo * fhi > 0.0 && tries < 6; ++tries) {
    if (flo > 0.0) {
      lo *= 0.8;
      flo = err(lo);
    } else {
      hi *= 1.2;
      fhi = err(hi);
    }
  }
  if (flo * fhi > 0.0) throw NumericError("could not bracket the pulse amplitude");
  std::uintmax_t iters = 60;
  const auto [a, b] = boost::math::tools::toms748_solve(
      err, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(40), iters);
  return 0.5 * (a + b);
}

struct DragOptions {
  std::optional<PulseSpec> initial;  ///< warm start for (lambda, detuning)
  int max_evaluations = 200;
  double size_tolerance = 1e-3;
  double lambda_step = 0.2;
  double detuning_step_mhz = 1.0;
  GateOptions gate;
};

struct DragOptimization {
  PulseSpec pulse;
  GateResult result;
  int evaluations = 0;
  bool converged = false;
};

/// Amplitude calibration, Nelder-Mead over (lambda, detuning in 2 pi MHz) on
/// the average infidelity, then one amplitude recalibration.
inline DragOptimization optimize_drag(const LindbladSystem& system, const DressedStates& dressed, PulseSpec p,
                                      const DragOptions& opt = {}) {
  p.validate();
  const double mhz = ghz_to_rad(1e-3);
  if (opt.initial) {
    p.drag_lambda = opt.initial->drag_lambda;
    p.detuning = opt.initial->detuning;
    p.amp = opt.initial->amp;
  } else {
    p.drag_lambda = 0.0;
    p.detuning = 0.0;
  }
  if (!opt.initial || p.amp == 0.0) {
    PulseSpec flat = p;
    flat.drag_lambda = 0.0;
    flat.detuning = 0.0;
    p.amp = calibrate_amplitude(system, dressed, flat, opt.gate);
  }

  DragOptimization out;
  struct Ctx {
    const LindbladSystem* system;
    const DressedStates* dressed;
    PulseSpec pulse;
    const GateOptions* gate;
    double mhz;
    int evaluations = 0;
  } ctx{&system, &dressed, p, &opt.gate, mhz};

  gsl_multimin_function fn;
  fn.n = 2;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* x, void* raw) -> double {
    auto* c = static_cast<Ctx*>(raw);
    PulseSpec q = c->pulse;
    q.drag_lambda = gsl_vector_get(x, 0);
    q.detuning = gsl_vector_get(x, 1) * c->mhz;
    ++c->evaluations;
    try {
      return simulate_gate(*c->system, *c->dressed, q, *c->gate).avg_infidelity;
    } catch (const NumericError&) {
      return 1.0;
    }
  };

  gsl_set_error_handler_off();
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, p.drag_lambda);
  gsl_vector_set(x, 1, p.detuning / mhz);
  gsl_vector_set(step, 0, opt.lambda_step);
  gsl_vector_set(step, 1, opt.detuning_step_mhz);
  gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(solver, &fn, x, step);
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && ctx.evaluations < opt.max_evaluations) {
    if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), opt.size_tolerance);
  }
  p.drag_lambda = gsl_vector_get(solver->x, 0);
  p.detuning = gsl_vector_get(solver->x, 1) * mhz;
  out.converged = status == GSL_SUCCESS;
  gsl_multimin_fminimizer_free(solver);
  gsl_vector_free(step);
  gsl_vector_free(x);

  p.amp = calibrate_amplitude(system, dressed, p, opt.gate);
  out.pulse = p;
  out.result = simulate_gate(system, dressed, p, opt.gate);
  out.evaluations = ctx.evaluations;
  return out;
}

/// Average gate error set by T1 and T2 alone.
inline double coherence_limit(double t_g, double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw ConfigError("T1 and T2 must be positive");
  return -0.5 * ((2.0 / 3.0) * std::expm1(-t_g / t2) + (1.0 / 3.0) * std::expm1(-t_g / t1));
}

}  // namespace lrufilter
