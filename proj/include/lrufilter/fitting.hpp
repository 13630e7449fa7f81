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

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "lrufilter/common.hpp"

namespace lrufilter {

/// Parameters, covariance and quality of a least-squares fit.
struct FitReport {
  RVector params;
  RMatrix covariance;
  double residual_rms = 0.0;
  bool converged = false;
  bool identifiable = true;
  std::string note;

  double stderr_of(int i) const {
    return std::sqrt(std::max(0.0, covariance(i, i)));
  }
};

namespace detail {

using ResidualFn = std::function<void(const RVector&, RVector&)>;

struct LmFunctor : Eigen::DenseFunctor<double> {
  LmFunctor(ResidualFn fn, int inputs, int values)
      : Eigen::DenseFunctor<double>(inputs, values), residual(std::move(fn)) {}

  int operator()(const RVector& x, RVector& fvec) const {
    residual(x, fvec);
    return 0;
  }

  int df(const RVector& x, RMatrix& jac) const {
    RVector xp = x;
    RVector fp(values());
    RVector fm(values());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
      xp(j) = x(j) + h;
      residual(xp, fp);
      xp(j) = x(j) - h;
      residual(xp, fm);
      xp(j) = x(j);
      jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return 0;
  }

  ResidualFn residual;
};

/// Central-difference Jacobian of a residual function.
inline RMatrix numeric_jacobian(const ResidualFn& fn, const RVector& x, int values) {
  LmFunctor functor(fn, static_cast<int>(x.size()), values);
  RMatrix jac(values, x.size());
  functor.df(x, jac);
  return jac;
}

/// Levenberg-Marquardt on a residual function; x is updated in place.
inline bool least_squares(const ResidualFn& fn, RVector& x, int values, int max_evals = 4000) {
  LmFunctor functor(fn, static_cast<int>(x.size()), values);
  Eigen::LevenbergMarquardt<LmFunctor> lm(functor);
  lm.setXtol(1e-14);
  lm.setFtol(1e-14);
  lm.setMaxfev(max_evals);
  const auto status = lm.minimize(x);
  return status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
         status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
         x.allFinite();
}

/// s^2 (J^T J)^-1 with J the Jacobian in the reported parameters.
inline RMatrix covariance_from_jacobian(const RMatrix& jac, double ssr, bool& well_posed) {
  const Eigen::Index n = jac.rows();
  const Eigen::Index p = jac.cols();
  const double dof = static_cast<double>(std::max<Eigen::Index>(1, n - p));
  const RMatrix jtj = jac.transpose() * jac;
  Eigen::JacobiSVD<RMatrix> svd(jtj);
  const RVector sv = svd.singularValues();
  well_posed = sv(0) > 0.0 && sv(sv.size() - 1) > 1e-13 * sv(0);
  if (!well_posed)
    return RMatrix::Constant(p, p, std::numeric_limits<double>::infinity());
  return (ssr / dof) * jtj.inverse();
}

}  // namespace detail

/// Result of an exponential-decay fit y = A exp(-t/tau) [+ C].
struct DecayFit {
  double amplitude = 0.0;
  double tau = 0.0;
  double offset = 0.0;
  double tau_stderr = 0.0;
  FitReport report;
};

/// Least-squares fit of A exp(-t/tau) + C (C fixed to 0 when with_offset is
/// false). Throws FitError when the data carries no decay.
inline DecayFit fit_exp_decay(const std::vector<double>& t, const std::vector<double>& y,
                              bool with_offset = true) {
  const std::size_t n = t.size();
  const std::size_t n_params = with_offset ? 3 : 2;
  if (n != y.size()) throw FitError("time and value series differ in length");
  if (n < n_params + 1) throw FitError("too few points for an exponential fit");
  const double t0 = t.front();
  const double span = t.back() - t0;
  if (!(span > 0.0)) throw FitError("time axis must be increasing");

  RVector s(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    s(static_cast<Eigen::Index>(i)) = (t[i] - t0) / span;
    v(static_cast<Eigen::Index>(i)) = y[i];
  }

  // starting point from a log-linear fit of the offset-free signal
  const double c0 = with_offset ? std::min(v(Eigen::last), v.minCoeff()) : 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  const double floor = 1e-3 * std::abs(v(0) - c0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double w = v(i) - c0;
    if (!(w > floor)) continue;
    const double ly = std::log(w);
    sx += s(i);
    sy += ly;
    sxx += s(i) * s(i);
    sxy += s(i) * ly;
    ++used;
  }
  double k0 = 1.0;
  if (used >= 2) {
    const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    if (std::isfinite(slope) && slope < 0.0) k0 = -slope;
  }
  k0 = std::clamp(k0, 1e-4, 1e3);

  RVector x(static_cast<Eigen::Index>(n_params));
  x(0) = v(0) - c0;
  x(1) = k0;
  if (with_offset) x(2) = c0;

  const detail::ResidualFn residual = [&](const RVector& p, RVector& r) {
    const double off = with_offset ? p(2) : 0.0;
    r = (p(0) * (-p(1) * s.array()).exp() + off).matrix() - v;
  };
  const bool ok = detail::least_squares(residual, x, static_cast<int>(n));

  DecayFit fit;
  RVector r(n);
  residual(x, r);
  const double ssr = r.squaredNorm();
  bool well_posed = true;
  const RMatrix jac = detail::numeric_jacobian(residual, x, static_cast<int>(n));
  const RMatrix cov = detail::covariance_from_jacobian(jac, ssr, well_posed);

  fit.amplitude = x(0);
  fit.offset = with_offset ? x(2) : 0.0;
  fit.report.params = x;
  fit.report.covariance = cov;
  fit.report.residual_rms = std::sqrt(ssr / static_cast<double>(n));
  fit.report.converged = ok;
  fit.report.identifiable = well_posed;
  if (!ok || !(x(1) > 0.0) || !std::isfinite(x(1)))
    throw FitError("exponential fit did not converge to a decaying solution");
  fit.tau = span / x(1);
  fit.tau_stderr = fit.tau * fit.report.stderr_of(1) / x(1);
  return fit;
}

/// Fitted leakage/seepage rates per measurement.
struct PleakFit {
  double gamma_l = 0.0;
  double gamma_s = 0.0;
  RMatrix covariance;  ///< of (gamma_l, gamma_s)
  double residual_rms = 0.0;
  bool converged = false;
  bool identifiable = true;
  std::string note;
};

/// Leakage population after m measurements for per-measurement rates.
inline double pleak_model(double gamma_l, double gamma_s, double m) {
  const double total = gamma_l + gamma_s;
  if (total <= 0.0) return 0.0;
  return gamma_l / total * (1.0 - std::exp(-total * m));
}

/// Fits the saturating leakage model to p(m) sampled at m = m_index[i].
/// Rates are kept nonnegative through a squared parametrization.
inline PleakFit fit_pleak(const std::vector<double>& m_index, const std::vector<double>& p) {
  const std::size_t n = p.size();
  if (n != m_index.size()) throw FitError("index and value series differ in length");
  if (n < 5) throw FitError("leakage fit needs at least 5 points");

  RVector mm(n), pv(n);
  for (std::size_t i = 0; i < n; ++i) {
    mm(static_cast<Eigen::Index>(i)) = m_index[i];
    pv(static_cast<Eigen::Index>(i)) = p[i];
  }

  PleakFit out;
  const auto tail = static_cast<Eigen::Index>(std::max<std::size_t>(1, n / 4));
  const double plateau = pv.tail(tail).mean();
  if (!(pv.cwiseAbs().maxCoeff() > 0.0)) {
    out.converged = true;
    out.identifiable = false;
    out.covariance = RMatrix::Constant(2, 2, std::numeric_limits<double>::infinity());
    out.note = "series is identically zero; only gamma_l = 0 is determined";
    return out;
  }

  const double first = std::max(pv(0), 1e-6) / std::max(mm(0), 1.0);
  double gl0 = first;
  double gs0 = plateau > 0.0 && plateau < 1.0 ? gl0 * (1.0 - plateau) / plateau : gl0;
  gl0 = std::clamp(gl0, 1e-6, 10.0);
  gs0 = std::clamp(gs0, 1e-6, 10.0);

  const detail::ResidualFn squared = [&](const RVector& q, RVector& r) {
    const double gl = q(0) * q(0);
    const double gs = q(1) * q(1);
    for (Eigen::Index i = 0; i < mm.size(); ++i) r(i) = pleak_model(gl, gs, mm(i)) - pv(i);
  };
  RVector q(2);
  q << std::sqrt(gl0), std::sqrt(gs0);
  out.converged = detail::least_squares(squared, q, static_cast<int>(n));

  out.gamma_l = q(0) * q(0);
  out.gamma_s = q(1) * q(1);
  const detail::ResidualFn direct = [&](const RVector& g, RVector& r) {
    for (Eigen::Index i = 0; i < mm.size(); ++i) r(i) = pleak_model(g(0), g(1), mm(i)) - pv(i);
  };
  RVector g(2);
  g << out.gamma_l, out.gamma_s;
  RVector r(n);
  direct(g, r);
  const double ssr = r.squaredNorm();
  out.residual_rms = std::sqrt(ssr / static_cast<double>(n));
  bool well_posed = true;
  const RMatrix jac = detail::numeric_jacobian(direct, g, static_cast<int>(n));
  out.covariance = detail::covariance_from_jacobian(jac, ssr, well_posed);
  out.identifiable = well_posed;

  const double total = out.gamma_l + out.gamma_s;
  if (total * mm.minCoeff() > 20.0) {
    out.identifiable = false;
    out.note = "curve saturates before the first sample; gamma_l + gamma_s is unidentifiable";
  } else if (!well_posed) {
    out.note = "normal matrix is singular; rates are not separately identifiable";
  }
  if (!out.converged) out.note = "least-squares iteration did not converge";
  return out;
}

}  // namespace lrufilter
