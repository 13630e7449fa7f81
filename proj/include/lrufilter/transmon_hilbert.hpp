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
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lrufilter/common.hpp"
#include "lrufilter/filter_synth.hpp"
#include "lrufilter/fitting.hpp"

namespace lrufilter {

/// Charge-basis transmon. Energies in rad/s.
struct TransmonSpec {
  double e_c = 0.0;
  double e_j = 0.0;
  int n_charge_cutoff = 20;  ///< charge states -n_c..n_c
  int levels = 3;            ///< kept eigenlevels d_t

  void validate() const {
    if (!(e_c > 0.0) || !(e_j > 0.0)) throw ConfigError("E_C and E_J must be positive");
    if (e_j <= e_c) throw ConfigError("E_J/E_C must exceed 1");
    if (levels < 3) throw ConfigError("at least three transmon levels (g, e, f) are required");
    if (n_charge_cutoff < 10) throw ConfigError("charge cutoff must be >= 10");
    if (levels > 2 * n_charge_cutoff + 1)
      throw ConfigError("more transmon levels requested than charge states available");
  }
};

struct TransmonEigensystem {
  RVector energies;         ///< ground energy subtracted, rad/s
  RMatrix charge_elements;  ///< <i|n|j>, first superdiagonal real-positive
  double omega_ge = 0.0;
  double omega_ef = 0.0;
  double alpha = 0.0;
  std::vector<std::string> warnings;

  int levels() const { return static_cast<int>(energies.size()); }
};

namespace detail {

/// Lowest `levels` eigenpairs of 4 n^2 - (E_J/E_C) cos(phi), in units of E_C.
inline Eigen::SelfAdjointEigenSolver<RMatrix> charge_basis_solve(double ej_over_ec, int n_c) {
  const int dim = 2 * n_c + 1;
  RMatrix h = RMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double n = static_cast<double>(k - n_c);
    h(k, k) = 4.0 * n * n;
    if (k + 1 < dim) h(k, k + 1) = h(k + 1, k) = -0.5 * ej_over_ec;
  }
  return Eigen::SelfAdjointEigenSolver<RMatrix>(h);
}

}  // namespace detail

/// Diagonalizes H_t = 4 E_C n^2 - E_J cos(phi) at zero gate charge.
inline TransmonEigensystem diagonalize_transmon(const TransmonSpec& spec) {
  spec.validate();
  const int d = spec.levels;
  const int n_c = spec.n_charge_cutoff;
  const double ratio = spec.e_j / spec.e_c;

  const auto solver = detail::charge_basis_solve(ratio, n_c);
  if (solver.info() != Eigen::Success) throw NumericError("transmon diagonalization failed");
  const auto check = detail::charge_basis_solve(ratio, n_c + 5);
  const RVector ev = solver.eigenvalues().head(d);
  const RVector ev_check = check.eigenvalues().head(d);
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double drift = (ev - ev_check).cwiseAbs().maxCoeff() / scale;
  if (drift >= 1e-10) {
    std::ostringstream msg;
    msg << "transmon levels not converged in charge cutoff " << n_c << " (drift " << drift << ")";
    throw NumericError(msg.str());
  }

  const int dim = 2 * n_c + 1;
  RMatrix vecs = solver.eigenvectors().leftCols(d);
  RVector n_diag(dim);
  for (int k = 0; k < dim; ++k) n_diag(k) = static_cast<double>(k - n_c);

  // ground state: largest component positive; then each level fixed by <i-1|n|i> > 0
  Eigen::Index arg = 0;
  vecs.col(0).cwiseAbs().maxCoeff(&arg);
  if (vecs(arg, 0) < 0.0) vecs.col(0) *= -1.0;
  for (int i = 1; i < d; ++i) {
    const double element = vecs.col(i - 1).dot(n_diag.cwiseProduct(vecs.col(i)));
    if (element < 0.0) vecs.col(i) *= -1.0;
  }

  TransmonEigensystem out;
  out.energies = (ev.array() - ev(0)).matrix() * spec.e_c;
  out.charge_elements = vecs.transpose() * n_diag.asDiagonal() * vecs;
  for (int i = 0; i < d; ++i) out.charge_elements(i, i) = 0.0;
  out.omega_ge = out.energies(1);
  out.omega_ef = out.energies(2) - out.energies(1);
  out.alpha = out.omega_ef - out.omega_ge;
  for (int i = 1; i < d; ++i)
    if (!(out.energies(i) > out.energies(i - 1)))
      throw NumericError("transmon levels are not strictly increasing");
  if (ratio < 20.0) {
    std::ostringstream msg;
    msg << "E_J/E_C = " << ratio << " is below the transmon regime (20)";
    out.warnings.push_back(msg.str());
  }
  return out;
}

namespace detail {

/// Relative mismatch of (omega_ge, alpha) at (E_C, E_J) given in GHz.
inline void target_residual(const RVector& x, RVector& r, double ge_ghz, double alpha_ghz, int n_c) {
  const double ec = x(0);
  const double ej = x(1);
  if (!(ec > 0.0) || !(ej > ec)) {
    r.setConstant(1e3);
    return;
  }
  const auto solver = charge_basis_solve(ej / ec, n_c);
  const RVector ev = solver.eigenvalues();
  const double ge = (ev(1) - ev(0)) * ec;
  const double ef = (ev(2) - ev(1)) * ec;
  r(0) = (ge - ge_ghz) / ge_ghz;
  r(1) = (ef - ge - alpha_ghz) / std::abs(alpha_ghz);
}

}  // namespace detail

/// Finds (E_C, E_J) whose lowest transitions match omega_ge and alpha.
inline TransmonSpec invert_targets(double omega_ge, double alpha, int n_charge_cutoff = 20,
                                   int levels = 3) {
  if (!(alpha < 0.0)) throw ConfigError("anharmonicity must be negative");
  if (!(omega_ge > 0.0) || std::abs(alpha) >= omega_ge)
    throw ConfigError("need 0 < |alpha| < omega_ge");

  const double ge_ghz = rad_to_ghz(omega_ge);
  const double alpha_ghz = rad_to_ghz(alpha);
  const double ec0 = -alpha_ghz;
  const double ej0 = (ge_ghz - alpha_ghz) * (ge_ghz - alpha_ghz) / (8.0 * ec0);

  const detail::ResidualFn residual_fn = [&](const RVector& x, RVector& r) {
    detail::target_residual(x, r, ge_ghz, alpha_ghz, n_charge_cutoff);
  };
  RVector x(2);
  x << ec0, ej0;
  detail::least_squares(residual_fn, x, 2, 2000);
  RVector residual(2);
  residual_fn(x, residual);
  if (!(residual.cwiseAbs().maxCoeff() < 1e-9)) {
    std::ostringstream msg;
    msg << "transmon target inversion did not converge (residual " << residual.norm() << ")";
    throw NumericError(msg.str());
  }
  return TransmonSpec{ghz_to_rad(x(0)), ghz_to_rad(x(1)), n_charge_cutoff, levels};
}

/// Product state (t, m_1..m_L).
struct BasisState {
  int t = 0;
  std::vector<int> modes;

  int excitations() const {
    int n = t;
    for (int m : modes) n += m;
    return n;
  }
  bool operator<(const BasisState& other) const {
    if (t != other.t) return t < other.t;
    return modes < other.modes;
  }
  bool operator==(const BasisState& other) const = default;
};

/// Excitation-number truncated transmon x L-mode basis. States are ordered by
/// (total excitations, t, m_1, ..., m_L), so each excitation sector is a
/// contiguous index range.
class TruncatedBasis {
 public:
  TruncatedBasis() = default;

  TruncatedBasis(int modes, int levels, int n_exct) : L_(modes), d_t_(levels), n_exct_(n_exct) {
    if (modes < 1 || levels < 1 || n_exct < 0) throw ConfigError("basis sizes must be positive");
    sector_begin_.assign(static_cast<std::size_t>(n_exct) + 2, 0);
    for (int n = 0; n <= n_exct; ++n) {
      sector_begin_[static_cast<std::size_t>(n)] = states_.size();
      BasisState s;
      s.modes.assign(static_cast<std::size_t>(L_), 0);
      for (s.t = 0; s.t < d_t_ && s.t <= n; ++s.t) fill_modes(s, 0, n - s.t);
    }
    sector_begin_.back() = states_.size();
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
  }

  int modes() const { return L_; }
  int levels() const { return d_t_; }
  int max_excitations() const { return n_exct_; }
  std::size_t dimension() const { return states_.size(); }
  const std::vector<BasisState>& states() const { return states_; }
  const BasisState& state(std::size_t i) const { return states_.at(i); }

  /// Index of a state, or npos when it lies outside the truncation.
  std::size_t index_of(const BasisState& s) const {
    const auto it = index_.find(s);
    return it == index_.end() ? npos : it->second;
  }

  std::size_t sector_begin(int n) const { return sector_begin_.at(static_cast<std::size_t>(n)); }
  std::size_t sector_end(int n) const { return sector_begin_.at(static_cast<std::size_t>(n) + 1); }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void fill_modes(BasisState& s, int site, int remaining) {
    if (site == L_ - 1) {
      s.modes[static_cast<std::size_t>(site)] = remaining;
      states_.push_back(s);
      return;
    }
    for (int m = 0; m <= remaining; ++m) {
      s.modes[static_cast<std::size_t>(site)] = m;
      fill_modes(s, site + 1, remaining - m);
    }
    s.modes[static_cast<std::size_t>(site)] = 0;
  }

  int L_ = 0;
  int d_t_ = 0;
  int n_exct_ = 0;
  std::vector<BasisState> states_;
  std::vector<std::size_t> sector_begin_;
  std::map<BasisState, std::size_t> index_;
};

/// binomial(n, k) in double precision.
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * static_cast<double>(n - k + i) / i;
  return std::round(result);
}

inline TruncatedBasis build_basis(int modes, int levels, int n_exct) {
  TruncatedBasis basis(modes, levels, n_exct);
  if (levels > n_exct) {
    const double expected = binomial(1 + modes + n_exct, n_exct);
    if (static_cast<double>(basis.dimension()) != expected)
      throw NumericError("basis enumeration disagrees with the closed-form dimension");
  }
  return basis;
}

/// Operators of the RWA transmon-filter model on a truncated basis.
struct SystemOperators {
  TruncatedBasis basis;
  CMatrix h0;                 ///< includes the -frame * N_total shift
  RVector n_total;            ///< diagonal of the excitation-number operator
  CMatrix drive_op;           ///< sum_t <t|n|t+1> |t+1><t|, raising part of n_t
  CMatrix collapse;           ///< f_L
  CMatrix site1_lowering;     ///< f_1
  CMatrix transmon_lowering;  ///< sum_t sqrt(t+1) |t><t+1|
  RVector transmon_number;    ///< diagonal of sum_t t |t><t|
  std::vector<RVector> transmon_projectors;
  double frame = 0.0;
  double coupling = 0.0;

  std::size_t dimension() const { return basis.dimension(); }
};

inline SystemOperators build_operators(const TransmonEigensystem& eig, const FilterModel& model,
                                       const TruncatedBasis& basis, double g, double frame) {
  const int L = model.order();
  if (basis.modes() != L) throw ConfigError("basis mode count does not match the filter order");
  if (basis.levels() > eig.levels())
    throw ConfigError("basis keeps more transmon levels than were diagonalized");
  if (!std::isfinite(g)) throw ConfigError("coupling must be finite");
  if (!std::isfinite(frame) || std::abs(frame) > 1e15)
    throw ConfigError("rotating frame frequency out of range");

  const std::size_t dim = basis.dimension();
  const int d_t = basis.levels();
  SystemOperators ops;
  ops.basis = basis;
  ops.frame = frame;
  ops.coupling = g;
  ops.h0 = CMatrix::Zero(dim, dim);
  ops.n_total = RVector::Zero(dim);
  ops.drive_op = CMatrix::Zero(dim, dim);
  ops.collapse = CMatrix::Zero(dim, dim);
  ops.site1_lowering = CMatrix::Zero(dim, dim);
  ops.transmon_lowering = CMatrix::Zero(dim, dim);
  ops.transmon_number = RVector::Zero(dim);
  ops.transmon_projectors.assign(static_cast<std::size_t>(d_t), RVector::Zero(dim));

  for (std::size_t i = 0; i < dim; ++i) {
    const BasisState& s = basis.state(i);
    const int n = s.excitations();
    double diag = eig.energies(s.t) - frame * n;
    for (int k = 0; k < L; ++k) diag += model.omega(k) * s.modes[static_cast<std::size_t>(k)];
    ops.h0(i, i) = diag;
    ops.n_total(i) = n;
    ops.transmon_number(i) = s.t;
    ops.transmon_projectors[static_cast<std::size_t>(s.t)](i) = 1.0;

    // hopping J_k (f_{k+1}^dag f_k + h.c.)
    for (int k = 0; k + 1 < L; ++k) {
      const int mk = s.modes[static_cast<std::size_t>(k)];
      if (mk == 0) continue;
      BasisState target = s;
      target.modes[static_cast<std::size_t>(k)] -= 1;
      target.modes[static_cast<std::size_t>(k) + 1] += 1;
      const std::size_t j = basis.index_of(target);
      if (j == TruncatedBasis::npos) continue;
      const double amp =
          model.J(k) * std::sqrt(static_cast<double>(mk)) *
          std::sqrt(static_cast<double>(target.modes[static_cast<std::size_t>(k) + 1]));
      ops.h0(j, i) += amp;
      ops.h0(i, j) += amp;
    }

    // qubit raising with a site-1 photon absorbed: |t+1, m_1-1><t, m_1|
    if (s.t + 1 < d_t) {
      const double n_elem = std::abs(eig.charge_elements(s.t, s.t + 1));
      BasisState raised = s;
      raised.t += 1;
      const std::size_t j_drive = basis.index_of(raised);
      if (j_drive != TruncatedBasis::npos) ops.drive_op(j_drive, i) = n_elem;
      const int m1 = s.modes[0];
      if (m1 > 0) {
        raised.modes[0] -= 1;
        const std::size_t j = basis.index_of(raised);
        if (j != TruncatedBasis::npos) {
          const double amp = g * n_elem * std::sqrt(static_cast<double>(m1));
          ops.h0(j, i) += amp;
          ops.h0(i, j) += amp;
        }
      }
    }

    if (s.t > 0) {
      BasisState lowered = s;
      lowered.t -= 1;
      const std::size_t j = basis.index_of(lowered);
      if (j != TruncatedBasis::npos) ops.transmon_lowering(j, i) = std::sqrt(static_cast<double>(s.t));
    }
    const int m_last = s.modes[static_cast<std::size_t>(L - 1)];
    if (m_last > 0) {
      BasisState lowered = s;
      lowered.modes[static_cast<std::size_t>(L - 1)] -= 1;
      const std::size_t j = basis.index_of(lowered);
      if (j != TruncatedBasis::npos) ops.collapse(j, i) = std::sqrt(static_cast<double>(m_last));
    }
    if (s.modes[0] > 0) {
      BasisState lowered = s;
      lowered.modes[0] -= 1;
      const std::size_t j = basis.index_of(lowered);
      if (j != TruncatedBasis::npos) ops.site1_lowering(j, i) = std::sqrt(static_cast<double>(s.modes[0]));
    }
  }
  return ops;
}

/// Same operators in a different rotating frame.
inline SystemOperators with_frame(SystemOperators ops, double frame) {
  const double shift = ops.frame - frame;
  for (Eigen::Index i = 0; i < ops.h0.rows(); ++i) ops.h0(i, i) += shift * ops.n_total(i);
  ops.frame = frame;
  return ops;
}

}  // namespace lrufilter
