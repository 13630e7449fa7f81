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
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "lrufilter/common.hpp"
#include "lrufilter/fitting.hpp"
#include "lrufilter/integrator.hpp"
#include "lrufilter/transmon_hilbert.hpp"

namespace lrufilter {

/// Open transmon-filter system: port damping on site L with a thermal bath
/// plus intrinsic qubit decay and pure dephasing.
struct LindbladSystem {
  SystemOperators ops;
  double kappa_f = 0.0;
  double n_th = 0.0;
  double gamma1 = 1.0 / 100e-6;
  double gamma_phi = 1.0 / 100e-6;

  void validate() const {
    if (!(kappa_f > 0.0)) throw ConfigError("kappa_f must be positive");
    if (!(n_th >= 0.0)) throw ConfigError("thermal occupation must be nonnegative");
    if (!(gamma1 >= 0.0) || !(gamma_phi >= 0.0))
      throw ConfigError("intrinsic rates must be nonnegative");
  }
};

/// Dissipators sqrt(rate) * C of the master equation, in sparse form.
inline std::vector<SparseC> collapse_operators(const LindbladSystem& sys) {
  std::vector<SparseC> out;
  const double k = sys.kappa_f;
  if (k > 0.0) {
    out.push_back((std::sqrt(k * (sys.n_th + 1.0)) * sys.ops.collapse).sparseView());
    if (sys.n_th > 0.0)
      out.push_back((std::sqrt(k * sys.n_th) * sys.ops.collapse.adjoint()).eval().sparseView());
  }
  if (sys.gamma1 > 0.0) out.push_back((std::sqrt(sys.gamma1) * sys.ops.transmon_lowering).sparseView());
  if (sys.gamma_phi > 0.0) {
    const RVector diag = std::sqrt(2.0 * sys.gamma_phi) * sys.ops.transmon_number;
    out.push_back(CMatrix(diag.cast<cplx>().asDiagonal()).sparseView());
  }
  for (auto& c : out) c.prune(cplx(0.0, 0.0));
  return out;
}

/// H - (i/2) sum C^dag C, with the products taken on the truncated matrices.
inline SparseC effective_hamiltonian(const LindbladSystem& sys, const std::vector<SparseC>& cs) {
  SparseC heff = sys.ops.h0.sparseView();
  for (const auto& c : cs) {
    const SparseC ctc = SparseC(c.adjoint()) * c;
    heff -= cplx(0.0, 0.5) * ctc;
  }
  heff.prune(cplx(0.0, 0.0));
  heff.makeCompressed();
  return heff;
}

/// Density matrix |psi><psi| of a normalized state vector.
inline CMatrix pure_state(const CVector& psi) { return psi * psi.adjoint(); }

/// Bare product state (t, 0, ..., 0).
inline CVector bare_transmon_state(const TruncatedBasis& basis, int t) {
  BasisState s;
  s.t = t;
  s.modes.assign(static_cast<std::size_t>(basis.modes()), 0);
  const std::size_t idx = basis.index_of(s);
  if (idx == TruncatedBasis::npos) throw ConfigError("transmon level lies outside the truncated basis");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(basis.dimension()));
  v(static_cast<Eigen::Index>(idx)) = 1.0;
  return v;
}

/// Computational basis of the coupled system.
struct DressedStates {
  CVector g;
  CVector e;
  double omega_ge_dressed = 0.0;  ///< lab-frame transition frequency
  double overlap_sq = 1.0;         ///< |<e,0..0|e_dressed>|^2
  bool hybridized = false;
};

/// Dressed ground and qubit states from the 0- and 1-excitation sectors of H0.
inline DressedStates find_dressed_states(const SystemOperators& ops) {
  const auto& basis = ops.basis;
  if (basis.max_excitations() < 1) throw ConfigError("dressed states need N_exct >= 1");
  const std::size_t dim = basis.dimension();
  DressedStates out;
  out.g = CVector::Zero(dim);
  out.g(0) = 1.0;
  const double e_g = ops.h0(0, 0).real();

  const auto b = static_cast<Eigen::Index>(basis.sector_begin(1));
  const auto n = static_cast<Eigen::Index>(basis.sector_end(1)) - b;
  const CMatrix block = ops.h0.block(b, b, n, n);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(block);
  if (solver.info() != Eigen::Success) throw NumericError("one-excitation diagonalization failed");

  BasisState bare_e;
  bare_e.t = 1;
  bare_e.modes.assign(static_cast<std::size_t>(basis.modes()), 0);
  const auto idx_e = static_cast<Eigen::Index>(basis.index_of(bare_e)) - b;

  Eigen::Index best = 0;
  double best_overlap = -1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double ov = std::norm(solver.eigenvectors()(idx_e, k));
    if (ov > best_overlap + 1e-12) {
      best_overlap = ov;
      best = k;
    }
  }
  CVector e_block = solver.eigenvectors().col(best);
  // fix the phase so the bare-e component is real and positive
  const cplx phase = e_block(idx_e);
  if (std::abs(phase) > 0.0) e_block *= std::conj(phase) / std::abs(phase);
  out.e = CVector::Zero(dim);
  out.e.segment(b, n) = e_block;
  out.omega_ge_dressed = solver.eigenvalues()(best) - e_g + ops.frame;
  out.overlap_sq = best_overlap;
  out.hybridized = best_overlap < 0.5;
  return out;
}

/// Time-dependent drive: H_d(t) = (c(t) D + conj(c(t)) D^dag)/2 where D is the
/// raising part of the charge operator normalized to a unit g-e element.
struct DriveTerm {
  std::function<cplx(double)> envelope;
};

struct EvolveOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  const DressedStates* dressed = nullptr;
  bool keep_states = false;
};

struct EvolutionResult {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> observables;
  std::vector<CMatrix> states;  ///< only with keep_states
  CMatrix final_state;
  double trace_drift = 0.0;
  double hermiticity_drift = 0.0;
  double min_eigenvalue_final = 0.0;
  double settle_time = 0.0;
  StepperStats stats;

  const std::vector<double>& series(const std::string& name) const {
    const auto it = observables.find(name);
    if (it == observables.end()) throw ConfigError("no observable named '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline void check_density_matrix(const CMatrix& rho, std::size_t dim) {
  if (static_cast<std::size_t>(rho.rows()) != dim || rho.rows() != rho.cols())
    throw ConfigError("initial state has the wrong dimension");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw ConfigError("initial state is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-10)
    throw ConfigError("initial state does not have unit trace");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10)
    throw ConfigError("initial state is not positive semidefinite");
}

/// Records observables of one density matrix.
class ObservableRecorder {
 public:
  ObservableRecorder(const SystemOperators& ops, const DressedStates* dressed, std::size_t points)
      : ops_(ops), dressed_(dressed) {
    const int d_t = ops.basis.levels();
    const char* names[] = {"P_g", "P_e", "P_f", "P_h"};
    for (int t = 0; t < std::min(d_t, 4); ++t) labels_.emplace_back(names[t]);
    for (const auto& l : labels_) out_[l].reserve(points);
    for (int n = 0; n <= ops.basis.max_excitations(); ++n) out_["N" + std::to_string(n)].reserve(points);
  }

  void record(const CMatrix& rho) {
    const RVector diag = rho.diagonal().real();
    for (std::size_t t = 0; t < labels_.size(); ++t)
      out_[labels_[t]].push_back(ops_.transmon_projectors[t].dot(diag));
    for (int n = 0; n <= ops_.basis.max_excitations(); ++n) {
      const auto b = static_cast<Eigen::Index>(ops_.basis.sector_begin(n));
      const auto e = static_cast<Eigen::Index>(ops_.basis.sector_end(n));
      out_["N" + std::to_string(n)].push_back(diag.segment(b, e - b).sum());
    }
    double two = 0.0;
    for (int n = 2; n <= ops_.basis.max_excitations(); ++n) two += out_["N" + std::to_string(n)].back();
    out_["two_excitation"].push_back(two);
    if (dressed_ != nullptr) {
      const CVector rg = rho * dressed_->g;
      const CVector re = rho * dressed_->e;
      out_["P_gbar"].push_back(dressed_->g.dot(rg).real());
      out_["P_ebar"].push_back(dressed_->e.dot(re).real());
      out_["coh_ge_bar"].push_back(std::abs(dressed_->g.dot(re)));
    }
    out_["purity"].push_back(rho.squaredNorm());
    const double tr = rho.trace().real();
    out_["trace"].push_back(tr);
    trace_drift_ = std::max(trace_drift_, std::abs(tr - 1.0));
    herm_drift_ = std::max(herm_drift_, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
  }

  double trace_drift() const { return trace_drift_; }
  double hermiticity_drift() const { return herm_drift_; }
  std::map<std::string, std::vector<double>> take() { return std::move(out_); }

 private:
  const SystemOperators& ops_;
  const DressedStates* dressed_;
  std::vector<std::string> labels_;
  std::map<std::string, std::vector<double>> out_;
  double trace_drift_ = 0.0;
  double herm_drift_ = 0.0;
};

inline void finish_result(EvolutionResult& res, ObservableRecorder& rec, const LindbladSystem& sys) {
  res.observables = rec.take();
  res.trace_drift = rec.trace_drift();
  res.hermiticity_drift = rec.hermiticity_drift();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(res.final_state, Eigen::EigenvaluesOnly);
  res.min_eigenvalue_final = solver.eigenvalues().minCoeff();
  res.settle_time = 2.0 / sys.kappa_f;
}

}  // namespace detail

/// Integrates the master equation with the adaptive DOP853 stepper. rho0 is the
/// state at t_grid.front(); observables are sampled on t_grid.
inline EvolutionResult evolve(const LindbladSystem& sys, const CMatrix& rho0,
                              const std::optional<DriveTerm>& drive, const std::vector<double>& t_grid,
                              const EvolveOptions& options = {}) {
  sys.validate();
  const std::size_t dim = sys.ops.dimension();
  detail::check_density_matrix(rho0, dim);
  if (t_grid.empty()) throw ConfigError("time grid is empty");

  std::vector<SparseRowC> cs;
  for (const auto& c : collapse_operators(sys)) cs.emplace_back(c);
  const SparseRowC heff = effective_hamiltonian(sys, collapse_operators(sys));

  SparseRowC d_up, d_down;
  if (drive) {
    const CVector g0 = bare_transmon_state(sys.ops.basis, 0);
    const CVector e0 = bare_transmon_state(sys.ops.basis, 1);
    const double n01 = std::abs(e0.dot(sys.ops.drive_op * g0));
    if (!(n01 > 0.0)) throw ConfigError("drive operator has no g-e element");
    d_up = (sys.ops.drive_op / n01).sparseView();
    d_down = SparseRowC(d_up.adjoint());
  }

  CMatrix x(dim, dim);
  CMatrix tmp(dim, dim);
  CMatrix tmp_adj(dim, dim);
  const auto rhs = [&](double t, const CMatrix& rho, CMatrix& out) {
    x.noalias() = heff * rho;
    if (drive) {
      const cplx c = 0.5 * drive->envelope(t);
      if (c != cplx(0.0, 0.0)) {
        tmp.noalias() = d_up * rho;
        x.noalias() += c * tmp;
        tmp.noalias() = d_down * rho;
        x.noalias() += std::conj(c) * tmp;
      }
    }
    x *= cplx(0.0, -1.0);
    out = x + x.adjoint();
    for (std::size_t k = 0; k < cs.size(); ++k) {
      tmp.noalias() = cs[k] * rho;
      tmp_adj = tmp.adjoint();
      out.noalias() += cs[k] * tmp_adj;
    }
    // Hermitian part only; the jump terms above hold for Hermitian rho
    tmp_adj = out.adjoint();
    out += tmp_adj;
    out *= 0.5;
  };

  EvolutionResult res;
  res.times = t_grid;
  detail::ObservableRecorder rec(sys.ops, options.dressed, t_grid.size());
  StepperOptions so;
  so.rtol = options.rtol;
  so.atol = options.atol;
  Dop853<CMatrix> stepper(rhs, so);
  stepper.integrate(rho0, t_grid, [&](std::size_t k, const CMatrix& rho) {
    rec.record(rho);
    if (rec.trace_drift() > 1e-8) {
      std::ostringstream msg;
      msg << "trace drift " << rec.trace_drift() << " exceeds 1e-8 at t = " << t_grid[k];
      throw NumericError(msg.str());
    }
    if (options.keep_states) res.states.push_back(rho);
    if (k + 1 == t_grid.size()) res.final_state = rho;
  });
  res.stats = stepper.stats();
  detail::finish_result(res, rec, sys);
  return res;
}

/// Exact propagation of a drive-free run on a uniform grid. The Liouvillian
/// conserves k = N(row) - N(col), so each k-block of rho is stepped with the
/// matrix exponential of its own superoperator block. At zero temperature
/// only excitation sectors reachable from rho0 are kept.
inline EvolutionResult evolve_static(const LindbladSystem& sys, const CMatrix& rho0,
                                     const std::vector<double>& t_grid,
                                     const EvolveOptions& options = {}) {
  sys.validate();
  const std::size_t dim = sys.ops.dimension();
  detail::check_density_matrix(rho0, dim);
  if (t_grid.size() < 2) throw ConfigError("static propagation needs at least two time points");
  const double dt = t_grid[1] - t_grid[0];
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (std::abs((t_grid[i] - t_grid[i - 1]) - dt) > 1e-9 * dt)
      throw ConfigError("static propagation needs a uniform time grid");

  const auto cs = collapse_operators(sys);
  const SparseC heff = effective_hamiltonian(sys, cs);
  const SparseC heff_conj = heff.conjugate();

  std::vector<int> sector(dim);
  for (std::size_t i = 0; i < dim; ++i) sector[i] = static_cast<int>(std::lround(sys.ops.n_total(i)));

  // k-values present in rho0 and the highest sectors they touch
  std::map<int, int> top_row;
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t i = 0; i < dim; ++i)
      if (std::abs(rho0(i, j)) > 0.0) {
        const int k = sector[i] - sector[j];
        if (k > 0) continue;  // recovered from k < 0 by Hermiticity
        auto [it, inserted] = top_row.emplace(k, sector[i]);
        if (!inserted) it->second = std::max(it->second, sector[i]);
      }

  struct Block {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    CVector v;
    CMatrix prop;
  };
  std::vector<Block> blocks;
  std::vector<int> slot(dim * dim, -1);
  for (const auto& [k, top] : top_row) {
    Block blk;
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t i = 0; i < dim; ++i) {
        if (sector[i] - sector[j] != k) continue;
        if (sys.n_th == 0.0 && sector[i] > top) continue;
        blk.pairs.emplace_back(i, j);
      }
    for (std::size_t p = 0; p < blk.pairs.size(); ++p)
      slot[blk.pairs[p].first + dim * blk.pairs[p].second] = static_cast<int>(p);

    const auto n = static_cast<Eigen::Index>(blk.pairs.size());
    CMatrix s = CMatrix::Zero(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
      const auto [i, j] = blk.pairs[static_cast<std::size_t>(p)];
      for (SparseC::InnerIterator it(heff, static_cast<Eigen::Index>(i)); it; ++it) {
        const int q = slot[static_cast<std::size_t>(it.row()) + dim * j];
        if (q >= 0) s(q, p) += cplx(0.0, -1.0) * it.value();
      }
      for (SparseC::InnerIterator it(heff_conj, static_cast<Eigen::Index>(j)); it; ++it) {
        const int q = slot[i + dim * static_cast<std::size_t>(it.row())];
        if (q >= 0) s(q, p) += cplx(0.0, 1.0) * it.value();
      }
      for (const auto& c : cs) {
        for (SparseC::InnerIterator ia(c, static_cast<Eigen::Index>(i)); ia; ++ia)
          for (SparseC::InnerIterator ib(c, static_cast<Eigen::Index>(j)); ib; ++ib) {
            const int q = slot[static_cast<std::size_t>(ia.row()) + dim * static_cast<std::size_t>(ib.row())];
            if (q >= 0) s(q, p) += ia.value() * std::conj(ib.value());
          }
      }
    }
    blk.prop = (s * dt).exp();
    blk.v.resize(n);
    for (Eigen::Index p = 0; p < n; ++p) {
      const auto [i, j] = blk.pairs[static_cast<std::size_t>(p)];
      blk.v(p) = rho0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    for (const auto& pr : blk.pairs) slot[pr.first + dim * pr.second] = -1;
    blocks.push_back(std::move(blk));
  }

  EvolutionResult res;
  res.times = t_grid;
  detail::ObservableRecorder rec(sys.ops, options.dressed, t_grid.size());
  CMatrix rho = CMatrix::Zero(dim, dim);
  CVector next;
  for (std::size_t step = 0; step < t_grid.size(); ++step) {
    rho.setZero();
    for (auto& blk : blocks) {
      if (step > 0) {
        next.noalias() = blk.prop * blk.v;
        blk.v.swap(next);
      }
      for (std::size_t p = 0; p < blk.pairs.size(); ++p) {
        const auto i = static_cast<Eigen::Index>(blk.pairs[p].first);
        const auto j = static_cast<Eigen::Index>(blk.pairs[p].second);
        rho(i, j) = blk.v(static_cast<Eigen::Index>(p));
        if (i != j && sector[static_cast<std::size_t>(i)] != sector[static_cast<std::size_t>(j)])
          rho(j, i) = std::conj(blk.v(static_cast<Eigen::Index>(p)));
      }
    }
    rec.record(rho);
    if (rec.trace_drift() > 1e-8) {
      std::ostringstream msg;
      msg << "trace drift " << rec.trace_drift() << " exceeds 1e-8 at t = " << t_grid[step];
      throw NumericError(msg.str());
    }
    if (options.keep_states) res.states.push_back(rho);
  }
  res.final_state = rho;
  detail::finish_result(res, rec, sys);
  return res;
}

enum class DecayLevel { e, f };

/// Lifetime from a drive-free decay run. e uses the dressed population, f the
/// bare f population; samples earlier than 2/kappa_f are excluded.
inline DecayFit fit_t1_detailed(const EvolutionResult& result, DecayLevel which) {
  const std::vector<double>& y = result.series(which == DecayLevel::e ? "P_ebar" : "P_f");
  std::vector<double> tt, yy;
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    if (result.times[i] < result.times.front() + result.settle_time) continue;
    tt.push_back(result.times[i]);
    yy.push_back(y[i]);
  }
  const double rise = [&] {
    double worst = 0.0;
    for (std::size_t i = 1; i < yy.size(); ++i) worst = std::max(worst, yy[i] - yy[i - 1]);
    return worst;
  }();
  const double range = yy.empty() ? 0.0 : std::abs(yy.front() - yy.back());
  if (rise > 0.05 * std::max(range, 1e-12))
    throw FitError("decay data is not monotone beyond noise");
  return fit_exp_decay(tt, yy, true);
}

inline double fit_t1(const EvolutionResult& result, DecayLevel which) {
  return fit_t1_detailed(result, which).tau;
}

/// Pure-dephasing time from |<g_bar|rho|e_bar>| = A exp(-t (1/(2 T1e) + 1/T2)).
inline double fit_t2(const EvolutionResult& result, double t1e) {
  const std::vector<double>& y = result.series("coh_ge_bar");
  std::vector<double> tt, yy;
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    if (result.times[i] < result.times.front() + result.settle_time) continue;
    tt.push_back(result.times[i]);
    yy.push_back(y[i]);
  }
  const DecayFit fit = fit_exp_decay(tt, yy, false);
  const double excess = 1.0 / fit.tau - 1.0 / (2.0 * t1e);
  if (!(excess > 0.0)) throw FitError("coherence decay is not faster than the T1 limit");
  return 1.0 / excess;
}

}  // namespace lrufilter
