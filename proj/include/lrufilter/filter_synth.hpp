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
#include <string>
#include <vector>

#include "lrufilter/common.hpp"

namespace lrufilter {

enum class FilterKind { bandpass, bandstop_view };

inline std::string to_string(FilterKind kind) {
  return kind == FilterKind::bandpass ? "bandpass" : "bandstop-view";
}

inline FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "bandpass") return FilterKind::bandpass;
  if (s == "bandstop-view" || s == "bandstop") return FilterKind::bandstop_view;
  throw ConfigError("unknown filter kind '" + s + "' (expected bandpass or bandstop-view)");
}

/// Chebyshev design parameters. Frequencies are angular (rad/s).
///
/// The coupled-mode chain always realizes the bandpass response; `kind` only
/// labels how a device uses it.
struct FilterSpec {
  int order = 7;
  double omega0 = 0.0;       ///< passband center
  double delta_omega = 0.0;  ///< passband full width
  double ripple_db = 0.1;
  FilterKind kind = FilterKind::bandpass;

  /// Spec with arithmetic band edges [lower, upper] (rad/s).
  static FilterSpec from_band_edges(int order, double lower, double upper, double ripple_db,
                                    FilterKind kind = FilterKind::bandpass) {
    return FilterSpec{order, 0.5 * (lower + upper), upper - lower, ripple_db, kind};
  }

  double lower_edge() const { return omega0 - 0.5 * delta_omega; }
  double upper_edge() const { return omega0 + 0.5 * delta_omega; }

  /// Ripple factor eta = sqrt(10^(ripple/10) - 1).
  double eta() const { return std::sqrt(std::pow(10.0, ripple_db / 10.0) - 1.0); }

  double beta() const { return std::asinh(1.0 / eta()) / static_cast<double>(order); }

  void validate() const {
    if (order < 1) throw ConfigError("filter order must be >= 1");
    if (!(delta_omega > 0.0) || !std::isfinite(delta_omega))
      throw ConfigError("filter bandwidth must be positive");
    if (!(ripple_db > 0.0) || ripple_db > 3.0)
      throw ConfigError("filter ripple must lie in (0, 3] dB");
    if (!std::isfinite(omega0)) throw ConfigError("filter center frequency must be finite");
  }
};

/// Coupled-mode chain: L equal-frequency sites, nearest-neighbour couplings,
/// port damping on the last site.
struct FilterModel {
  RVector omega;  ///< site frequencies (rad/s)
  RVector J;      ///< J(n) couples sites n and n+1 (0-based), length L-1
  double kappa_f = 0.0;

  int order() const { return static_cast<int>(omega.size()); }

  /// Real symmetric L x L tridiagonal matrix of the undamped chain.
  RMatrix coupling_matrix() const {
    const int n = order();
    RMatrix m = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = omega(i);
    for (int i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = J(i);
    return m;
  }
};

/// Chebyshev polynomial of the first kind. Uses the three-term recurrence
/// inside [-1, 1] and the cosh continuation outside it.
inline double chebyshev_t(int order, double x) {
  if (order < 0) throw ConfigError("Chebyshev order must be >= 0");
  if (order == 0) return 1.0;
  const double ax = std::abs(x);
  if (ax > 1.0) {
    const double value = std::cosh(static_cast<double>(order) * std::acosh(ax));
    return (x < 0.0 && order % 2 == 1) ? -value : value;
  }
  double prev = 1.0;
  double curr = x;
  for (int k = 1; k < order; ++k) {
    const double next = 2.0 * x * curr - prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

/// Closed-form couplings and port rate of the Chebyshev chain.
inline FilterModel synthesize(const FilterSpec& spec) {
  spec.validate();
  const int L = spec.order;
  const double pi = std::numbers::pi;
  const double beta = spec.beta();
  const double sinh_beta = std::sinh(beta);

  FilterModel model;
  model.omega = RVector::Constant(L, spec.omega0);
  model.J.resize(std::max(0, L - 1));
  for (int n = 1; n < L; ++n) {
    const double x = n * pi / L;
    // |sin(x + i beta)| = sqrt(sin^2 x + sinh^2 beta)
    const double numerator = std::sqrt(std::sin(x) * std::sin(x) + sinh_beta * sinh_beta);
    const double denominator =
        std::sqrt(std::sin((2 * n - 1) * pi / (2.0 * L)) * std::sin((2 * n + 1) * pi / (2.0 * L)));
    model.J(n - 1) = 0.25 * spec.delta_omega * numerator / denominator;
  }
  model.kappa_f = 0.5 * spec.delta_omega * sinh_beta / std::sin(pi / (2.0 * L));
  return model;
}

/// Classical transmission |S12(omega)|^2 of the Chebyshev response.
inline double s12_magnitude_sq(const FilterSpec& spec, double omega) {
  const double x = 2.0 * (omega - spec.omega0) / spec.delta_omega;
  const double eta = spec.eta();
  const double t = chebyshev_t(spec.order, x);
  return 1.0 / (1.0 + eta * eta * t * t);
}

/// Eigenfrequencies of the undamped chain, ascending.
inline RVector filter_mode_frequencies(const FilterModel& model) {
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(model.coupling_matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace lrufilter
