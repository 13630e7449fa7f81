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

#include "lrufilter/common.hpp"
#include "lrufilter/dynamics.hpp"
#include "lrufilter/filter_synth.hpp"
#include "lrufilter/transmon_hilbert.hpp"

namespace lrufilter {

/// Everything needed to place a transmon at a given frequency behind a filter.
/// Angular frequencies in rad/s, times in s.
struct DeviceParams {
  FilterSpec filter = FilterSpec::from_band_edges(7, ghz_to_rad(2.7), ghz_to_rad(4.5), 0.1);
  double alpha = ghz_to_rad(-0.325);
  double g = ghz_to_rad(0.020);
  int n_exct = 2;
  int levels = 3;
  int n_charge = 20;
  double t1 = 100e-6;
  double tphi = 100e-6;
  double n_th = 0.0;
  bool filter_on = true;

  void validate() const {
    filter.validate();
    if (!(alpha < 0.0)) throw ConfigError("anharmonicity must be negative");
    if (!std::isfinite(g)) throw ConfigError("coupling must be finite");
    if (n_exct < 1) throw ConfigError("N_exct must be >= 1");
    if (levels < 3) throw ConfigError("d_t must be >= 3");
    if (!(t1 > 0.0) || !(tphi > 0.0)) throw ConfigError("intrinsic T1 and Tphi must be positive");
    if (!(n_th >= 0.0)) throw ConfigError("n_th must be nonnegative");
  }
};

struct Device {
  TransmonSpec transmon;
  TransmonEigensystem eig;
  FilterModel model;
  LindbladSystem system;
};

/// Transmon with bare omega_ge behind the synthesized filter, operators in a
/// frame rotating at `frame`. With filter_on = false the qubit is decoupled.
inline Device build_device(const DeviceParams& p, const TransmonSpec& transmon, double frame) {
  p.validate();
  transmon.validate();
  Device d;
  d.transmon = transmon;
  d.eig = diagonalize_transmon(d.transmon);
  d.model = synthesize(p.filter);
  const TruncatedBasis basis = build_basis(p.filter.order, p.levels, p.n_exct);
  d.system.ops = build_operators(d.eig, d.model, basis, p.filter_on ? p.g : 0.0, frame);
  d.system.kappa_f = d.model.kappa_f;
  d.system.n_th = p.n_th;
  d.system.gamma1 = 1.0 / p.t1;
  d.system.gamma_phi = 1.0 / p.tphi;
  return d;
}

inline Device build_device(const DeviceParams& p, double omega_ge, double frame) {
  p.validate();
  return build_device(p, invert_targets(omega_ge, p.alpha, p.n_charge, p.levels), frame);
}

}  // namespace lrufilter
