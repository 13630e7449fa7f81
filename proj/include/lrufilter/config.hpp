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

#include <chrono>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrufilter/common.hpp"
#include "lrufilter/control.hpp"
#include "lrufilter/device.hpp"
#include "lrufilter/lru_harness.hpp"

namespace lrufilter {

inline constexpr const char* tool_version = "1.0.0";
inline constexpr int schema_version = 1;

using json = nlohmann::json;

/// Fully resolved defaults; every accepted key appears here. Units: GHz, ns,
/// us and dB at this boundary.
inline json default_config() {
  return json::parse(R"({
    "schema_version": 1,
    "seed": 1,
    "filter": {
      "order": 7,
      "lower_ghz": 2.7,
      "upper_ghz": 4.5,
      "center_ghz": null,
      "bandwidth_ghz": null,
      "ripple_db": 0.1,
      "kind": "bandpass"
    },
    "transmon": {
      "omega_ge_ghz": null,
      "alpha_ghz": -0.325,
      "e_c_ghz": null,
      "e_j_ghz": null,
      "n_charge": 20,
      "levels": 3
    },
    "coupling_ghz": 0.020,
    "n_exct": 2,
    "intrinsic": { "t1_us": 100.0, "tphi_us": 100.0 },
    "n_th": 0.0,
    "frame_ghz": null,
    "filter_on": true,
    "sweep": { "start_ghz": 4.45, "stop_ghz": 4.97, "step_ghz": 0.01 },
    "grid": { "start_ghz": 1.8, "stop_ghz": 5.4, "points": 2001 },
    "evolve": {
      "initial": "e",
      "duration_ns": 100.0,
      "points": 201,
      "rtol": 1e-10,
      "atol": 1e-12,
      "method": "auto"
    },
    "rates": { "dressed_frequency": false, "points": 301 },
    "pulse": {
      "t_g_ns": 14.2,
      "sigma_ns": null,
      "target": "X_pi",
      "optimize": true,
      "amp_mhz": null,
      "drag_lambda": 0.0,
      "detuning_mhz": 0.0,
      "max_evaluations": 200,
      "size_tolerance": 1e-3,
      "rtol": 1e-10,
      "renormalized": false,
      "transient_points": 143
    },
    "lru": {
      "n_meas": 60,
      "n_shots": 5000,
      "calib_shots": 5000,
      "gamma_l": null,
      "gamma_s": null,
      "p_leak_g": 0.01,
      "p_leak_e": 0.01,
      "t_int_ns": 300.0,
      "t_cycle_ns": 314.2,
      "t1f_ns": null,
      "t1e_us": 100.0,
      "readout_decay": true,
      "sigma_iq": 0.39,
      "centroids": [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.7320508075688772]],
      "repetitions": 19,
      "sweep_min_t1f_ns": 361.0,
      "readout_chi_mhz": 1.0,
      "readout_kappa_mhz": 5.5,
      "readout_tau_drive_ns": 142.0
    },
    "fit": { "model": "exp_decay", "with_offset": true, "t1e_us": null, "residual_threshold": 0.05 }
  })");
}

namespace detail {

inline bool same_kind(const json& a, const json& b) {
  if (a.is_null() || b.is_null()) return true;
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

inline void merge_into(json& base, const json& user, const std::string& prefix, std::vector<std::string>& errors) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) {
      errors.push_back("unknown key '" + key + "'");
      continue;
    }
    json& slot = base[it.key()];
    if (slot.is_object()) {
      if (!it.value().is_object()) {
        errors.push_back("key '" + key + "' must be a mapping");
        continue;
      }
      merge_into(slot, it.value(), key, errors);
      continue;
    }
    if (!same_kind(slot, it.value())) {
      errors.push_back("key '" + key + "' has the wrong type (expected " + std::string(slot.type_name()) + ")");
      continue;
    }
    slot = it.value();
  }
}

}  // namespace detail

/// Overlays user settings on the defaults. Every unknown or mistyped key is
/// reported in one ConfigError.
inline json resolve_config(const json& user) {
  json cfg = default_config();
  if (!user.is_null() && !user.is_object()) throw ConfigError("configuration root must be a mapping");
  std::vector<std::string> errors;
  if (!user.is_null()) detail::merge_into(cfg, user, "", errors);
  if (cfg["schema_version"] != schema_version)
    errors.push_back("unsupported schema_version (expected " + std::to_string(schema_version) + ")");
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

/// Parses a YAML-like scalar from the command line into JSON.
inline json parse_scalar(const std::string& text) {
  if (text == "null" || text == "~") return nullptr;
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

/// Applies a dotted-path override such as "filter.ripple_db=0.2".
inline void apply_override(json& user, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string path = assignment.substr(0, eq);
  json* node = &user;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    if (dot == std::string::npos) {
      (*node)[key] = parse_scalar(assignment.substr(eq + 1));
      break;
    }
    json& child = (*node)[key];
    if (!child.is_object()) child = json::object();
    node = &child;
    start = dot + 1;
  }
}

/// FNV-1a 64-bit hash of the compact resolved configuration.
inline std::string config_hash(const json& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : cfg.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

/// Output wrapper: metadata, the exact resolved config and the task payload.
inline json make_envelope(const std::string& subcommand, const json& cfg, json payload,
                          const std::vector<std::string>& side_files = {}) {
  json env;
  env["metadata"] = {{"tool", "lrufilter"},
                     {"version", tool_version},
                     {"subcommand", subcommand},
                     {"config_hash", config_hash(cfg)},
                     {"seed", cfg["seed"]},
                     {"n_exct", cfg["n_exct"]},
                     {"prng", prng_name},
                     {"timestamp_utc", utc_timestamp()}};
  env["config"] = cfg;
  env["payload"] = std::move(payload);
  env["files"] = side_files;
  return env;
}

inline double number_or(const json& v, double fallback) { return v.is_null() ? fallback : v.get<double>(); }

/// Filter spec from either band edges or center and bandwidth.
inline FilterSpec filter_from_config(const json& cfg) {
  const json& f = cfg.at("filter");
  FilterSpec spec;
  spec.order = f.at("order").get<int>();
  spec.ripple_db = f.at("ripple_db").get<double>();
  spec.kind = filter_kind_from_string(f.at("kind").get<std::string>());
  const bool centered = !f.at("center_ghz").is_null() || !f.at("bandwidth_ghz").is_null();
  if (centered) {
    if (f.at("center_ghz").is_null() || f.at("bandwidth_ghz").is_null())
      throw ConfigError("filter.center_ghz and filter.bandwidth_ghz must be given together");
    spec.omega0 = ghz_to_rad(f.at("center_ghz").get<double>());
    spec.delta_omega = ghz_to_rad(f.at("bandwidth_ghz").get<double>());
  } else {
    const double lo = f.at("lower_ghz").get<double>();
    const double hi = f.at("upper_ghz").get<double>();
    if (!(hi > lo)) throw ConfigError("filter.upper_ghz must exceed filter.lower_ghz");
    spec = FilterSpec::from_band_edges(spec.order, ghz_to_rad(lo), ghz_to_rad(hi), spec.ripple_db, spec.kind);
  }
  spec.validate();
  return spec;
}

inline DeviceParams device_from_config(const json& cfg) {
  DeviceParams p;
  p.filter = filter_from_config(cfg);
  const json& t = cfg.at("transmon");
  p.alpha = ghz_to_rad(t.at("alpha_ghz").get<double>());
  p.n_charge = t.at("n_charge").get<int>();
  p.levels = t.at("levels").get<int>();
  p.g = ghz_to_rad(cfg.at("coupling_ghz").get<double>());
  p.n_exct = cfg.at("n_exct").get<int>();
  p.t1 = cfg.at("intrinsic").at("t1_us").get<double>() * 1e-6;
  p.tphi = cfg.at("intrinsic").at("tphi_us").get<double>() * 1e-6;
  p.n_th = cfg.at("n_th").get<double>();
  p.filter_on = cfg.at("filter_on").get<bool>();
  p.validate();
  return p;
}

/// Explicit (E_C, E_J) if configured.
inline std::optional<TransmonSpec> explicit_transmon(const json& cfg) {
  const json& t = cfg.at("transmon");
  if (t.at("e_c_ghz").is_null() && t.at("e_j_ghz").is_null()) return std::nullopt;
  if (t.at("e_c_ghz").is_null() || t.at("e_j_ghz").is_null())
    throw ConfigError("transmon.e_c_ghz and transmon.e_j_ghz must be given together");
  TransmonSpec s{ghz_to_rad(t.at("e_c_ghz").get<double>()), ghz_to_rad(t.at("e_j_ghz").get<double>()),
                 t.at("n_charge").get<int>(), t.at("levels").get<int>()};
  s.validate();
  return s;
}

/// Sweep grid of bare qubit frequencies in GHz.
inline std::vector<double> sweep_from_config(const json& cfg) {
  const json& s = cfg.at("sweep");
  return stepped_grid(s.at("start_ghz").get<double>(), s.at("stop_ghz").get<double>(), s.at("step_ghz").get<double>());
}

inline PulseSpec pulse_from_config(const json& cfg, double alpha) {
  const json& p = cfg.at("pulse");
  PulseSpec spec;
  spec.t_g = p.at("t_g_ns").get<double>() * 1e-9;
  spec.sigma = number_or(p.at("sigma_ns"), 0.0) * 1e-9;
  spec.target = gate_target_from_string(p.at("target").get<std::string>());
  spec.amp = ghz_to_rad(number_or(p.at("amp_mhz"), 0.0) * 1e-3);
  spec.drag_lambda = p.at("drag_lambda").get<double>();
  spec.detuning = ghz_to_rad(p.at("detuning_mhz").get<double>() * 1e-3);
  spec.anharmonicity = alpha;
  spec.validate();
  return spec;
}

inline LruConfig lru_from_config(const json& cfg) {
  const json& l = cfg.at("lru");
  LruConfig c;
  c.n_meas = l.at("n_meas").get<int>();
  c.n_shots = l.at("n_shots").get<int>();
  c.calib_shots = l.at("calib_shots").get<int>();
  c.p_leak_g = l.at("p_leak_g").get<double>();
  c.p_leak_e = l.at("p_leak_e").get<double>();
  c.t_int = l.at("t_int_ns").get<double>() * 1e-9;
  c.t_cycle = l.at("t_cycle_ns").get<double>() * 1e-9;
  const double inf = std::numeric_limits<double>::infinity();
  c.t1f = l.at("t1f_ns").is_null() ? inf : l.at("t1f_ns").get<double>() * 1e-9;
  c.t1e = l.at("t1e_us").is_null() ? inf : l.at("t1e_us").get<double>() * 1e-6;
  c.readout_decay = l.at("readout_decay").get<bool>();
  c.sigma_iq = l.at("sigma_iq").get<double>();
  const json& cen = l.at("centroids");
  if (!cen.is_array() || cen.size() != 3) throw ConfigError("lru.centroids must list three [I, Q] pairs");
  for (std::size_t k = 0; k < 3; ++k) {
    if (!cen[k].is_array() || cen[k].size() != 2) throw ConfigError("lru.centroids entries must be [I, Q] pairs");
    c.centroids[k] = cplx(cen[k][0].get<double>(), cen[k][1].get<double>());
  }
  c.seed = cfg.at("seed").get<std::uint64_t>();
  if (!l.at("gamma_l").is_null() || !l.at("gamma_s").is_null()) {
    if (l.at("gamma_l").is_null() || l.at("gamma_s").is_null())
      throw ConfigError("lru.gamma_l and lru.gamma_s must be given together");
    c = config_for_rates(c, l.at("gamma_l").get<double>(), l.at("gamma_s").get<double>());
  }
  c.validate();
  return c;
}

}  // namespace lrufilter
