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

// Command-line front end: one subcommand per task, YAML configuration,
// JSON envelopes and CSV side files.

#include <yaml-cpp/yaml.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lrufilter/lrufilter.hpp"

namespace fs = std::filesystem;
using namespace lrufilter;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_fit = 4;

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      // quoted scalars carry the "!" tag and stay strings
      if (node.Tag() == "!") return node.Scalar();
      return parse_scalar(node.Scalar());
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return out;
    }
  }
  return nullptr;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return yaml_to_json(YAML::LoadFile(path));
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read configuration file '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw ConfigError("configuration file '" + path + "' is not valid YAML: " + e.what());
  }
}

double ghz(double rad) { return rad_to_ghz(rad); }

json to_json(const RVector& v, double scale = 1.0) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i) * scale);
  return out;
}

json to_json(const RMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double x = m(i, j);
      row.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    }
    out.push_back(row);
  }
  return out;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Output {
 public:
  Output(fs::path dir, std::string stem) : dir_(std::move(dir)), stem_(std::move(stem)) {
    fs::create_directories(dir_);
  }

  /// Writes a CSV side file named <stem>_<suffix>.csv.
  void csv(const std::string& suffix, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    const std::string name = stem_ + "_" + suffix + ".csv";
    std::ofstream out(dir_ / name);
    if (!out) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    files_.push_back(name);
  }

  void envelope(const std::string& subcommand, const json& cfg, json payload) {
    const json env = make_envelope(subcommand, cfg, std::move(payload), files_);
    std::ofstream out(dir_ / (stem_ + ".json"));
    if (!out) throw ConfigError("cannot write '" + (dir_ / (stem_ + ".json")).string() + "'");
    out << env.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::string stem_;
  std::vector<std::string> files_;
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream s;
  s.precision(std::numeric_limits<double>::max_digits10);
  s << x;
  return s.str();
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::vector<double> grid_from_config(const json& cfg) {
  const json& g = cfg.at("grid");
  const int points = g.at("points").get<int>();
  if (points < 2) throw ConfigError("grid.points must be >= 2");
  const double lo = g.at("start_ghz").get<double>();
  const double hi = g.at("stop_ghz").get<double>();
  if (!(hi > lo)) throw ConfigError("grid.stop_ghz must exceed grid.start_ghz");
  return linspace(lo, hi, static_cast<std::size_t>(points));
}

std::vector<double> to_rad(const std::vector<double>& f_ghz) {
  std::vector<double> out;
  for (double f : f_ghz) out.push_back(ghz_to_rad(f));
  return out;
}

/// The qubit a single-point task runs on.
struct Qubit {
  std::optional<TransmonSpec> spec;
  double omega_ge = 0.0;
  std::string source;
};

Qubit qubit_from_config(const json& cfg, const DeviceParams& p) {
  Qubit q;
  q.spec = explicit_transmon(cfg);
  if (q.spec) {
    q.omega_ge = diagonalize_transmon(*q.spec).omega_ge;
    q.source = "explicit E_C, E_J";
  } else if (!cfg.at("transmon").at("omega_ge_ghz").is_null()) {
    q.omega_ge = ghz_to_rad(cfg.at("transmon").at("omega_ge_ghz").get<double>());
    q.source = "configured omega_ge";
  } else {
    q.omega_ge = fgr_operating_point(p, to_rad(sweep_from_config(cfg)));
    q.source = "smallest golden-rule T1,f on the sweep grid";
  }
  return q;
}

Device device_for(const DeviceParams& p, const Qubit& q, double frame) {
  return q.spec ? build_device(p, *q.spec, frame) : build_device(p, q.omega_ge, frame);
}

json transmon_json(const Device& d) {
  return {{"e_c_ghz", ghz(d.transmon.e_c)},
          {"e_j_ghz", ghz(d.transmon.e_j)},
          {"omega_ge_ghz", ghz(d.eig.omega_ge)},
          {"omega_ef_ghz", ghz(d.eig.omega_ef)},
          {"alpha_ghz", ghz(d.eig.alpha)},
          {"levels_ghz", to_json(d.eig.energies, 1.0 / (two_pi * 1e9))},
          {"charge_elements", to_json(d.eig.charge_elements)},
          {"warnings", d.eig.warnings}};
}

void dump_operators(Output& out, const SystemOperators& ops) {
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < ops.h0.rows(); ++i)
    for (Eigen::Index j = 0; j < ops.h0.cols(); ++j) {
      const cplx v = ops.h0(i, j) / (two_pi * 1e9);
      if (v != cplx(0.0, 0.0)) rows.push_back({std::to_string(i), std::to_string(j), num(v.real()), num(v.imag())});
    }
  out.csv("h0", {"row", "col", "re_ghz", "im_ghz"}, rows);
  std::vector<std::vector<std::string>> basis;
  for (std::size_t i = 0; i < ops.basis.dimension(); ++i) {
    const BasisState& s = ops.basis.state(i);
    std::string modes;
    for (std::size_t k = 0; k < s.modes.size(); ++k) modes += (k ? " " : "") + std::to_string(s.modes[k]);
    basis.push_back({std::to_string(i), std::to_string(s.t), modes});
  }
  out.csv("basis", {"index", "transmon", "modes"}, basis);
}

json fit_report_json(const FitReport& r) {
  return {{"params", to_json(r.params)},
          {"covariance", to_json(r.covariance)},
          {"residual_rms", r.residual_rms},
          {"converged", r.converged},
          {"identifiable", r.identifiable},
          {"note", r.note}};
}

json pleak_json(const PleakFit& f) {
  return {{"gamma_l", f.gamma_l},
          {"gamma_s", f.gamma_s},
          {"covariance", to_json(f.covariance)},
          {"residual_rms", f.residual_rms},
          {"converged", f.converged},
          {"identifiable", f.identifiable},
          {"note", f.note}};
}

// ---------------------------------------------------------------- subcommands

struct Context {
  json cfg;
  Output* out = nullptr;
  bool dump_ops = false;
  std::string iq_input;
  std::string calib_input;
  std::string fit_input;
  std::string fit_model;
};

json run_synth(const Context& c) {
  const FilterSpec spec = filter_from_config(c.cfg);
  const FilterModel model = synthesize(spec);
  const RVector modes = filter_mode_frequencies(model);
  std::vector<std::vector<std::string>> rows;
  for (double f : grid_from_config(c.cfg)) rows.push_back({num(f), num(s12_magnitude_sq(spec, ghz_to_rad(f)))});
  c.out->csv("s12", {"frequency_GHz", "s12_sq"}, rows);
  const double scale = 1.0 / (two_pi * 1e9);
  return {{"order", spec.order},
          {"center_ghz", ghz(spec.omega0)},
          {"bandwidth_ghz", ghz(spec.delta_omega)},
          {"lower_edge_ghz", ghz(spec.lower_edge())},
          {"upper_edge_ghz", ghz(spec.upper_edge())},
          {"ripple_db", spec.ripple_db},
          {"eta", spec.eta()},
          {"kind", to_string(spec.kind)},
          {"site_frequencies_ghz", to_json(model.omega, scale)},
          {"couplings_ghz", to_json(model.J, scale)},
          {"kappa_f_ghz", ghz(model.kappa_f)},
          {"mode_frequencies_ghz", to_json(modes, scale)}};
}

json run_dos(const Context& c) {
  const FilterSpec spec = filter_from_config(c.cfg);
  const FilterModel model = synthesize(spec);
  const auto f = grid_from_config(c.cfg);
  const LdosCurve curve = ldos_curve(model, to_rad(f));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < f.size(); ++i) rows.push_back({num(f[i]), num(curve.rho[i] * two_pi * 1e9)});
  c.out->csv("ldos", {"frequency_GHz", "ldos_per_GHz"}, rows);
  return {{"grid_integral", ldos_integral(model, ghz_to_rad(f.front()), ghz_to_rad(f.back()))},
          {"total_integral", ldos_integral(model, -1e300, 1e300)},
          {"kappa_f_ghz", ghz(model.kappa_f)}};
}

json rates_json(const RatePrediction& r, const DeviceParams& p) {
  json out = {{"omega_ge_ghz", ghz(r.omega_ge)},
              {"omega_ef_ghz", ghz(r.omega_ef)},
              {"gamma_eg_per_s", r.gamma_eg},
              {"gamma_fe_per_s", r.gamma_fe},
              {"t1e_s", 1.0 / (r.gamma_eg + 1.0 / p.t1)},
              {"t1f_s", 1.0 / (r.gamma_fe + 2.0 / p.t1)}};
  out["gamma_hf_per_s"] = r.gamma_hf ? json(*r.gamma_hf) : json(nullptr);
  return out;
}

json run_rates(const Context& c) {
  const DeviceParams p = device_from_config(c.cfg);
  const Qubit q = qubit_from_config(c.cfg, p);
  const Device d = device_for(p, q, q.omega_ge);
  double w = q.omega_ge;
  json dressed_info = nullptr;
  if (c.cfg.at("rates").at("dressed_frequency").get<bool>()) {
    const DressedStates ds = find_dressed_states(d.system.ops);
    w = ds.omega_ge_dressed;
    dressed_info = {{"omega_ge_dressed_ghz", ghz(ds.omega_ge_dressed)}, {"overlap_sq", ds.overlap_sq}};
  }
  if (c.dump_ops) dump_operators(*c.out, d.system.ops);
  const RatePrediction r = fgr_rates(d.eig, d.model, p.filter_on ? p.g : 0.0, w);
  return {{"qubit_source", q.source},
          {"transmon", transmon_json(d)},
          {"dressed", dressed_info},
          {"rates", rates_json(r, p)}};
}

json run_compare(const Context& c, bool& flagged) {
  const DeviceParams p = device_from_config(c.cfg);
  const auto f = sweep_from_config(c.cfg);
  CompareOptions opt;
  opt.points = c.cfg.at("rates").at("points").get<int>();
  const auto rows = compare_fgr_vs_full(p, to_rad(f), opt);
  std::vector<std::vector<std::string>> csv;
  json table = json::array();
  for (const auto& r : rows) {
    csv.push_back({num(r.f_ghz), num(r.fgr_t1e), num(r.full_t1e), num(r.fgr_t1f), num(r.full_t1f), num(r.ratio),
                   r.band_edge ? "1" : "0", r.fit_ok ? "1" : "0", quote(r.message)});
    table.push_back({{"f_ghz", r.f_ghz},
                     {"ratio", finite_or_null(r.ratio)},
                     {"band_edge", r.band_edge},
                     {"fit_ok", r.fit_ok},
                     {"dressed_overlap", r.dressed_overlap},
                     {"message", r.message}});
    if (!r.fit_ok) flagged = true;
  }
  c.out->csv("compare", {"f_GHz", "fgr_T1e", "full_T1e", "fgr_T1f", "full_T1f", "ratio", "band_edge", "fit_ok", "message"},
             csv);
  return {{"lifetime_unit", "s"}, {"rows", table}};
}

json run_sweep(const Context& c) {
  const DeviceParams p = device_from_config(c.cfg);
  const FilterModel model = synthesize(p.filter);
  const auto f = sweep_from_config(c.cfg);
  const double j_min = model.J.size() > 0 ? model.J.minCoeff() : 0.0;
  std::vector<std::vector<std::string>> csv(f.size());
  parallel_for(f.size(), [&](std::size_t i) {
    const TransmonSpec spec = invert_targets(ghz_to_rad(f[i]), p.alpha, p.n_charge, p.levels);
    const TransmonEigensystem eig = diagonalize_transmon(spec);
    const RatePrediction r = fgr_rates(eig, model, p.filter_on ? p.g : 0.0);
    const double edge = std::min(std::abs(r.omega_ef - p.filter.upper_edge()), std::abs(r.omega_ef - p.filter.lower_edge()));
    csv[i] = {num(f[i]),
              num(ghz(r.omega_ef)),
              num(ghz(spec.e_c)),
              num(ghz(spec.e_j)),
              num(r.gamma_eg),
              num(r.gamma_fe),
              num(1.0 / (r.gamma_eg + 1.0 / p.t1)),
              num(1.0 / (r.gamma_fe + 2.0 / p.t1)),
              edge <= 2.0 * j_min ? "1" : "0"};
  });
  c.out->csv("sweep",
             {"f_GHz", "f_ef_GHz", "E_C_GHz", "E_J_GHz", "gamma_eg", "gamma_fe", "fgr_T1e", "fgr_T1f", "band_edge"}, csv);
  return {{"rows", f.size()}, {"lifetime_unit", "s"}, {"rate_unit", "1/s"}};
}

json run_evolve(const Context& c) {
  const DeviceParams p = device_from_config(c.cfg);
  const Qubit q = qubit_from_config(c.cfg, p);
  const json& frame_cfg = c.cfg.at("frame_ghz");
  const double frame = frame_cfg.is_null() ? q.omega_ge : ghz_to_rad(frame_cfg.get<double>());
  const Device d = device_for(p, q, frame);
  if (c.dump_ops) dump_operators(*c.out, d.system.ops);
  const json& e = c.cfg.at("evolve");
  const DressedStates dressed = find_dressed_states(d.system.ops);
  const std::string initial = e.at("initial").get<std::string>();
  CMatrix rho0;
  if (initial == "vacuum") {
    rho0 = pure_state(dressed.g);
  } else if (initial == "e") {
    rho0 = pure_state(dressed.e);
  } else if (initial == "f") {
    rho0 = pure_state(bare_transmon_state(d.system.ops.basis, 2));
  } else if (initial == "superposition") {
    rho0 = pure_state(((dressed.g + dressed.e) / std::sqrt(2.0)).eval());
  } else {
    throw ConfigError("evolve.initial must be vacuum, e, f or superposition");
  }
  const double duration = e.at("duration_ns").get<double>() * 1e-9;
  const int points = e.at("points").get<int>();
  if (!(duration > 0.0) || points < 2) throw ConfigError("evolve.duration_ns and evolve.points must be positive");
  const auto grid = linspace(0.0, duration, static_cast<std::size_t>(points));
  EvolveOptions eo;
  eo.rtol = e.at("rtol").get<double>();
  eo.atol = e.at("atol").get<double>();
  eo.dressed = &dressed;
  const std::string method = e.at("method").get<std::string>();
  EvolutionResult res;
  if (method == "auto" || method == "static") {
    res = evolve_static(d.system, rho0, grid, eo);
  } else if (method == "dop853") {
    res = evolve(d.system, rho0, std::nullopt, grid, eo);
  } else {
    throw ConfigError("evolve.method must be auto, static or dop853");
  }
  std::vector<std::string> header{"time_ns"};
  for (const auto& [name, _] : res.observables) header.push_back(name);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    std::vector<std::string> row{num(res.times[i] * 1e9)};
    for (const auto& [_, series] : res.observables) row.push_back(num(series[i]));
    rows.push_back(std::move(row));
  }
  c.out->csv("observables", header, rows);
  return {{"qubit_source", q.source},
          {"transmon", transmon_json(d)},
          {"dimension", d.system.ops.dimension()},
          {"frame_ghz", ghz(frame)},
          {"omega_ge_dressed_ghz", ghz(dressed.omega_ge_dressed)},
          {"dressed_overlap", dressed.overlap_sq},
          {"hybridized", dressed.hybridized},
          {"trace_drift", res.trace_drift},
          {"hermiticity_drift", res.hermiticity_drift},
          {"min_eigenvalue_final", res.min_eigenvalue_final},
          {"settle_time_s", res.settle_time},
          {"steps_accepted", res.stats.accepted},
          {"steps_rejected", res.stats.rejected}};
}

json gate_json(const GateResult& r) {
  return {{"avg_fidelity", r.avg_fidelity},
          {"avg_infidelity", r.avg_infidelity},
          {"leakage_out", r.leakage_out},
          {"transient_two_exct_max", r.transient_two_exct_max},
          {"state_fidelities", r.state_fidelities}};
}

json pulse_json(const PulseSpec& p) {
  return {{"t_g_ns", p.t_g * 1e9},
          {"sigma_ns", p.width() * 1e9},
          {"amp_mhz", ghz(p.amp) * 1e3},
          {"drag_lambda", p.drag_lambda},
          {"detuning_mhz", ghz(p.detuning) * 1e3},
          {"anharmonicity_ghz", ghz(p.anharmonicity)},
          {"target", to_string(p.target)}};
}

json run_gate_opt(const Context& c) {
  const DeviceParams p = device_from_config(c.cfg);
  const Qubit q = qubit_from_config(c.cfg, p);
  const Device d = device_for(p, q, q.omega_ge);
  const DressedStates dressed = find_dressed_states(d.system.ops);
  LindbladSystem sys = d.system;
  sys.ops = with_frame(sys.ops, dressed.omega_ge_dressed);
  if (c.dump_ops) dump_operators(*c.out, sys.ops);

  const json& pc = c.cfg.at("pulse");
  PulseSpec pulse = pulse_from_config(c.cfg, d.eig.alpha);
  GateOptions go;
  go.rtol = pc.at("rtol").get<double>();
  go.atol = 1e-2 * go.rtol;
  go.renormalized = pc.at("renormalized").get<bool>();
  go.transient_points = pc.at("transient_points").get<int>();

  GateResult result;
  json opt_info = nullptr;
  if (pc.at("optimize").get<bool>()) {
    DragOptions dopt;
    dopt.max_evaluations = pc.at("max_evaluations").get<int>();
    dopt.size_tolerance = pc.at("size_tolerance").get<double>();
    dopt.gate = go;
    const DragOptimization o = optimize_drag(sys, dressed, pulse, dopt);
    pulse = o.pulse;
    result = o.result;
    opt_info = {{"evaluations", o.evaluations}, {"converged", o.converged}};
  } else {
    if (pc.at("amp_mhz").is_null()) pulse.amp = calibrate_amplitude(sys, dressed, pulse, go);
    result = simulate_gate(sys, dressed, pulse, go);
  }

  std::vector<std::string> header{"time_ns"};
  for (const auto& [name, _] : result.transient) header.push_back(name);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < result.transient_times.size(); ++i) {
    std::vector<std::string> row{num(result.transient_times[i] * 1e9)};
    for (const auto& [_, series] : result.transient) row.push_back(num(series[i]));
    rows.push_back(std::move(row));
  }
  c.out->csv("transient", header, rows);
  const double t1 = p.t1;
  const double t2 = 1.0 / (0.5 / t1 + 1.0 / p.tphi);
  return {{"qubit_source", q.source},
          {"filter_on", p.filter_on},
          {"omega_ge_ghz", ghz(q.omega_ge)},
          {"omega_ge_dressed_ghz", ghz(dressed.omega_ge_dressed)},
          {"dimension", sys.ops.dimension()},
          {"pulse", pulse_json(pulse)},
          {"gate", gate_json(result)},
          {"optimization", opt_info},
          {"intrinsic_coherence_limit", coherence_limit(pulse.t_g, t1, t2)}};
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

double cell_number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.find_last_not_of(' ') + 1) throw ConfigError(where + ": '" + s + "' is not a number");
  return v;
}

/// Numeric rows, skipping a single non-numeric header line.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t columns) {
  const auto rows = read_csv_rows(path, columns);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> vals;
    try {
      for (const auto& cell : rows[i]) vals.push_back(cell_number(cell, path + " row " + std::to_string(i + 1)));
    } catch (const ConfigError&) {
      if (i == 0) continue;
      throw;
    }
    out.push_back(std::move(vals));
  }
  if (out.empty()) throw ConfigError("'" + path + "' holds no data rows");
  return out;
}

json run_lru_sim(const Context& c, bool& flagged) {
  LruConfig lc = lru_from_config(c.cfg);
  LruRecord rec;
  const bool imported = !c.iq_input.empty();
  if (imported) {
    if (c.calib_input.empty()) throw ConfigError("--iq-input needs --calib-input (label, I, Q)");
    std::vector<IqSample> samples;
    for (const auto& r : read_numeric_csv(c.iq_input, 4))
      samples.push_back({static_cast<int>(r[0]), static_cast<int>(r[1]), cplx(r[2], r[3])});
    std::array<std::vector<cplx>, 3> clouds;
    for (const auto& r : read_numeric_csv(c.calib_input, 3)) {
      const int label = static_cast<int>(r[0]);
      if (label < 0 || label > 2 || r[0] != label) throw ConfigError("calibration labels must be 0, 1 or 2");
      clouds[static_cast<std::size_t>(label)].push_back(cplx(r[1], r[2]));
    }
    rec = record_from_iq(samples, clouds);
  } else {
    rec = simulate_shots(lc);
  }

  std::vector<std::vector<std::string>> rows;
  for (int m = 0; m < rec.n_meas; ++m) {
    const auto i = static_cast<std::size_t>(m);
    rows.push_back({std::to_string(m + 1), num(rec.p_leak_raw[i]), num(rec.p_leak_mitigated[i]),
                    imported ? "nan" : num(rec.p_leak_truth[i])});
  }
  c.out->csv("series", {"m", "p_leak_raw", "p_leak_mitigated", "p_leak_truth"}, rows);
  if (!rec.fit.converged || !rec.fit.identifiable) flagged = true;

  json centroids = json::array();
  for (const auto& z : rec.calib_centroids) centroids.push_back({z.real(), z.imag()});
  json payload = {{"source", imported ? "imported IQ record" : "simulation"},
                  {"n_shots", rec.n_shots},
                  {"n_meas", rec.n_meas},
                  {"fit", pleak_json(rec.fit)},
                  {"fit_raw", pleak_json(rec.fit_raw)},
                  {"assignment_matrix", to_json(RMatrix(rec.assignment_matrix))},
                  {"condition_number", rec.condition_number},
                  {"calib_centroids", centroids},
                  {"warnings", rec.warnings}};
  if (!imported) {
    payload["model"] = {{"p_leak", 0.5 * (lc.p_leak_g + lc.p_leak_e)},
                        {"seep_probability", lc.seep_probability()},
                        {"sigma_iq", lc.sigma_iq}};
    const int reps = c.cfg.at("lru").at("repetitions").get<int>();
    if (reps > 0) {
      // seepage versus qubit frequency with the coupling set by the minimum T1,f
      DeviceParams p = device_from_config(c.cfg);
      const auto f = sweep_from_config(c.cfg);
      const auto w = to_rad(f);
      const double target = c.cfg.at("lru").at("sweep_min_t1f_ns").get<double>() * 1e-9;
      p.g = calibrate_coupling_to_t1f(p, w, target);
      const FilterModel model = synthesize(p.filter);
      std::vector<double> t1f(f.size());
      parallel_for(f.size(), [&](std::size_t i) {
        const auto eig = diagonalize_transmon(invert_targets(w[i], p.alpha, p.n_charge, p.levels));
        t1f[i] = 1.0 / (fgr_rates(eig, model, p.g, w[i]).gamma_fe + 2.0 / p.t1);
      });
      const auto sweep = sweep_seepage_vs_frequency(lc, f, t1f, reps);
      std::vector<std::vector<std::string>> table;
      for (const auto& r : sweep)
        table.push_back({num(r.f_ghz), num(r.t1f * 1e9), num(r.gamma_l), num(r.gamma_s), std::to_string(r.failed)});
      c.out->csv("seepage_sweep", {"f_GHz", "T1f_ns", "gamma_l", "gamma_s", "failed"}, table);
      payload["sweep"] = {{"coupling_ghz", ghz(p.g)}, {"repetitions", reps}};
    }
  }
  return payload;
}

json run_fit(const Context& c, bool& flagged) {
  const json& fc = c.cfg.at("fit");
  const std::string model = c.fit_model.empty() ? fc.at("model").get<std::string>() : c.fit_model;
  if (c.fit_input.empty()) throw ConfigError("fit needs --input with (x, y) columns");
  std::vector<double> x, y;
  for (const auto& r : read_numeric_csv(c.fit_input, 2)) {
    x.push_back(r[0]);
    y.push_back(r[1]);
  }
  json payload = {{"model", model}, {"points", x.size()}};
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  double residual = 0.0;
  if (model == "exp_decay") {
    const DecayFit f = fit_exp_decay(x, y, fc.at("with_offset").get<bool>());
    payload["amplitude"] = f.amplitude;
    payload["tau"] = f.tau;
    payload["tau_stderr"] = f.tau_stderr;
    payload["offset"] = f.offset;
    payload["report"] = fit_report_json(f.report);
    residual = f.report.residual_rms;
  } else if (model == "t2_offdiag") {
    if (fc.at("t1e_us").is_null()) throw ConfigError("the t2_offdiag model needs fit.t1e_us (x in us)");
    const double t1e = fc.at("t1e_us").get<double>();
    const DecayFit f = fit_exp_decay(x, y, false);
    const double excess = 1.0 / f.tau - 1.0 / (2.0 * t1e);
    if (!(excess > 0.0)) throw FitError("coherence decay is not faster than the T1 limit");
    payload["amplitude"] = f.amplitude;
    payload["t2_us"] = 1.0 / excess;
    payload["t2_stderr_us"] = f.tau_stderr / (f.tau * f.tau * excess * excess);
    payload["report"] = fit_report_json(f.report);
    residual = f.report.residual_rms;
  } else if (model == "pleak") {
    const PleakFit f = fit_pleak(x, y);
    payload["fit"] = pleak_json(f);
    residual = f.residual_rms;
    if (!f.identifiable || !f.converged) flagged = true;
  } else {
    throw ConfigError("fit model must be exp_decay, t2_offdiag or pleak");
  }
  const double relative = scale > 0.0 ? residual / scale : 0.0;
  const bool mismatch = relative > fc.at("residual_threshold").get<double>();
  payload["relative_residual"] = relative;
  payload["model_mismatch"] = mismatch;
  if (mismatch) flagged = true;
  return payload;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmon-filter leakage and gate simulations"};
  app.set_version_flag("--version", tool_version);
  std::string config_path, out_dir = ".", iq_input, calib_input, fit_input, fit_model;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool best_effort = false, print_config = false, no_filter = false, dump_ops = false;
  app.add_option("-c,--config", config_path, "YAML configuration file");
  app.add_option("--set", overrides, "override a key, e.g. --set filter.ripple_db=0.2")->allow_extra_args(false);
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for stochastic tasks");
  app.add_flag("--best-effort", best_effort, "exit 0 even if some fits were flagged");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  app.add_flag("--no-filter", no_filter, "decouple the qubit from the filter");
  app.add_flag("--dump-operators", dump_ops, "write H0 and the basis as CSV");
  app.add_option("--iq-input", iq_input, "lru-sim: CSV of (shot, meas_index, I, Q)");
  app.add_option("--calib-input", calib_input, "lru-sim: CSV of (label, I, Q) calibration shots");
  app.add_option("--input", fit_input, "fit: CSV of (x, y)");
  app.add_option("--model", fit_model, "fit: exp_decay, t2_offdiag or pleak");
  const std::vector<std::pair<std::string, std::string>> commands{
      {"synth", "synthesize the filter and its |S12|^2"},
      {"dos", "local density of states of the first filter site"},
      {"rates", "golden-rule decay rates at one qubit frequency"},
      {"compare", "golden-rule versus master-equation lifetimes over the sweep"},
      {"evolve", "free master-equation evolution"},
      {"gate-opt", "DRAG gate optimization"},
      {"sweep", "golden-rule rates over the sweep grid"},
      {"lru-sim", "repeated-measurement leakage experiment"},
      {"fit", "offline fit of imported data"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    json user = load_config_file(config_path);
    for (const auto& o : overrides) apply_override(user, o);
    if (seed) user["seed"] = *seed;
    if (no_filter) user["filter_on"] = false;
    const json cfg = resolve_config(user);
    if (print_config) {
      std::cout << cfg.dump(2) << '\n';
      return exit_ok;
    }
    if (app.get_subcommands().empty()) throw ConfigError("a subcommand is required (see --help)");
    const std::string sub = app.get_subcommands().front()->get_name();
    std::string stem = sub;
    if (sub == "gate-opt" && !cfg.at("filter_on").get<bool>()) stem += "_nofilter";
    Output out(out_dir, stem);
    Context ctx{cfg, &out, dump_ops, iq_input, calib_input, fit_input, fit_model};
    bool flagged = false;
    json payload;
    if (sub == "synth") payload = run_synth(ctx);
    else if (sub == "dos") payload = run_dos(ctx);
    else if (sub == "rates") payload = run_rates(ctx);
    else if (sub == "compare") payload = run_compare(ctx, flagged);
    else if (sub == "evolve") payload = run_evolve(ctx);
    else if (sub == "gate-opt") payload = run_gate_opt(ctx);
    else if (sub == "sweep") payload = run_sweep(ctx);
    else if (sub == "lru-sim") payload = run_lru_sim(ctx, flagged);
    else payload = run_fit(ctx, flagged);
    payload["flagged"] = flagged;
    out.envelope(sub, cfg, payload);
    if (flagged && !best_effort) {
      std::cerr << "lrufilter: " << sub << " flagged fit failures (see output; --best-effort to accept)\n";
      return exit_fit;
    }
    return exit_ok;
  } catch (const ConfigError& e) {
    std::cerr << "lrufilter: configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const json::exception& e) {
    std::cerr << "lrufilter: configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "lrufilter: configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const FitError& e) {
    std::cerr << "lrufilter: fit failure: " << e.what() << '\n';
    return exit_fit;
  } catch (const NumericError& e) {
    std::cerr << "lrufilter: numeric failure: " << e.what() << '\n';
    return exit_numeric;
  }
}
