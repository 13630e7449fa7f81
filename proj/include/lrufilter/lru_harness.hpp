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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "lrufilter/common.hpp"
#include "lrufilter/fitting.hpp"

namespace lrufilter {

enum Label : std::uint8_t { label_g = 0, label_e = 1, label_f = 2 };

/// Repeated (X_pi/2, measure) cycles with per-measurement leakage and
/// f-to-e seepage. Times in s; a non-finite lifetime disables that decay.
struct LruConfig {
  int n_meas = 60;
  int n_shots = 5000;
  int calib_shots = 5000;
  double p_leak_g = 0.0;
  double p_leak_e = 0.0;
  double t_int = 300e-9;
  double t_cycle = 300e-9 + 14.2e-9;
  double t1f = std::numeric_limits<double>::infinity();
  double t1e = std::numeric_limits<double>::infinity();
  bool readout_decay = true;  ///< e->g decay during the readout window
  std::array<cplx, 3> centroids{cplx(-1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, std::sqrt(3.0))};
  double sigma_iq = 0.39;
  std::uint64_t seed = 1;

  void validate() const {
    const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(p_leak_g) || !prob(p_leak_e)) throw ConfigError("leakage probabilities must lie in [0, 1]");
    if (n_meas < 2) throw ConfigError("n_meas must be >= 2");
    if (n_shots < 1 || calib_shots < 1) throw ConfigError("shot counts must be positive");
    if (!(t_cycle > 0.0) || !(t_int >= 0.0)) throw ConfigError("cycle and readout times must be positive");
    if (!(t1f > 0.0) || !(t1e > 0.0)) throw ConfigError("lifetimes must be positive");
    if (!(sigma_iq >= 0.0)) throw ConfigError("IQ noise must be nonnegative");
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (centroids[static_cast<std::size_t>(i)] == centroids[static_cast<std::size_t>(j)])
          throw ConfigError("IQ centroids must be pairwise distinct");
  }

  /// Per-cycle f->e probability.
  double seep_probability() const { return std::isfinite(t1f) ? 1.0 - std::exp(-t_cycle / t1f) : 0.0; }
};

/// Configuration reproducing per-measurement rates gamma_l, gamma_s under the
/// cycle model: p_leak = 1 - exp(-gamma_l), t1f = t_cycle / gamma_s.
inline LruConfig config_for_rates(LruConfig base, double gamma_l, double gamma_s) {
  base.p_leak_g = base.p_leak_e = 1.0 - std::exp(-gamma_l);
  base.t1f = gamma_s > 0.0 ? base.t_cycle / gamma_s : std::numeric_limits<double>::infinity();
  return base;
}

/// Gaussian IQ width giving a nearest-neighbour misassignment probability
/// `per_neighbour` between two centroids a distance d apart.
inline double sigma_for_confusion(double d, double per_neighbour) {
  // Q(x) = per_neighbour with Q the standard normal tail; bisect on erfc
  double lo = 1e-3, hi = 50.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(mid / std::sqrt(2.0)) > per_neighbour ? lo : hi) = mid;
  }
  return 0.5 * d / (0.5 * (lo + hi));
}

struct MitigationResult {
  std::vector<std::array<double, 3>> mitigated;
  double condition_number = 0.0;
  bool ill_conditioned = false;
};

/// Euclidean projection of v onto the probability simplex.
inline std::array<double, 3> project_to_simplex(const std::array<double, 3>& v) {
  std::array<double, 3> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0;
  double theta = 0.0;
  for (int i = 0; i < 3; ++i) {
    css += u[static_cast<std::size_t>(i)];
    const double t = (css - 1.0) / (i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
  }
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

/// p = A^{-T} f for each frequency vector f, then projection onto the simplex.
/// A[i][j] = P(assigned j | prepared i).
inline MitigationResult mitigate(const std::vector<std::array<double, 3>>& freqs, const Eigen::Matrix3d& a) {
  MitigationResult out;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(a);
  const auto sv = svd.singularValues();
  out.condition_number = sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
  out.ill_conditioned = !(out.condition_number <= 1e3);
  if (!std::isfinite(out.condition_number)) throw NumericError("assignment matrix is singular");
  const Eigen::PartialPivLU<Eigen::Matrix3d> lu(a.transpose());
  out.mitigated.reserve(freqs.size());
  for (const auto& f : freqs) {
    const Eigen::Vector3d p = lu.solve(Eigen::Vector3d(f[0], f[1], f[2]));
    out.mitigated.push_back(project_to_simplex({p(0), p(1), p(2)}));
  }
  return out;
}

/// splitmix64 finalizer, used to derive independent per-shot seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline constexpr const char* prng_name = "mt19937_64 per shot, seeded by splitmix64(seed, shot)";

struct LruRecord {
  int n_shots = 0;
  int n_meas = 0;
  std::vector<std::uint8_t> assignments;  ///< shot-major, n_shots x n_meas
  std::vector<std::uint8_t> truth;        ///< state label at each measurement
  std::array<cplx, 3> calib_centroids{};
  Eigen::Matrix3d assignment_matrix = Eigen::Matrix3d::Identity();
  double condition_number = 1.0;
  std::vector<std::string> warnings;
  std::vector<double> p_leak_raw;        ///< assigned-f fraction
  std::vector<double> p_leak_mitigated;
  std::vector<double> p_leak_truth;
  PleakFit fit;      ///< on the mitigated series
  PleakFit fit_raw;  ///< on the raw series

  std::uint8_t assignment(int shot, int m) const {
    return assignments[static_cast<std::size_t>(shot) * static_cast<std::size_t>(n_meas) + static_cast<std::size_t>(m)];
  }
};

namespace detail {

inline std::uint8_t nearest_centroid(cplx z, const std::array<cplx, 3>& c) {
  std::uint8_t best = 0;
  double best_d = std::norm(z - c[0]);
  for (std::uint8_t k = 1; k < 3; ++k) {
    const double d = std::norm(z - c[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

inline cplx emit(std::mt19937_64& rng, const LruConfig& cfg, std::uint8_t label) {
  const cplx mean = cfg.centroids[label];
  if (cfg.sigma_iq == 0.0) return mean;
  std::normal_distribution<double> noise(0.0, cfg.sigma_iq);
  const double i = noise(rng);
  const double q = noise(rng);
  return mean + cplx(i, q);
}

/// Decay applied before the IQ sample is taken.
inline std::uint8_t readout_decay(std::mt19937_64& rng, const LruConfig& cfg, std::uint8_t label) {
  if (!cfg.readout_decay) return label;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (label == label_e && std::isfinite(cfg.t1e) && u(rng) < 1.0 - std::exp(-cfg.t_int / cfg.t1e)) return label_g;
  return label;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

}  // namespace detail

inline void calibrate_from_clouds(const std::array<std::vector<cplx>, 3>& clouds, LruRecord& rec);

/// Calibration: prepare g, e, f, read out, take per-label median IQ centroids
/// and the assignment matrix. The f preparation decays with t1f over t_int.
inline void calibrate_readout(const LruConfig& cfg, LruRecord& rec) {
  std::array<std::vector<cplx>, 3> clouds;
  for (std::uint8_t prep = 0; prep < 3; ++prep) {
    clouds[prep].resize(static_cast<std::size_t>(cfg.calib_shots));
    for (int s = 0; s < cfg.calib_shots; ++s) {
      std::mt19937_64 rng(substream_seed(cfg.seed, (std::uint64_t{1} << 40) * (prep + 1) + static_cast<std::uint64_t>(s)));
      std::uint8_t label = prep;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (label == label_f && cfg.readout_decay && std::isfinite(cfg.t1f) &&
          u(rng) < 1.0 - std::exp(-cfg.t_int / cfg.t1f))
        label = label_e;
      label = detail::readout_decay(rng, cfg, label);
      clouds[prep][static_cast<std::size_t>(s)] = detail::emit(rng, cfg, label);
    }
  }
  calibrate_from_clouds(clouds, rec);
}

/// Median centroids and assignment matrix from labelled calibration clouds.
inline void calibrate_from_clouds(const std::array<std::vector<cplx>, 3>& clouds, LruRecord& rec) {
  for (std::size_t k = 0; k < 3; ++k) {
    if (clouds[k].empty()) throw ConfigError("calibration data lacks shots prepared in state " + std::to_string(k));
    std::vector<double> re, im;
    for (const auto& z : clouds[k]) {
      re.push_back(z.real());
      im.push_back(z.imag());
    }
    rec.calib_centroids[k] = cplx(detail::median(re), detail::median(im));
  }
  rec.assignment_matrix.setZero();
  for (std::size_t k = 0; k < 3; ++k) {
    for (const auto& z : clouds[k])
      rec.assignment_matrix(static_cast<Eigen::Index>(k), detail::nearest_centroid(z, rec.calib_centroids)) += 1.0;
    rec.assignment_matrix.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(clouds[k].size());
  }
}

/// Leakage-fraction series from per-measurement label frequencies.
inline std::vector<std::array<double, 3>> label_frequencies(const std::vector<std::uint8_t>& labels, int n_shots,
                                                            int n_meas) {
  std::vector<std::array<double, 3>> freq(static_cast<std::size_t>(n_meas), {0.0, 0.0, 0.0});
  for (int s = 0; s < n_shots; ++s)
    for (int m = 0; m < n_meas; ++m)
      freq[static_cast<std::size_t>(m)][labels[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_meas) +
                                              static_cast<std::size_t>(m)]] += 1.0;
  for (auto& f : freq)
    for (auto& x : f) x /= n_shots;
  return freq;
}

inline std::vector<double> measurement_index(int n_meas) {
  std::vector<double> m(static_cast<std::size_t>(n_meas));
  for (int i = 0; i < n_meas; ++i) m[static_cast<std::size_t>(i)] = i + 1;
  return m;
}

/// Mitigates assigned labels with the calibration matrix and fits the
/// leakage model to both the raw and mitigated series.
inline void analyze_record(LruRecord& rec) {
  const auto freq = label_frequencies(rec.assignments, rec.n_shots, rec.n_meas);
  const MitigationResult mit = mitigate(freq, rec.assignment_matrix);
  rec.condition_number = mit.condition_number;
  if (mit.ill_conditioned) rec.warnings.push_back("assignment matrix condition number exceeds 1e3");
  rec.p_leak_raw.clear();
  rec.p_leak_mitigated.clear();
  for (std::size_t m = 0; m < freq.size(); ++m) {
    rec.p_leak_raw.push_back(freq[m][label_f]);
    rec.p_leak_mitigated.push_back(mit.mitigated[m][label_f]);
  }
  const auto idx = measurement_index(rec.n_meas);
  rec.fit = fit_pleak(idx, rec.p_leak_mitigated);
  rec.fit_raw = fit_pleak(idx, rec.p_leak_raw);
  if (!rec.fit.identifiable) rec.warnings.push_back("mitigated fit: " + rec.fit.note);
}

/// Monte Carlo of the measurement cycle. Identical config and seed give an
/// identical record regardless of the worker count.
inline LruRecord simulate_shots(const LruConfig& cfg) {
  cfg.validate();
  LruRecord rec;
  rec.n_shots = cfg.n_shots;
  rec.n_meas = cfg.n_meas;
  const std::size_t total = static_cast<std::size_t>(cfg.n_shots) * static_cast<std::size_t>(cfg.n_meas);
  rec.assignments.assign(total, 0);
  rec.truth.assign(total, 0);
  calibrate_readout(cfg, rec);

  const double seep = cfg.seep_probability();
  const double leak[2] = {cfg.p_leak_g, cfg.p_leak_e};
  parallel_for(static_cast<std::size_t>(cfg.n_shots), [&](std::size_t shot) {
    std::mt19937_64 rng(substream_seed(cfg.seed, shot));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uint8_t state = label_g;
    for (int m = 0; m < cfg.n_meas; ++m) {
      if (state != label_f) state = u(rng) < 0.5 ? label_g : label_e;
      if (state != label_f && u(rng) < leak[state]) {
        state = label_f;
      }
      if (state == label_f && u(rng) < seep) state = label_e;
      const std::uint8_t shown = detail::readout_decay(rng, cfg, state);
      const cplx iq = detail::emit(rng, cfg, shown);
      const std::size_t slot = shot * static_cast<std::size_t>(cfg.n_meas) + static_cast<std::size_t>(m);
      rec.truth[slot] = state;
      rec.assignments[slot] = detail::nearest_centroid(iq, rec.calib_centroids);
      state = shown;
    }
  });
  const auto truth_freq = label_frequencies(rec.truth, rec.n_shots, rec.n_meas);
  for (const auto& f : truth_freq) rec.p_leak_truth.push_back(f[label_f]);
  analyze_record(rec);
  return rec;
}

/// One imported IQ point of a repeated-measurement record.
struct IqSample {
  int shot = 0;
  int meas_index = 0;  ///< 0-based
  cplx iq;
};

/// Builds and analyzes a record from external IQ data. Every (shot, index)
/// pair of the rectangular record must appear exactly once.
inline LruRecord record_from_iq(const std::vector<IqSample>& samples,
                                const std::array<std::vector<cplx>, 3>& calibration) {
  if (samples.empty()) throw ConfigError("IQ record is empty");
  int shots = 0, meas = 0;
  for (const auto& s : samples) {
    if (s.shot < 0 || s.meas_index < 0) throw ConfigError("IQ record has negative shot or measurement index");
    shots = std::max(shots, s.shot + 1);
    meas = std::max(meas, s.meas_index + 1);
  }
  if (static_cast<std::size_t>(shots) * static_cast<std::size_t>(meas) != samples.size())
    throw ConfigError("IQ record is not a complete shots x measurements table");
  LruRecord rec;
  rec.n_shots = shots;
  rec.n_meas = meas;
  calibrate_from_clouds(calibration, rec);
  rec.assignments.assign(samples.size(), 255);
  for (const auto& s : samples) {
    auto& slot = rec.assignments[static_cast<std::size_t>(s.shot) * static_cast<std::size_t>(meas) +
                                 static_cast<std::size_t>(s.meas_index)];
    if (slot != 255) throw ConfigError("IQ record repeats a (shot, meas_index) pair");
    slot = detail::nearest_centroid(s.iq, rec.calib_centroids);
  }
  analyze_record(rec);
  return rec;
}

/// Expected leakage fraction after each measurement from the noiseless
/// cycle recursion.
inline std::vector<double> expected_leakage(const LruConfig& cfg) {
  const double seep = cfg.seep_probability();
  const double leak = 0.5 * (cfg.p_leak_g + cfg.p_leak_e);
  std::vector<double> out;
  double p = 0.0;
  for (int m = 0; m < cfg.n_meas; ++m) {
    p = (p + (1.0 - p) * leak) * (1.0 - seep);
    out.push_back(p);
  }
  return out;
}

struct SeepageRow {
  double f_ghz = 0.0;
  double t1f = 0.0;
  double gamma_l = std::numeric_limits<double>::quiet_NaN();  ///< median over repetitions
  double gamma_s = std::numeric_limits<double>::quiet_NaN();
  int failed = 0;
};

/// Median fitted rates over `repetitions` independent runs at each frequency,
/// with the f lifetime supplied per frequency.
inline std::vector<SeepageRow> sweep_seepage_vs_frequency(const LruConfig& base, const std::vector<double>& f_ghz,
                                                          const std::vector<double>& t1f, int repetitions = 19) {
  if (f_ghz.size() != t1f.size()) throw ConfigError("frequency and T1,f grids differ in length");
  if (repetitions < 1) throw ConfigError("repetitions must be positive");
  std::vector<SeepageRow> rows(f_ghz.size());
  for (std::size_t i = 0; i < f_ghz.size(); ++i) {
    std::vector<double> gl, gs;
    int failed = 0;
    for (int r = 0; r < repetitions; ++r) {
      LruConfig cfg = base;
      cfg.t1f = t1f[i];
      cfg.seed = substream_seed(base.seed, i * static_cast<std::size_t>(repetitions) + static_cast<std::size_t>(r));
      try {
        const LruRecord rec = simulate_shots(cfg);
        if (!rec.fit.converged) {
          ++failed;
          continue;
        }
        gl.push_back(rec.fit.gamma_l);
        gs.push_back(rec.fit.gamma_s);
      } catch (const FitError&) {
        ++failed;
      }
    }
    rows[i] = SeepageRow{f_ghz[i], t1f[i], detail::median(gl), detail::median(gs), failed};
  }
  return rows;
}

}  // namespace lrufilter
