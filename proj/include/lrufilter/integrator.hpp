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
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "lrufilter/common.hpp"
#include "lrufilter/detail/dop853_tableau.hpp"

namespace lrufilter {

struct StepperOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double first_step = 0.0;  ///< 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

struct StepperStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

/// Adaptive explicit Dormand-Prince 8(5,3) integrator for dy/dt = f(t, y) on
/// an Eigen matrix state. Steps are shortened to land exactly on the output
/// times, where `observe(k, y)` is invoked.
template <class State>
class Dop853 {
 public:
  using Rhs = std::function<void(double, const State&, State&)>;
  using Observer = std::function<void(std::size_t, const State&)>;

  Dop853(Rhs rhs, StepperOptions options) : rhs_(std::move(rhs)), opt_(options) {}

  const StepperStats& stats() const { return stats_; }

  void integrate(State y, const std::vector<double>& times, const Observer& observe) {
    namespace tab = detail::dop853;
    if (times.empty()) return;
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ConfigError("output times must be strictly increasing");

    double t = times.front();
    observe(0, y);
    if (times.size() == 1) return;

    State f = y;
    eval(t, y, f);
    double h = opt_.first_step > 0.0 ? opt_.first_step : initial_step(t, y, f, times.back() - t);
    std::array<State, 13> k;
    State y_new = y;
    State f_new = y;
    State stage = y;
    bool rejected = false;

    for (std::size_t next = 1; next < times.size(); ++next) {
      const double target = times[next];
      while (t < target) {
        if (stats_.accepted + stats_.rejected > opt_.max_steps)
          throw NumericError("integrator exceeded the maximum number of steps");
        h = std::min(h, opt_.max_step);
        const double min_step = 10.0 * std::numeric_limits<double>::epsilon() * std::abs(t);
        if (h < min_step) {
          std::ostringstream msg;
          msg << "step size underflow at t = " << t << " (h = " << h << ")";
          throw NumericError(msg.str());
        }
        bool lands = false;
        double step = h;
        if (t + step >= target * (1.0 - 1e-15) || t + step > target) {
          step = target - t;
          lands = true;
        }

        k[0] = f;
        for (int s = 1; s < tab::stages; ++s) {
          stage = y;
          for (int j = 0; j < s; ++j) {
            const double coeff = tab::a[s][j];
            if (coeff != 0.0) stage.noalias() += (step * coeff) * k[j];
          }
          eval(t + tab::c[s] * step, stage, k[s]);
        }
        y_new = y;
        for (int j = 0; j < tab::stages; ++j)
          if (tab::b[j] != 0.0) y_new.noalias() += (step * tab::b[j]) * k[j];
        eval(t + step, y_new, f_new);
        k[12] = f_new;

        const auto scale =
            (opt_.atol + opt_.rtol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array()).eval();
        State e5 = State::Zero(y.rows(), y.cols());
        State e3 = State::Zero(y.rows(), y.cols());
        for (int j = 0; j < 13; ++j) {
          if (tab::e5[j] != 0.0) e5.noalias() += tab::e5[j] * k[j];
          if (tab::e3[j] != 0.0) e3.noalias() += tab::e3[j] * k[j];
        }
        const double n5 = (e5.cwiseAbs().array() / scale).square().sum();
        const double n3 = (e3.cwiseAbs().array() / scale).square().sum();
        double err = 0.0;
        if (n5 > 0.0 || n3 > 0.0) {
          const double denom = n5 + 0.01 * n3;
          err = std::abs(step) * n5 / std::sqrt(denom * static_cast<double>(y.size()));
        }

        if (err < 1.0) {
          double factor = err == 0.0 ? max_factor : std::min(max_factor, safety * std::pow(err, -0.125));
          if (rejected) factor = std::min(1.0, factor);
          t = lands ? target : t + step;
          y.swap(y_new);
          f.swap(f_new);
          ++stats_.accepted;
          rejected = false;
          // a step shortened to hit an output time does not shrink the proposal
          h = lands ? std::max(h, step * factor) : step * factor;
        } else {
          h = step * std::max(min_factor, safety * std::pow(err, -0.125));
          rejected = true;
          ++stats_.rejected;
        }
        if (!std::isfinite(h) || !y.allFinite()) throw NumericError("integrator produced non-finite values");
      }
      observe(next, y);
    }
  }

 private:
  static constexpr double safety = 0.9;
  static constexpr double min_factor = 0.2;
  static constexpr double max_factor = 10.0;

  void eval(double t, const State& y, State& out) {
    rhs_(t, y, out);
    ++stats_.evaluations;
  }

  double initial_step(double t, const State& y, const State& f, double span) {
    const auto scale = (opt_.atol + opt_.rtol * y.cwiseAbs().array()).eval();
    const double n = static_cast<double>(y.size());
    const double d0 = std::sqrt((y.cwiseAbs().array() / scale).square().sum() / n);
    const double d1 = std::sqrt((f.cwiseAbs().array() / scale).square().sum() / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    State y1 = y + h0 * f;
    State f1 = f;
    eval(t + h0, y1, f1);
    const double d2 = std::sqrt(((f1 - f).cwiseAbs().array() / scale).square().sum() / n) / h0;
    double h1;
    if (d1 <= 1e-15 && d2 <= 1e-15)
      h1 = std::max(1e-6, h0 * 1e-3);
    else
      h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
    return std::min({100.0 * h0, h1, span});
  }

  Rhs rhs_;
  StepperOptions opt_;
  StepperStats stats_;
};

}  // namespace lrufilter
