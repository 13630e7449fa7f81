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
#include <atomic>
#include <complex>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace lrufilter {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using SparseC = Eigen::SparseMatrix<cplx>;
using SparseRowC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx imag_unit{0.0, 1.0};

/// Linear frequency in GHz to angular frequency in rad/s.
constexpr double ghz_to_rad(double ghz) { return two_pi * 1e9 * ghz; }
/// Angular frequency in rad/s to linear frequency in GHz.
constexpr double rad_to_ghz(double rad) { return rad / (two_pi * 1e9); }

/// Invalid user input: bad parameters, schema violations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: non-convergence, step-size underflow, trace drift.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Curve fit failed or the data does not identify the model.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Worker count for sweeps; LRUFILTER_WORKERS overrides the hardware default.
inline unsigned worker_count() {
  if (const char* env = std::getenv("LRUFILTER_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on a bounded pool. Each index is handled by
/// exactly one call, so results written by index do not depend on scheduling.
/// The first exception thrown by any worker is rethrown after all join.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned workers = worker_count()) {
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Evenly spaced grid of `points` samples covering [start, stop].
inline std::vector<double> linspace(double start, double stop, std::size_t points) {
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = start;
    return grid;
  }
  const double step = (stop - start) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = start + step * static_cast<double>(i);
  grid.back() = stop;
  return grid;
}

/// Inclusive grid start, start+step, ... up to stop (with half-step slack).
inline std::vector<double> stepped_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  if (stop < start) throw ConfigError("grid stop must not be below start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = start + step * static_cast<double>(i);
  return grid;
}

}  // namespace lrufilter
