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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lrufilter/integrator.hpp"

namespace lrufilter {
namespace {

using State = Eigen::MatrixXd;

TEST(Dop853, HarmonicOscillatorMatchesClosedForm) {
  StepperOptions opt;
  Dop853<State> stepper([](double, const State& y, State& dy) { dy.resize(2, 1); dy << y(1), -y(0); }, opt);
  State y0(2, 1);
  y0 << 1.0, 0.0;
  const auto times = linspace(0.0, 20.0, 41);
  stepper.integrate(y0, times, [&](std::size_t k, const State& y) {
    EXPECT_NEAR(y(0), std::cos(times[k]), 1e-8);
    EXPECT_NEAR(y(1), -std::sin(times[k]), 1e-8);
  });
  EXPECT_GT(stepper.stats().accepted, 0);
}

TEST(Dop853, MatrixExponentialDecay) {
  StepperOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  Dop853<State> stepper([](double, const State& y, State& dy) { dy = -2.5 * y; }, opt);
  State y0 = State::Constant(3, 3, 1.0);
  std::size_t calls = 0;
  const std::vector<double> times{0.0, 0.1, 0.4, 1.7};
  stepper.integrate(y0, times, [&](std::size_t k, const State& y) {
    ++calls;
    EXPECT_NEAR(y(1, 2), std::exp(-2.5 * times[k]), 1e-12);
  });
  EXPECT_EQ(calls, times.size());
}

TEST(Dop853, TimeDependentRhs) {
  // y' = cos(t) y, y = exp(sin t)
  Dop853<State> stepper([](double t, const State& y, State& dy) { dy = std::cos(t) * y; }, StepperOptions{});
  State y0 = State::Ones(1, 1);
  const auto times = linspace(0.0, 10.0, 11);
  stepper.integrate(y0, times,
                    [&](std::size_t k, const State& y) { EXPECT_NEAR(y(0), std::exp(std::sin(times[k])), 1e-8); });
}

TEST(Dop853, BlowUpIsReported) {
  StepperOptions opt;
  opt.max_steps = 20000;
  Dop853<State> stepper([](double, const State& y, State& dy) { dy = y.cwiseProduct(y); }, opt);
  State y0 = State::Ones(1, 1);
  EXPECT_THROW(stepper.integrate(y0, {0.0, 2.0}, [](std::size_t, const State&) {}), NumericError);
}

TEST(Dop853, RejectsNonIncreasingTimes) {
  Dop853<State> stepper([](double, const State& y, State& dy) { dy = y; }, StepperOptions{});
  EXPECT_THROW(stepper.integrate(State::Ones(1, 1), {0.0, 1.0, 1.0}, [](std::size_t, const State&) {}),
               ConfigError);
}

}  // namespace
}  // namespace lrufilter
