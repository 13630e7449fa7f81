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
#include <string>

#include "lrufilter/config.hpp"

namespace lrufilter {
namespace {

TEST(Config, DefaultsResolveAndRoundTrip) {
  const json cfg = resolve_config(json::object());
  EXPECT_EQ(cfg, default_config());
  const json again = resolve_config(json::parse(cfg.dump(2)));
  EXPECT_EQ(again, cfg);
  EXPECT_EQ(config_hash(again), config_hash(cfg));
  EXPECT_EQ(config_hash(cfg).size(), 16u);
}

TEST(Config, EveryUnknownKeyIsReported) {
  json user = json::parse(R"({"filter": {"oder": 5}, "couplng_ghz": 0.1, "pulse": {"t_g_ns": "long"}})");
  try {
    resolve_config(user);
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("filter.oder"), std::string::npos);
    EXPECT_NE(msg.find("couplng_ghz"), std::string::npos);
    EXPECT_NE(msg.find("pulse.t_g_ns"), std::string::npos);
  }
  EXPECT_THROW(resolve_config(json::parse(R"({"schema_version": 2})")), ConfigError);
  EXPECT_THROW(resolve_config(json::parse(R"([1, 2])")), ConfigError);
  EXPECT_THROW(resolve_config(json::parse(R"({"filter": 3})")), ConfigError);
}

TEST(Config, DottedOverrides) {
  json user = json::object();
  apply_override(user, "filter.ripple_db=0.2");
  apply_override(user, "transmon.omega_ge_ghz=4.9");
  apply_override(user, "filter_on=false");
  apply_override(user, "pulse.target=X_pi_2");
  apply_override(user, "lru.t1f_ns=null");
  const json cfg = resolve_config(user);
  EXPECT_DOUBLE_EQ(cfg["filter"]["ripple_db"].get<double>(), 0.2);
  EXPECT_DOUBLE_EQ(cfg["transmon"]["omega_ge_ghz"].get<double>(), 4.9);
  EXPECT_FALSE(cfg["filter_on"].get<bool>());
  EXPECT_EQ(cfg["pulse"]["target"], "X_pi_2");
  EXPECT_TRUE(cfg["lru"]["t1f_ns"].is_null());
  EXPECT_THROW(apply_override(user, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(user, "a..b=1"), ConfigError);
}

TEST(Config, BuildersConvertUnits) {
  const json cfg = resolve_config(json::object());
  const FilterSpec f = filter_from_config(cfg);
  EXPECT_NEAR(rad_to_ghz(f.omega0), 3.6, 1e-12);
  EXPECT_NEAR(rad_to_ghz(f.delta_omega), 1.8, 1e-12);
  const DeviceParams p = device_from_config(cfg);
  EXPECT_NEAR(rad_to_ghz(p.g), 0.02, 1e-15);
  EXPECT_NEAR(p.t1, 100e-6, 1e-18);
  EXPECT_EQ(sweep_from_config(cfg).size(), 53u);
  const PulseSpec ps = pulse_from_config(cfg, p.alpha);
  EXPECT_NEAR(ps.t_g, 14.2e-9, 1e-21);
  EXPECT_EQ(ps.target, GateTarget::x_pi);
  EXPECT_FALSE(explicit_transmon(cfg).has_value());

  json user = json::parse(R"({"filter": {"center_ghz": 5.4, "bandwidth_ghz": 1.8},
                              "lru": {"gamma_l": 0.01, "gamma_s": 0.02}})");
  const json c2 = resolve_config(user);
  EXPECT_NEAR(rad_to_ghz(filter_from_config(c2).lower_edge()), 4.5, 1e-12);
  const LruConfig l = lru_from_config(c2);
  EXPECT_NEAR(l.t1f, l.t_cycle / 0.02, 1e-18);
  EXPECT_NEAR(l.p_leak_g, 1.0 - std::exp(-0.01), 1e-15);

  json half = json::parse(R"({"filter": {"center_ghz": 5.4}})");
  EXPECT_THROW(filter_from_config(resolve_config(half)), ConfigError);
}

TEST(Config, EnvelopeEmbedsResolvedConfig) {
  const json cfg = resolve_config(json::object());
  const json env = make_envelope("synth", cfg, json{{"x", 1}});
  EXPECT_EQ(env["config"], cfg);
  EXPECT_EQ(env["metadata"]["config_hash"], config_hash(cfg));
  EXPECT_EQ(env["metadata"]["subcommand"], "synth");
  EXPECT_EQ(env["payload"]["x"], 1);
}

}  // namespace
}  // namespace lrufilter
