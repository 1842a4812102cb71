/*
 * Copyright 2026 The thermalcc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "thermalcc/calibration.hpp"

namespace thermalcc {
namespace {

CalibrationRow row(double tb_ms, double ber, bool decodable = true) {
  CalibrationRow r;
  r.bit_period_ms = tb_ms;
  r.ber_percent = ber;
  r.decodable = decodable;
  r.synced = decodable ? 10 : 0;
  r.trials = 10;
  return r;
}

CalibrationTable reference_shape() {
  return {{row(250, 18), row(500, 14), row(750, 13), row(1000, 11), row(1250, 9), row(1500, 8)}};
}

TEST(SelectMinTb, ReferenceShapeAtFifteenPercent) {
  const auto tb = select_min_tb(reference_shape(), 15.0);
  ASSERT_TRUE(tb.has_value());
  EXPECT_DOUBLE_EQ(*tb, 0.5);
}

TEST(SelectMinTb, NoneDecodable) {
  CalibrationTable t{{row(250, 0, false), row(500, 0, false)}};
  EXPECT_FALSE(select_min_tb(t, 15.0).has_value());
}

TEST(SelectMinTb, FullCeilingTakesSmallestDecodable) {
  CalibrationTable t{{row(250, 0, false), row(500, 60), row(750, 40)}};
  EXPECT_DOUBLE_EQ(*select_min_tb(t, 100.0), 0.5);
  EXPECT_THROW(select_min_tb(CalibrationTable{}, 15.0), ConfigError);
}

TEST(Targets, Validation) {
  FitTargets t;
  t.idle_baseline = 50.0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = FitTargets{};
  t.decay_time = 0.0;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(StepResponse, DefaultPlatformHitsTargets) {
  const Platform p;
  const FitTargets t;
  const auto r = measure_step_response(p, t);
  EXPECT_NEAR(r.rise, 5.0, 1.0);
  EXPECT_NEAR(r.saturation, 43.0, 1.0);
  EXPECT_NEAR(r.decay_time, 11.0, 0.3 * 11.0);
  EXPECT_GE(r.hop_steady[0], 2.0);
  EXPECT_GT(r.hop_steady[0], r.hop_steady[1]);
  EXPECT_GT(r.hop_steady[1], r.hop_steady[2]);
  EXPECT_LT(r.hop3_pulse, 2.0);
}

TEST(Fit, StartsInsideToleranceAndStops) {
  const auto f = fit_model(FitTargets{}, Platform{});
  EXPECT_TRUE(f.within_tolerance) << f.diagnostic();
  EXPECT_EQ(f.sweeps, 0);
  EXPECT_EQ(f.residuals.size(), 5u);
}

TEST(Fit, RecoversFromAPerturbedStart) {
  Platform start;
  start.topology.r_spreader_to_ambient *= 1.3;
  start.topology.core_capacitance *= 0.7;
  const auto before = fit_residuals(measure_step_response(start, FitTargets{}), FitTargets{}, 22.0);
  const auto f = fit_model(FitTargets{}, start);
  EXPECT_LT(f.objective, detail::fit_objective(before));
  EXPECT_TRUE(f.within_tolerance) << f.diagnostic();
  EXPECT_NEAR(f.response.rise, 5.0, 1.0);
  EXPECT_NEAR(f.response.saturation, 43.0, 0.2 * 21.0);
}

TEST(Fit, Deterministic) {
  Platform start;
  start.power.active_coeff *= 1.2;
  FitOptions opt;
  opt.max_sweeps = 4;
  const auto a = fit_model(FitTargets{}, start, opt);
  const auto b = fit_model(FitTargets{}, start, opt);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(detail::fit_vector(a.platform), detail::fit_vector(b.platform));
}

TEST(Fit, DiagnosticListsEveryTarget) {
  Platform start;
  start.topology.r_spreader_to_ambient *= 3.0;
  FitOptions opt;
  opt.max_sweeps = 0;
  const auto f = fit_model(FitTargets{}, start, opt);
  EXPECT_FALSE(f.within_tolerance);
  for (const char* name : {"fast_rise", "saturation", "decay_time", "idle_baseline", "hop_pattern"})
    EXPECT_NE(f.diagnostic().find(name), std::string::npos) << name;
}

TEST(Link, Validation) {
  const ChipTopology t;
  LinkSetup l;
  l.hop = 4;
  EXPECT_THROW(l.validate(t), ConfigError);
  l = LinkSetup{};
  l.hop = 0;
  EXPECT_THROW(l.validate(t), ConfigError);
  l = LinkSetup{};
  l.source_core = 8;
  EXPECT_THROW(l.validate(t), ConfigError);
  l = LinkSetup{};
  l.mode = Mode::temporal;
  EXPECT_EQ(l.sink_core(), 3);
}

TEST(Calibrate, OneHopSevenFiftyInBand) {
  const auto t = calibrate_tb(Platform{}, DtsConfig{}, LinkSetup{}, {0.75}, 10);
  ASSERT_EQ(t.rows.size(), 1u);
  const auto& r = t.rows.front();
  EXPECT_TRUE(r.decodable);
  EXPECT_GE(r.ber_percent, 5.0);
  EXPECT_LE(r.ber_percent, 25.0);
  EXPECT_EQ(r.trials, 10);
  EXPECT_EQ(static_cast<int>(r.trial_ber_percent.size()), r.synced);
}

TEST(Calibrate, ThreeHopsIsUndecodable) {
  LinkSetup l;
  l.hop = 3;
  const auto t = calibrate_tb(Platform{}, DtsConfig{}, l, {0.75, 1.5}, 3);
  for (const auto& r : t.rows) {
    EXPECT_FALSE(r.decodable);
    EXPECT_EQ(r.synced, 0);
  }
}

TEST(Calibrate, TemporalIsErrorFree) {
  LinkSetup l;
  l.mode = Mode::temporal;
  const auto t = calibrate_tb(Platform{}, DtsConfig{}, l, {0.010, 0.020, 0.030}, 3);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.decodable);
    EXPECT_EQ(r.ber_percent, 0.0);
    EXPECT_EQ(r.hop, 0);
  }
}

TEST(Calibrate, ReproducibleBitForBit) {
  const auto a = calibrate_tb(Platform{}, DtsConfig{}, LinkSetup{}, {0.5}, 4, 17);
  const auto b = calibrate_tb(Platform{}, DtsConfig{}, LinkSetup{}, {0.5}, 4, 17);
  EXPECT_EQ(a.rows[0].trial_ber_percent, b.rows[0].trial_ber_percent);
  EXPECT_EQ(a.rows[0].ber_percent, b.rows[0].ber_percent);
}

TEST(Calibrate, RejectsEmptyInputs) {
  EXPECT_THROW(calibrate_tb(Platform{}, DtsConfig{}, LinkSetup{}, {}, 10), ConfigError);
  EXPECT_THROW(calibrate_tb(Platform{}, DtsConfig{}, LinkSetup{}, {0.5}, 0), ConfigError);
}

TEST(TransmitBlock, SyncFailureLosesEveryBit) {
  LinkSetup l;
  l.hop = 3;
  const auto r = transmit_block(Platform{}, DtsConfig{}, l, 0.75, alternating_bits(100), 1);
  EXPECT_FALSE(r.synced);
  EXPECT_EQ(r.errors, 100u);
  EXPECT_EQ(r.ber, 1.0);
}

TEST(TransmitBlock, LateLockStillReadsFullPayload) {
  int late = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto r = transmit_block(Platform{}, DtsConfig{}, LinkSetup{}, 0.5, alternating_bits(100), s);
    if (!r.synced) continue;
    EXPECT_EQ(r.received.size(), 100u) << "seed " << s;
    late += r.offset > 2.0 + 0.5 ? 1 : 0;
  }
  EXPECT_GT(late, 0);
}

TEST(FitNoise, BisectionIsMonotoneInSigma) {
  LinkSetup l;
  const auto quiet = calibrate_tb(Platform{}, DtsConfig{}.noiseless(), l, {0.75}, 3);
  EXPECT_EQ(quiet.rows[0].ber_percent, 0.0);
  const auto f = fit_noise(Platform{}, DtsConfig{}, l, 0.75, 13.0, 3, 0.0, 1.0, 3);
  EXPECT_EQ(f.iterations, 3);
  EXPECT_GT(f.wander_sigma, 0.0);
  EXPECT_LT(f.wander_sigma, 1.0);
}

}  // namespace
}  // namespace thermalcc
