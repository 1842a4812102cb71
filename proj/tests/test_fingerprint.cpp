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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "thermalcc/fingerprint.hpp"

namespace thermalcc {
namespace {

SensorTrace from_values(const std::vector<double>& v) {
  SensorTrace t;
  for (std::size_t i = 0; i < v.size(); ++i) t.samples.push_back({0.1 * static_cast<double>(i), 2, v[i]});
  return t;
}

std::vector<double> random_values(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(40.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

const ReferenceLibrary& library() {
  static const ReferenceLibrary lib = build_library(default_profiles(), Platform{}, DtsConfig{});
  return lib;
}

ReferenceLibrary shifted(const ReferenceLibrary& lib, double by) {
  ReferenceLibrary out = lib;
  for (auto& e : out.entries)
    for (auto& t : e.traces)
      for (auto& s : t.samples) s.reading += by;
  return out;
}

TEST(Correlate, Identity) {
  const auto a = from_values(random_values(1, 200));
  EXPECT_NEAR(correlate(a, a), 1.0, 1e-12);
}

TEST(Correlate, NegatedAndShifted) {
  const auto v = random_values(2, 200);
  std::vector<double> w;
  for (double x : v) w.push_back(-x + 80.0);
  EXPECT_NEAR(correlate(from_values(v), from_values(w)), -1.0, 1e-12);
}

TEST(Correlate, SymmetricAndAffineInvariant) {
  const auto a = from_values(random_values(3, 300));
  const auto bv = random_values(4, 300);
  std::vector<double> mixed;
  for (std::size_t i = 0; i < bv.size(); ++i) mixed.push_back(0.6 * a.samples[i].reading + 0.4 * bv[i]);
  const auto b = from_values(mixed);
  const double r = correlate(a, b);
  EXPECT_NEAR(r, correlate(b, a), 1e-12);
  for (double alpha : {3.0, 0.25, -2.0, -0.5}) {
    for (double beta : {-10.0, 0.0, 7.5}) {
      std::vector<double> t;
      for (double x : mixed) t.push_back(alpha * x + beta);
      EXPECT_NEAR(correlate(a, from_values(t)), (alpha > 0 ? 1.0 : -1.0) * r, 1e-9);
    }
  }
}

TEST(Correlate, Errors) {
  const auto a = from_values(random_values(5, 10));
  EXPECT_THROW(correlate(a, from_values(random_values(6, 9))), ConfigError);
  EXPECT_THROW(correlate(from_values({1.0}), from_values({2.0})), ConfigError);
  EXPECT_THROW(correlate(a, from_values(std::vector<double>(10, 35.0))), UndefinedCorrelation);
}

TEST(Profiles, DefaultsAreSeparated) {
  EXPECT_NO_THROW(validate_profiles(default_profiles()));
  auto p = default_profiles();
  p.push_back({"clone", {{1.0, 0.98}}});
  EXPECT_THROW(validate_profiles(p), ConfigError);
  p = default_profiles();
  p.push_back({"rsa", {{1.0, 0.1}}});
  EXPECT_THROW(validate_profiles(p), ConfigError);
  EXPECT_THROW((WorkloadProfile{"x", {{1.0, 1.5}}}.validate()), ConfigError);
  EXPECT_THROW((WorkloadProfile{"x", {}}.validate()), ConfigError);
}

TEST(Profiles, ActivityIsTimeWeighted) {
  const WorkloadProfile p{"x", {{3.0, 1.0}, {1.0, 0.2}}};
  EXPECT_DOUBLE_EQ(p.cycle_length(), 4.0);
  EXPECT_DOUBLE_EQ(p.activity(), (3.0 + 0.2) / 4.0);
}

TEST(Options, Validation) {
  const ChipTopology t;
  const DtsConfig d;
  FingerprintOptions o;
  o.repeats = 1;
  EXPECT_THROW(o.validate(t, d), ConfigError);
  o = FingerprintOptions{};
  o.observer_core = o.victim_core;
  EXPECT_THROW(o.validate(t, d), ConfigError);
  o = FingerprintOptions{};
  o.sample_period = 0.003;
  EXPECT_THROW(o.validate(t, d), ConfigError);
}

TEST(Library, TwentyFiveTracesOnOneGrid) {
  const auto& lib = library();
  EXPECT_EQ(lib.trace_count(), 25u);
  EXPECT_NO_THROW(lib.validate());
  const auto& ref = lib.any_trace();
  EXPECT_EQ(ref.size(), 2201u);
  for (const auto& e : lib.entries)
    for (const auto& t : e.traces) EXPECT_TRUE(same_grid(t, ref));
}

TEST(Library, DistinctProfilesHaveDistinctMeans) {
  const auto& lib = library();
  std::vector<double> means;
  for (const auto& e : lib.entries) {
    double m = 0.0;
    std::size_t n = 0;
    for (const auto& t : e.traces)
      for (std::size_t i = 200; i < t.size(); ++i, ++n) m += t.samples[i].reading;
    means.push_back(m / static_cast<double>(n));
  }
  for (std::size_t i = 0; i < means.size(); ++i)
    for (std::size_t j = i + 1; j < means.size(); ++j) EXPECT_GT(std::abs(means[i] - means[j]), 0.1) << i << " " << j;
}

TEST(Library, RepeatsDifferOnlyByNoise) {
  const auto& lib = library();
  const double res = DtsConfig{}.resolution;
  for (const auto& e : lib.entries) {
    for (std::size_t r = 1; r < e.traces.size(); ++r) {
      double mad = 0.0;
      for (std::size_t i = 0; i < e.traces[0].size(); ++i)
        mad += std::abs(e.traces[0].samples[i].reading - e.traces[r].samples[i].reading);
      mad /= static_cast<double>(e.traces[0].size());
      EXPECT_LE(mad, 2.0 * res) << e.label;
    }
  }
}

TEST(Library, SameWorkloadBeatsCrossWorkload) {
  const auto& lib = library();
  double same = 0.0;
  for (const auto& e : lib.entries) same += same_workload_pairs(lib, e.label, 0.8).mean;
  same /= static_cast<double>(lib.entries.size());
  EXPECT_GT(same, cross_workload_pairs(lib, 0.85).mean);
  EXPECT_THROW(same_workload_pairs(lib, "nope", 0.8), ConfigError);
}

TEST(Classify, LibraryTraceGetsItsOwnLabel) {
  const auto& lib = library();
  for (const auto& e : lib.entries) {
    const auto c = classify(e.traces[0], lib);
    ASSERT_TRUE(c.label.has_value()) << e.label;
    EXPECT_EQ(*c.label, e.label);
    EXPECT_EQ(c.scores.size(), 5u);
  }
}

TEST(Classify, FlatTraceMatchesNothing) {
  const auto& lib = library();
  SensorTrace flat = lib.any_trace();
  for (auto& s : flat.samples) s.reading = 22.0;
  const auto c = classify(flat, lib);
  EXPECT_FALSE(c.label.has_value());
  for (const auto& s : c.scores) EXPECT_FALSE(s.mean.has_value());
}

TEST(Classify, GridMismatchIsAnError) {
  const auto& lib = library();
  SensorTrace t = lib.any_trace();
  t.samples.pop_back();
  EXPECT_THROW(classify(t, lib), ConfigError);
}

TEST(Classify, StableUnderAConstantShift) {
  const auto& lib = library();
  const auto moved = shifted(lib, 3.0);
  for (std::uint64_t seed = 900; seed < 905; ++seed) {
    const auto profile = default_profiles()[seed % 5];
    const auto probe = record_workload(profile, Platform{}, DtsConfig{}, lib.options, seed);
    EXPECT_EQ(classify(probe, lib).label, classify(probe, moved).label);
  }
}

TEST(Record, DeterministicPerSeed) {
  FingerprintOptions o;
  o.run_seconds = 20.0;
  o.pre_roll = 2.0;
  const auto p = default_profiles()[3];
  EXPECT_EQ(record_workload(p, Platform{}, DtsConfig{}, o, 4), record_workload(p, Platform{}, DtsConfig{}, o, 4));
}

}  // namespace
}  // namespace thermalcc
