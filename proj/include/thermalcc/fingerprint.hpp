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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermalcc/errors.hpp"
#include "thermalcc/partitioning.hpp"
#include "thermalcc/sensor.hpp"
#include "thermalcc/thermal_model.hpp"

namespace thermalcc {

/// One stretch of constant activity inside a workload's repeating cycle.
struct Phase {
  double duration = 1.0;  // s
  double activity = 1.0;
};

/// Synthetic victim workload: a cycle of phases repeated for the whole run.
struct WorkloadProfile {
  std::string name;
  std::vector<Phase> cycle;

  double cycle_length() const {
    double s = 0.0;
    for (const auto& p : cycle) s += p.duration;
    return s;
  }

  /// Time-averaged activity.
  double activity() const {
    double s = 0.0;
    for (const auto& p : cycle) s += p.duration * p.activity;
    return s / cycle_length();
  }

  void validate() const {
    if (name.empty()) throw ConfigError("workload name must not be empty");
    if (cycle.empty()) throw ConfigError("workload '" + name + "' has no phases");
    for (const auto& p : cycle) {
      if (!(p.duration > 0)) throw ConfigError("workload '" + name + "' has a non-positive phase");
      if (!(p.activity >= 0.0 && p.activity <= 1.0)) throw ConfigError("workload '" + name + "' activity outside [0, 1]");
    }
  }
};

inline constexpr double kMinActivitySeparation = 0.05;

inline void validate_profiles(const std::vector<WorkloadProfile>& profiles) {
  for (const auto& p : profiles) p.validate();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (std::size_t j = i + 1; j < profiles.size(); ++j) {
      if (profiles[i].name == profiles[j].name) throw ConfigError("duplicate workload name '" + profiles[i].name + "'");
      if (std::abs(profiles[i].activity() - profiles[j].activity()) < kMinActivitySeparation - 1e-12)
        throw ConfigError("workloads '" + profiles[i].name + "' and '" + profiles[j].name +
                          "' have activity levels closer than 0.05");
    }
  }
}

/// Five stand-ins: three compute-bound kernels that hold the core busy and
/// two with a visible on/off rhythm.
inline std::vector<WorkloadProfile> default_profiles() {
  return {
      {"rsa", {{1.0, 1.0}}},
      {"basicmath", {{1.0, 0.9}}},
      {"bitcount", {{1.0, 0.8}}},
      {"qsort", {{12.0, 1.0}, {12.0, 0.4}}},
      {"adpcm", {{3.0, 1.0}, {3.0, 0.2}}},
  };
}

struct FingerprintOptions {
  double run_seconds = 200.0;
  double pre_roll = 20.0;        // idle time recorded before the workload starts
  double sample_period = 0.1;    // observer polling interval
  int repeats = 5;
  int victim_core = 3;
  int observer_core = 2;
  double frequency_ghz = 2.9;
  std::uint64_t base_seed = 1;

  void validate(const ChipTopology& topo, const DtsConfig& dts) const {
    if (!(run_seconds > 0)) throw ConfigError("run_seconds must be positive");
    if (!(pre_roll >= 0)) throw ConfigError("pre_roll must be non-negative");
    if (repeats < 2) throw ConfigError("repeats must be >= 2");
    if (victim_core < 0 || victim_core >= topo.n_cores || observer_core < 0 || observer_core >= topo.n_cores)
      throw ConfigError("fingerprint cores outside the topology");
    if (victim_core == observer_core) throw ConfigError("victim and observer must be different cores");
    const double r = sample_period / dts.refresh_period;
    if (!(sample_period > 0) || std::abs(r - std::round(r)) > 1e-9)
      throw ConfigError("sample_period must be a positive multiple of the sensor refresh period");
  }

  double duration() const { return pre_roll + run_seconds; }
};

/// Observer-core trace while `profile` runs on the victim core.
inline SensorTrace record_workload(const WorkloadProfile& profile, const Platform& platform, DtsConfig dts,
                                   const FingerprintOptions& opt, std::uint64_t seed) {
  platform.validate();
  dts.validate();
  profile.validate();
  opt.validate(platform.topology, dts);

  const int n = platform.topology.n_cores;
  const double idle = power_of(platform.power, 0.0, opt.frequency_ghz);
  PowerSchedule sched = PowerSchedule::uniform(n, idle, opt.frequency_ghz);
  sched.core_watts[static_cast<std::size_t>(opt.observer_core)] = PiecewiseConstant(idle + platform.sink_load_w);
  auto& victim = sched.core_watts[static_cast<std::size_t>(opt.victim_core)];
  const double end = opt.duration();
  double t = opt.pre_roll;
  while (t < end - 1e-9) {
    for (const auto& ph : profile.cycle) {
      const double stop = std::min(t + ph.duration, end);
      victim.assign(t, stop, power_of(platform.power, ph.activity, opt.frequency_ghz));
      t = stop;
      if (t >= end - 1e-9) break;
    }
  }

  dts.seed = seed;
  const auto truth = simulate(platform.topology, sched, end, platform.dt, platform.idle_state());
  const auto full = observe(truth, opt.observer_core, dts);
  const auto stride = static_cast<std::size_t>(std::llround(opt.sample_period / dts.refresh_period));
  SensorTrace out;
  for (std::size_t i = 0; i < full.samples.size(); i += stride) out.samples.push_back(full.samples[i]);
  return out;
}

/// Pearson correlation of two equally long traces.
inline double correlate(const SensorTrace& a, const SensorTrace& b) {
  if (a.size() != b.size()) throw ConfigError("correlate needs traces of equal length");
  if (a.size() < 2) throw ConfigError("correlate needs at least two samples");
  const std::size_t n = a.size();
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a.samples[i].reading;
    mb += b.samples[i].reading;
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a.samples[i].reading - ma;
    const double db = b.samples[i].reading - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelation("correlation undefined for a constant trace");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline bool same_grid(const SensorTrace& a, const SensorTrace& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.samples[i].time - b.samples[i].time) > 1e-9) return false;
  return true;
}

struct LibraryEntry {
  std::string label;
  std::vector<SensorTrace> traces;
  std::vector<std::uint64_t> seeds;
};

struct ReferenceLibrary {
  FingerprintOptions options;
  std::vector<LibraryEntry> entries;

  std::size_t trace_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.traces.size();
    return n;
  }

  const SensorTrace& any_trace() const {
    for (const auto& e : entries)
      if (!e.traces.empty()) return e.traces.front();
    throw ConfigError("reference library is empty");
  }

  void validate() const {
    const auto& ref = any_trace();
    for (const auto& e : entries) {
      if (e.traces.size() != e.seeds.size()) throw ConfigError("library entry '" + e.label + "' seed count mismatch");
      for (const auto& t : e.traces)
        if (!same_grid(t, ref)) throw ConfigError("library traces do not share one sampling grid");
    }
  }
};

inline ReferenceLibrary build_library(const std::vector<WorkloadProfile>& profiles, const Platform& platform,
                                      const DtsConfig& dts, const FingerprintOptions& opt = {}) {
  validate_profiles(profiles);
  opt.validate(platform.topology, dts);
  ReferenceLibrary lib;
  lib.options = opt;
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    LibraryEntry e;
    e.label = profiles[p].name;
    for (int r = 0; r < opt.repeats; ++r) {
      const std::uint64_t seed = opt.base_seed + p * static_cast<std::uint64_t>(opt.repeats) + static_cast<std::uint64_t>(r);
      e.traces.push_back(record_workload(profiles[p], platform, dts, opt, seed));
      e.seeds.push_back(seed);
    }
    lib.entries.push_back(std::move(e));
  }
  return lib;
}

struct WorkloadScore {
  std::string label;
  std::vector<double> correlations;  // one per library trace
  std::optional<double> mean;        // empty when the correlation is undefined
};

struct Classification {
  std::optional<std::string> label;
  double threshold = 0.85;
  std::vector<WorkloadScore> scores;
};

/// Label whose mean correlation with `observed` exceeds `threshold` and is largest.
inline Classification classify(const SensorTrace& observed, const ReferenceLibrary& library, double threshold = 0.85) {
  library.validate();
  if (!same_grid(observed, library.any_trace())) throw ConfigError("observed trace does not match the library grid");
  Classification out;
  out.threshold = threshold;
  double best = -2.0;
  for (const auto& e : library.entries) {
    WorkloadScore s;
    s.label = e.label;
    try {
      double sum = 0.0;
      for (const auto& t : e.traces) {
        s.correlations.push_back(correlate(observed, t));
        sum += s.correlations.back();
      }
      if (!s.correlations.empty()) s.mean = sum / static_cast<double>(s.correlations.size());
    } catch (const UndefinedCorrelation&) {
      s.correlations.clear();
      s.mean.reset();
    }
    if (s.mean && *s.mean > threshold && *s.mean > best) {
      best = *s.mean;
      out.label = e.label;
    }
    out.scores.push_back(std::move(s));
  }
  return out;
}

struct PairStats {
  std::size_t pairs = 0;
  std::size_t above = 0;  // pairs counted against the threshold
  double mean = 0.0;

  double rate() const { return pairs == 0 ? 0.0 : static_cast<double>(above) / static_cast<double>(pairs); }
};

/// Pairwise correlations among the repeats of one workload.
inline PairStats same_workload_pairs(const ReferenceLibrary& lib, const std::string& label, double threshold) {
  PairStats st;
  for (const auto& e : lib.entries) {
    if (e.label != label) continue;
    for (std::size_t i = 0; i < e.traces.size(); ++i) {
      for (std::size_t j = i + 1; j < e.traces.size(); ++j) {
        const double r = correlate(e.traces[i], e.traces[j]);
        ++st.pairs;
        st.above += r >= threshold ? 1 : 0;
        st.mean += r;
      }
    }
  }
  if (st.pairs == 0) throw ConfigError("no library entry labelled '" + label + "'");
  st.mean /= static_cast<double>(st.pairs);
  return st;
}

/// Every trace pair drawn from two different workloads; `above` counts false positives.
inline PairStats cross_workload_pairs(const ReferenceLibrary& lib, double threshold) {
  PairStats st;
  for (std::size_t a = 0; a < lib.entries.size(); ++a) {
    for (std::size_t b = a + 1; b < lib.entries.size(); ++b) {
      for (const auto& ta : lib.entries[a].traces) {
        for (const auto& tb : lib.entries[b].traces) {
          const double r = correlate(ta, tb);
          ++st.pairs;
          st.above += r > threshold ? 1 : 0;
          st.mean += r;
        }
      }
    }
  }
  if (st.pairs > 0) st.mean /= static_cast<double>(st.pairs);
  return st;
}

}  // namespace thermalcc
