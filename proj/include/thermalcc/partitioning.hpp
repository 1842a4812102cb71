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

/**
 * @file partitioning.hpp
 * @brief The two isolation regimes a source and a sink can live under.
 *
 * Spatial: source and sink pinned to distinct cores, running concurrently;
 * the sink reads only its own core's sensor.
 *
 * Temporal: source and sink share one core in alternating slices of length
 * t_s, source first. The sink reads the shared sensor only inside its own
 * slices, at whichever refresh ticks fall there. Context switches are free.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "thermalcc/errors.hpp"
#include "thermalcc/sensor.hpp"
#include "thermalcc/thermal_model.hpp"

namespace thermalcc {

enum class Mode { spatial, temporal };

inline const char* to_string(Mode m) { return m == Mode::spatial ? "spatial" : "temporal"; }

inline Mode mode_from_string(const std::string& s) {
  if (s == "spatial") return Mode::spatial;
  if (s == "temporal") return Mode::temporal;
  throw ConfigError("unknown mode '" + s + "'");
}

/// Everything physical about the machine: die, power law, the sink's own
/// load and the integration step.
struct Platform {
  ChipTopology topology;
  PowerModel power;
  double sink_load_w = 0.3;
  double dt = 0.001;

  void validate() const {
    topology.validate();
    power.validate();
    if (!(sink_load_w >= 0)) throw ConfigError("sink_load_w must be non-negative");
    detail::check_step(topology, dt);
  }

  /// Equilibrium with every core idle and nothing else running.
  ThermalState idle_state() const {
    std::vector<double> p(static_cast<std::size_t>(topology.n_cores), power.idle_w);
    return steady_state(topology, p);
  }
};

/// Source activity, one ON/OFF decision per slot. In spatial mode slot k is
/// [start + k*slot, start + (k+1)*slot). In temporal mode slot k is the
/// source half of slice pair k: [start + 2k*slot, start + (2k+1)*slot).
struct OnOffSchedule {
  Mode mode = Mode::spatial;
  double slot = 0.75;
  double start = 0.0;
  std::vector<std::uint8_t> on;

  double period() const { return mode == Mode::spatial ? slot : 2.0 * slot; }
  double end() const { return start + static_cast<double>(on.size()) * period(); }

  OnOffSchedule shifted(double new_start) const {
    OnOffSchedule s = *this;
    s.start = new_start;
    return s;
  }
};

struct SpatialPlan {
  int source_core = 3;
  int sink_core = 2;
  double frequency_ghz = 2.9;
  double duration = 10.0;

  void validate(const ChipTopology& topo) const {
    if (source_core < 0 || source_core >= topo.n_cores || sink_core < 0 || sink_core >= topo.n_cores)
      throw ConfigError("spatial plan core index out of range");
    if (source_core == sink_core) throw ConfigError("spatial plan needs distinct source and sink cores");
    if (!(duration > 0)) throw ConfigError("plan duration must be positive");
  }
};

struct TemporalPlan {
  int shared_core = 3;
  double slice = 0.010;
  double frequency_ghz = 2.9;
  double duration = 1.0;

  void validate(const ChipTopology& topo, const DtsConfig& dts) const {
    if (shared_core < 0 || shared_core >= topo.n_cores) throw ConfigError("temporal plan core index out of range");
    if (slice < dts.refresh_period - 1e-12) throw ConfigError("time slice is shorter than one sensor refresh period");
    if (!(duration > 0)) throw ConfigError("plan duration must be positive");
  }

  /// Sink slices [ (2k+1) t_s, (2k+2) t_s ) that start before `duration`.
  std::vector<TimeWindow> sink_windows() const {
    std::vector<TimeWindow> w;
    for (std::size_t k = 0;; ++k) {
      const double b = (2.0 * static_cast<double>(k) + 1.0) * slice;
      if (b >= duration - 1e-12) break;
      w.push_back({b, std::min(b + slice, duration + slice)});
    }
    return w;
  }
};

/// Ground truth next to what the sink saw, for diagnostics and plotting.
struct PartitionRun {
  ThermalTrace truth;
  SensorTrace sink;
};

inline PartitionRun run_spatial_detailed(const SpatialPlan& plan, const OnOffSchedule& source_activity,
                                         const Platform& platform, const DtsConfig& dts) {
  platform.validate();
  plan.validate(platform.topology);
  if (source_activity.mode != Mode::spatial) throw ConfigError("spatial run needs a spatial schedule");
  if (source_activity.end() > plan.duration + 1e-9) throw ConfigError("activity schedule outlasts the plan");

  const int n = platform.topology.n_cores;
  const double idle = power_of(platform.power, 0.0, plan.frequency_ghz);
  const double active = power_of(platform.power, 1.0, plan.frequency_ghz);
  PowerSchedule sched = PowerSchedule::uniform(n, idle, plan.frequency_ghz);
  sched.core_watts[static_cast<std::size_t>(plan.sink_core)] = PiecewiseConstant(idle + platform.sink_load_w);
  auto& src = sched.core_watts[static_cast<std::size_t>(plan.source_core)];
  for (std::size_t k = 0; k < source_activity.on.size(); ++k) {
    if (!source_activity.on[k]) continue;
    const double b = source_activity.start + static_cast<double>(k) * source_activity.slot;
    src.assign(b, b + source_activity.slot, active);
  }

  PartitionRun run;
  run.truth = simulate(platform.topology, sched, plan.duration, platform.dt, platform.idle_state());
  run.sink = observe(run.truth, plan.sink_core, dts);
  return run;
}

/// Sink-core trace for a spatially partitioned source/sink pair.
inline SensorTrace run_spatial(const SpatialPlan& plan, const OnOffSchedule& source_activity,
                               const Platform& platform, const DtsConfig& dts) {
  return run_spatial_detailed(plan, source_activity, platform, dts).sink;
}

inline PartitionRun run_temporal_detailed(const TemporalPlan& plan, const OnOffSchedule& source_activity,
                                          const Platform& platform, const DtsConfig& dts) {
  platform.validate();
  dts.validate();
  plan.validate(platform.topology, dts);
  if (source_activity.mode != Mode::temporal) throw ConfigError("temporal run needs a temporal schedule");
  if (std::abs(source_activity.slot - plan.slice) > 1e-12)
    throw ConfigError("schedule slot does not match the plan's time slice");
  const double pairs = source_activity.start / (2.0 * plan.slice);
  if (std::abs(pairs - std::round(pairs)) > 1e-9)
    throw ConfigError("temporal schedule must start on a slice-pair boundary");
  if (source_activity.end() > plan.duration + 1e-9) throw ConfigError("activity schedule outlasts the plan");

  const int n = platform.topology.n_cores;
  const double idle = power_of(platform.power, 0.0, plan.frequency_ghz);
  const double active = power_of(platform.power, 1.0, plan.frequency_ghz);
  PowerSchedule sched = PowerSchedule::uniform(n, idle, plan.frequency_ghz);
  auto& shared = sched.core_watts[static_cast<std::size_t>(plan.shared_core)];

  const auto windows = plan.sink_windows();
  for (const auto& w : windows) shared.assign(w.begin, w.end, idle + platform.sink_load_w);
  for (std::size_t k = 0; k < source_activity.on.size(); ++k) {
    if (!source_activity.on[k]) continue;
    const double b = source_activity.start + 2.0 * static_cast<double>(k) * plan.slice;
    shared.assign(b, b + plan.slice, active);
  }

  PartitionRun run;
  run.truth = simulate(platform.topology, sched, plan.duration, platform.dt, platform.idle_state());
  run.sink = observe(run.truth, plan.shared_core, dts, windows);
  return run;
}

/// Shared-core trace gated to the sink's slices.
inline SensorTrace run_temporal(const TemporalPlan& plan, const OnOffSchedule& source_activity,
                                const Platform& platform, const DtsConfig& dts) {
  return run_temporal_detailed(plan, source_activity, platform, dts).sink;
}

}  // namespace thermalcc
