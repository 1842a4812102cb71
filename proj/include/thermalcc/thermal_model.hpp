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
 * @file thermal_model.hpp
 * @brief Lumped RC model of an N-core die sitting on a shared heat spreader.
 *
 * Node layout: one die node per core, arranged on a line (core i touches
 * i-1 and i+1 through r_lateral), each die node tied to a single spreader
 * node through r_die_to_spreader, and the spreader tied to ambient through
 * r_spreader_to_ambient. The die nodes carry the fast (ms) response and the
 * spreader the slow (s) one.
 *
 * Integration is fixed-step forward Euler, so identical inputs always give
 * bit-identical traces.
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "thermalcc/errors.hpp"

namespace thermalcc {

/// Share of a core's power deposited `hotspot_offset` positions away when
/// the hotspot is shifted.
inline constexpr double kHotspotShare = 0.25;

struct ChipTopology {
  int n_cores = 8;
  double core_capacitance = 0.004;      // J/C, per die node
  double spreader_capacitance = 23.45;  // J/C
  double r_lateral = 1.7;               // C/W, between adjacent die nodes
  double r_die_to_spreader = 1.9;       // C/W, per core
  double r_spreader_to_ambient = 0.4528; // C/W, fan folded in
  double ambient_temp = 22.0;           // C
  int hotspot_offset = 0;

  void validate() const {
    if (n_cores < 1) throw ConfigError("n_cores must be >= 1");
    if (!(core_capacitance > 0) || !(spreader_capacitance > 0))
      throw ConfigError("capacitances must be positive");
    if (!(r_lateral > 0) || !(r_die_to_spreader > 0) || !(r_spreader_to_ambient > 0))
      throw ConfigError("thermal resistances must be positive");
    if (!std::isfinite(ambient_temp)) throw ConfigError("ambient_temp must be finite");
    if (hotspot_offset != 0 && std::abs(hotspot_offset) >= n_cores)
      throw ConfigError("hotspot_offset must be smaller than n_cores");
  }

  /// Largest forward-Euler step that keeps every node update a convex
  /// combination of its neighbours (min over nodes of C / sum of conductances).
  double stability_bound() const {
    const double g_lat = n_cores > 1 ? 1.0 / r_lateral : 0.0;
    const double die_g = 1.0 / r_die_to_spreader + (n_cores > 2 ? 2.0 : (n_cores == 2 ? 1.0 : 0.0)) * g_lat;
    const double sp_g = n_cores / r_die_to_spreader + 1.0 / r_spreader_to_ambient;
    return std::min(core_capacitance / die_g, spreader_capacitance / sp_g);
  }
};

struct ThermalState {
  std::vector<double> die_temps;
  double spreader_temp = 0.0;
  double time = 0.0;

  static ThermalState ambient(const ChipTopology& topo) {
    return {std::vector<double>(static_cast<std::size_t>(topo.n_cores), topo.ambient_temp), topo.ambient_temp, 0.0};
  }
};

/// Frequencies the platform can run at, 1.2 GHz to 2.9 GHz in 100 MHz steps.
inline std::vector<double> default_frequencies() {
  std::vector<double> f;
  for (int i = 12; i <= 29; ++i) f.push_back(i / 10.0);
  return f;
}

/// Dynamic power grows as frequency^exponent on top of a constant idle floor.
struct PowerModel {
  double idle_w = 2.361;
  double active_coeff = 1.016;   // W per GHz^exponent at full activity
  double frequency_exponent = 1.7;
  std::vector<double> frequencies = default_frequencies();

  bool supports(double ghz) const {
    return std::any_of(frequencies.begin(), frequencies.end(), [&](double f) { return std::abs(f - ghz) < 1e-9; });
  }

  void validate() const {
    if (!(idle_w >= 0) || !(active_coeff > 0) || !(frequency_exponent > 0))
      throw ConfigError("power model constants must be positive");
    if (frequencies.empty()) throw ConfigError("power model lists no frequencies");
  }
};

inline double power_of(const PowerModel& model, double activity, double frequency_ghz) {
  if (!model.supports(frequency_ghz)) {
    std::ostringstream os;
    os << "unsupported frequency " << frequency_ghz << " GHz";
    throw ConfigError(os.str());
  }
  if (!(activity >= 0.0 && activity <= 1.0)) throw ConfigError("activity must lie in [0, 1]");
  return model.idle_w + activity * model.active_coeff * std::pow(frequency_ghz, model.frequency_exponent);
}

/// Right-continuous step function: value[k] holds on [times[k], times[k+1]).
class PiecewiseConstant {
 public:
  PiecewiseConstant() = default;
  explicit PiecewiseConstant(double value) : times_{0.0}, values_{value} {}

  /// Overwrites the function with `value` on [begin, end).
  void assign(double begin, double end, double value) {
    if (!(end > begin)) return;
    const double after = at(end);
    std::vector<double> t;
    std::vector<double> v;
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (times_[k] < begin - kEps) {
        t.push_back(times_[k]);
        v.push_back(values_[k]);
      }
    }
    t.push_back(begin);
    v.push_back(value);
    t.push_back(end);
    v.push_back(after);
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (times_[k] > end + kEps) {
        t.push_back(times_[k]);
        v.push_back(values_[k]);
      }
    }
    times_ = std::move(t);
    values_ = std::move(v);
    compact();
  }

  double at(double time) const {
    if (times_.empty()) return 0.0;
    auto it = std::upper_bound(times_.begin(), times_.end(), time + kEps);
    if (it == times_.begin()) return values_.front();
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
  }

  const std::vector<double>& breakpoints() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  static constexpr double kEps = 1e-9;

  void compact() {
    std::vector<double> t;
    std::vector<double> v;
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (!v.empty() && v.back() == values_[k]) continue;
      t.push_back(times_[k]);
      v.push_back(values_[k]);
    }
    times_ = std::move(t);
    values_ = std::move(v);
  }

  std::vector<double> times_;
  std::vector<double> values_;
};

/// Per-core power over time. One frequency is shared by every core.
struct PowerSchedule {
  double frequency_ghz = 2.9;
  std::vector<PiecewiseConstant> core_watts;

  static PowerSchedule uniform(int n_cores, double watts, double frequency_ghz) {
    return {frequency_ghz, std::vector<PiecewiseConstant>(static_cast<std::size_t>(n_cores), PiecewiseConstant(watts))};
  }

  void validate(const ChipTopology& topo) const {
    if (core_watts.size() != static_cast<std::size_t>(topo.n_cores))
      throw ConfigError("power schedule core count does not match topology");
    for (const auto& pw : core_watts)
      for (double v : pw.values())
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("power must be finite and non-negative");
  }
};

/// Dense trace: row k is the state at time k * dt.
struct ThermalTrace {
  int n_cores = 0;
  double dt = 0.0;
  std::vector<double> die;       // row-major, (steps + 1) x n_cores
  std::vector<double> spreader;  // steps + 1

  std::size_t size() const { return spreader.size(); }
  bool empty() const { return spreader.empty(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  double duration() const { return empty() ? 0.0 : time(size() - 1); }
  double die_temp(std::size_t k, int core) const {
    return die[k * static_cast<std::size_t>(n_cores) + static_cast<std::size_t>(core)];
  }
  std::span<const double> row(std::size_t k) const {
    return {die.data() + k * static_cast<std::size_t>(n_cores), static_cast<std::size_t>(n_cores)};
  }
  ThermalState state(std::size_t k) const {
    auto r = row(k);
    return {std::vector<double>(r.begin(), r.end()), spreader[k], time(k)};
  }
};

namespace detail {

/// Deposits core powers onto die nodes, shifting a share by the hotspot offset.
inline void deposit(const ChipTopology& topo, std::span<const double> powers, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const int n = topo.n_cores;
  for (int i = 0; i < n; ++i) {
    const double p = powers[static_cast<std::size_t>(i)];
    if (topo.hotspot_offset == 0) {
      out[static_cast<std::size_t>(i)] += p;
      continue;
    }
    const int j = std::clamp(i + topo.hotspot_offset, 0, n - 1);
    out[static_cast<std::size_t>(i)] += (1.0 - kHotspotShare) * p;
    out[static_cast<std::size_t>(j)] += kHotspotShare * p;
  }
}

/// One Euler step from (die, spreader) into (die_out, spreader_out).
inline void euler(const ChipTopology& topo, std::span<const double> die, double spreader,
                  std::span<const double> node_power, double dt, std::span<double> die_out, double& spreader_out) {
  const int n = topo.n_cores;
  const double g_lat = 1.0 / topo.r_lateral;
  const double g_ds = 1.0 / topo.r_die_to_spreader;
  const double g_sa = 1.0 / topo.r_spreader_to_ambient;
  const double k_die = dt / topo.core_capacitance;
  double into_spreader = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double t = die[u];
    double flow = node_power[u];
    if (i > 0) flow -= (t - die[u - 1]) * g_lat;
    if (i + 1 < n) flow -= (t - die[u + 1]) * g_lat;
    const double to_sp = (t - spreader) * g_ds;
    flow -= to_sp;
    into_spreader += to_sp;
    die_out[u] = t + k_die * flow;
  }
  const double sp_flow = into_spreader - (spreader - topo.ambient_temp) * g_sa;
  spreader_out = spreader + dt / topo.spreader_capacitance * sp_flow;
}

inline void check_step(const ChipTopology& topo, double dt) {
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  const double bound = topo.stability_bound();
  if (dt > bound) {
    std::ostringstream os;
    os << "dt=" << dt << " s exceeds the stability bound dt_max=" << bound << " s";
    throw ConfigError(os.str());
  }
}

}  // namespace detail

/// Advances `state` by one forward-Euler step of length dt.
inline ThermalState step(const ThermalState& state, const ChipTopology& topology, std::span<const double> powers,
                         double dt) {
  topology.validate();
  detail::check_step(topology, dt);
  if (powers.size() != static_cast<std::size_t>(topology.n_cores))
    throw ConfigError("powers length does not match n_cores");
  if (state.die_temps.size() != powers.size()) throw ConfigError("state does not match topology");
  std::vector<double> node_power(powers.size());
  detail::deposit(topology, powers, node_power);
  ThermalState next;
  next.die_temps.resize(powers.size());
  detail::euler(topology, state.die_temps, state.spreader_temp, node_power, dt, next.die_temps, next.spreader_temp);
  next.time = state.time + dt;
  return next;
}

/// Integrates the schedule from `initial` for `duration` seconds.
inline ThermalTrace simulate(const ChipTopology& topology, const PowerSchedule& schedule, double duration, double dt,
                             const ThermalState& initial) {
  topology.validate();
  schedule.validate(topology);
  detail::check_step(topology, dt);
  if (!(duration > 0)) throw ConfigError("duration must be positive");
  if (initial.die_temps.size() != static_cast<std::size_t>(topology.n_cores))
    throw ConfigError("initial state does not match topology");

  const auto n = static_cast<std::size_t>(topology.n_cores);
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  ThermalTrace trace;
  trace.n_cores = topology.n_cores;
  trace.dt = dt;
  trace.die.resize((steps + 1) * n);
  trace.spreader.resize(steps + 1);
  std::copy(initial.die_temps.begin(), initial.die_temps.end(), trace.die.begin());
  trace.spreader[0] = initial.spreader_temp;

  std::vector<double> powers(n);
  std::vector<double> node_power(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (std::size_t i = 0; i < n; ++i) powers[i] = schedule.core_watts[i].at(t);
    detail::deposit(topology, powers, node_power);
    std::span<const double> cur(trace.die.data() + k * n, n);
    std::span<double> nxt(trace.die.data() + (k + 1) * n, n);
    detail::euler(topology, cur, trace.spreader[k], node_power, dt, nxt, trace.spreader[k + 1]);
  }
  return trace;
}

inline ThermalTrace simulate(const ChipTopology& topology, const PowerSchedule& schedule, double duration,
                             double dt) {
  return simulate(topology, schedule, duration, dt, ThermalState::ambient(topology));
}

/// Equilibrium of the RC network under constant powers.
inline ThermalState steady_state(const ChipTopology& topology, std::span<const double> powers) {
  topology.validate();
  if (powers.size() != static_cast<std::size_t>(topology.n_cores))
    throw ConfigError("powers length does not match n_cores");
  const int n = topology.n_cores;
  const double g_lat = 1.0 / topology.r_lateral;
  const double g_ds = 1.0 / topology.r_die_to_spreader;
  const double g_sa = 1.0 / topology.r_spreader_to_ambient;

  // Unknowns are rises above ambient: die nodes 0..n-1, spreader n.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n + 1);
  std::vector<double> node_power(static_cast<std::size_t>(n));
  detail::deposit(topology, powers, node_power);
  for (int i = 0; i < n; ++i) {
    p(i) = node_power[static_cast<std::size_t>(i)];
    g(i, i) += g_ds;
    g(i, n) -= g_ds;
    g(n, i) -= g_ds;
    g(n, n) += g_ds;
    if (i + 1 < n) {
      g(i, i) += g_lat;
      g(i + 1, i + 1) += g_lat;
      g(i, i + 1) -= g_lat;
      g(i + 1, i) -= g_lat;
    }
  }
  g(n, n) += g_sa;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw InternalError("singular thermal network");
  const Eigen::VectorXd rise = ldlt.solve(p);
  if (!rise.allFinite()) throw InternalError("singular thermal network");

  ThermalState out;
  out.die_temps.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.die_temps[static_cast<std::size_t>(i)] = topology.ambient_temp + rise(i);
  out.spreader_temp = topology.ambient_temp + rise(n);
  return out;
}

}  // namespace thermalcc
