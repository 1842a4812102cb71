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
 * @file calibration.hpp
 * @brief Fitting the thermal model to step-response targets, and sweeping
 *        the bit period to build BER tables.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "thermalcc/chanstack.hpp"
#include "thermalcc/errors.hpp"
#include "thermalcc/partitioning.hpp"
#include "thermalcc/sensor.hpp"
#include "thermalcc/thermal_model.hpp"

namespace thermalcc {

// ---------------------------------------------------------------------------
// Link trials
// ---------------------------------------------------------------------------

/// Where source and sink live. In spatial mode the sink sits `hop` cores
/// below the source; in temporal mode both share `source_core`.
struct LinkSetup {
  Mode mode = Mode::spatial;
  int source_core = 3;
  int hop = 1;
  double frequency_ghz = 2.9;
  double threshold = 2.0;

  int sink_core() const { return mode == Mode::spatial ? source_core - hop : source_core; }

  void validate(const ChipTopology& topo) const {
    if (source_core < 0 || source_core >= topo.n_cores) throw ConfigError("source core out of range");
    if (mode == Mode::spatial) {
      if (hop < 1) throw ConfigError("spatial link needs hop >= 1");
      if (sink_core() < 0) throw ConfigError("sink core out of range for the requested hop count");
    }
  }
};

struct BlockResult {
  Bits sent;
  Bits received;
  bool synced = false;
  double offset = 0.0;
  std::size_t errors = 0;
  double ber = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double lead_in(const ChannelParams& p) {
  if (p.mode == Mode::spatial) return std::max(2.0, 3.0 * p.bit_period);
  return 25.0 * p.period();
}

/// The receiver keeps listening for one more frame so a late lock still has
/// periods to read.
inline double tail(const ChannelParams& p, std::size_t payload_bits) {
  return static_cast<double>(kPreambleBits + payload_bits) * p.period();
}

}  // namespace detail

/// Sends one preamble-framed block through the simulated channel and decodes
/// it. On sync failure every payload bit counts as lost.
inline BlockResult transmit_block(const Platform& platform, DtsConfig dts, const LinkSetup& link, double bit_period,
                                  const Bits& payload, std::uint64_t seed) {
  link.validate(platform.topology);
  dts.seed = seed;
  const ChannelParams params{bit_period, link.threshold, link.mode};
  params.validate(dts.resolution);

  const OnOffSchedule sched = modulate(Frame{payload}, params).shifted(detail::lead_in(params));
  const double duration = sched.end() + detail::tail(params, payload.size());
  SensorTrace trace;
  if (link.mode == Mode::spatial) {
    trace = run_spatial(SpatialPlan{link.source_core, link.sink_core(), link.frequency_ghz, duration}, sched,
                        platform, dts);
  } else {
    trace = run_temporal(TemporalPlan{link.source_core, bit_period, link.frequency_ghz, duration}, sched, platform,
                         dts);
  }

  BlockResult r;
  r.sent = payload;
  r.seed = seed;
  const auto off = find_preamble(trace, params);
  if (!off) {
    r.errors = payload.size();
    r.ber = payload.empty() ? 0.0 : 1.0;
    return r;
  }
  r.synced = true;
  r.offset = *off;
  const double start = *off + static_cast<double>(kPreambleBits) * params.period();
  try {
    r.received = demodulate(trace, start, payload.size(), params);
  } catch (const TruncationError& e) {
    r.received = e.recovered();
  }
  for (std::size_t i = 0; i < payload.size(); ++i)
    if (i >= r.received.size() || r.received[i] != payload[i]) ++r.errors;
  r.ber = payload.empty() ? 0.0 : static_cast<double>(r.errors) / static_cast<double>(payload.size());
  return r;
}

inline Bits alternating_bits(std::size_t n) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (i % 2 == 0) ? 1 : 0;
  return b;
}

// ---------------------------------------------------------------------------
// Model fit
// ---------------------------------------------------------------------------

struct FitTargets {
  double fast_rise = 5.0;          // C within rise_window
  double rise_window = 0.025;      // s
  double saturation = 43.0;        // C
  double decay_time = 11.0;        // s to come back within decay_band of baseline
  double decay_band = 1.0;         // C
  double idle_baseline = 35.0;     // C
  double hop_detect = 2.0;         // C, 1-hop steady rise must reach this
  double hop_pulse = 1.5;          // s, 3-hop pulse rise must stay below hop_detect
  double frequency_ghz = 2.9;
  int source_core = 3;

  void validate() const {
    if (!(fast_rise > 0 && rise_window > 0 && saturation > 0 && decay_time > 0 && decay_band > 0 &&
          idle_baseline > 0 && hop_detect > 0 && hop_pulse > 0))
      throw ConfigError("fit targets must be positive");
    if (!(idle_baseline < saturation)) throw ConfigError("fit targets need idle_baseline < saturation");
    if (!(idle_baseline + fast_rise <= saturation)) throw ConfigError("fast rise cannot exceed saturation");
  }
};

/// What the model does under the fit's stimulus: the source core heated at
/// full activity for `on_time` seconds from idle equilibrium, then released.
struct StepResponse {
  double baseline = 0.0;
  double rise = 0.0;        // within the rise window
  double saturation = 0.0;  // at the end of the ON phase
  double decay_time = 0.0;  // after release; infinity when never reached
  std::array<double, 3> hop_steady{};  // steady rise at 1, 2, 3 hops
  double hop3_pulse = 0.0;             // peak 3-hop rise over a hop_pulse pulse
};

inline StepResponse measure_step_response(const Platform& platform, const FitTargets& t, double on_time = 100.0,
                                          double off_time = 60.0) {
  const auto& topo = platform.topology;
  const int n = topo.n_cores;
  const int src = t.source_core;
  if (src < 3 || src >= n) throw ConfigError("fit needs a source core with three neighbors below it");
  const double idle = power_of(platform.power, 0.0, t.frequency_ghz);
  const double active = power_of(platform.power, 1.0, t.frequency_ghz);
  const ThermalState idle_state = platform.idle_state();
  const auto s = static_cast<std::size_t>(src);

  StepResponse r;
  r.baseline = idle_state.die_temps[s];

  PowerSchedule step_sched = PowerSchedule::uniform(n, idle, t.frequency_ghz);
  step_sched.core_watts[s].assign(0.0, on_time, active);
  const ThermalTrace tr = simulate(topo, step_sched, on_time + off_time, platform.dt, idle_state);
  const auto k_rise = static_cast<std::size_t>(std::llround(t.rise_window / platform.dt));
  const auto k_on = static_cast<std::size_t>(std::llround(on_time / platform.dt));
  r.rise = tr.die_temp(k_rise, src) - r.baseline;
  r.saturation = tr.die_temp(k_on, src);
  r.decay_time = std::numeric_limits<double>::infinity();
  for (std::size_t k = k_on; k < tr.size(); ++k) {
    if (tr.die_temp(k, src) <= r.baseline + t.decay_band) {
      r.decay_time = tr.time(k) - on_time;
      break;
    }
  }

  std::vector<double> hot(static_cast<std::size_t>(n), idle);
  hot[s] = active;
  const ThermalState steady = steady_state(topo, hot);
  for (int h = 1; h <= 3; ++h) {
    const auto c = static_cast<std::size_t>(src - h);
    r.hop_steady[static_cast<std::size_t>(h - 1)] = steady.die_temps[c] - idle_state.die_temps[c];
  }

  PowerSchedule pulse = PowerSchedule::uniform(n, idle, t.frequency_ghz);
  pulse.core_watts[s].assign(0.0, t.hop_pulse, active);
  const ThermalTrace tp = simulate(topo, pulse, 2.0 * t.hop_pulse, platform.dt, idle_state);
  const auto far = static_cast<std::size_t>(src - 3);
  for (std::size_t k = 0; k < tp.size(); ++k)
    r.hop3_pulse = std::max(r.hop3_pulse, tp.die_temp(k, static_cast<int>(far)) - idle_state.die_temps[far]);
  return r;
}

struct FitResidual {
  std::string target;
  double wanted = 0.0;
  double got = 0.0;
  double relative_error = 0.0;
  double tolerance = 0.0;
  bool ok = false;
};

/// Per-target residuals. Temperatures are compared as rises above ambient so
/// the relative error is not diluted by the ambient offset.
inline std::vector<FitResidual> fit_residuals(const StepResponse& m, const FitTargets& t, double ambient) {
  auto rel = [](double got, double want) { return (got - want) / want; };
  std::vector<FitResidual> out;
  auto add = [&](std::string name, double want, double got, double e, double tol) {
    out.push_back({std::move(name), want, got, e, tol, std::abs(e) <= tol});
  };
  add("fast_rise", t.fast_rise, m.rise, rel(m.rise, t.fast_rise), 0.2);
  add("saturation", t.saturation, m.saturation, rel(m.saturation - ambient, t.saturation - ambient), 0.2);
  add("decay_time", t.decay_time, m.decay_time,
      std::isfinite(m.decay_time) ? rel(m.decay_time, t.decay_time) : 1e3, 0.3);
  add("idle_baseline", t.idle_baseline, m.baseline, rel(m.baseline - ambient, t.idle_baseline - ambient), 0.2);
  const double hop_ok = m.hop_steady[0] >= t.hop_detect && m.hop_steady[0] > m.hop_steady[1] &&
                                m.hop_steady[1] > m.hop_steady[2] && m.hop3_pulse < t.hop_detect
                            ? 0.0
                            : 1.0;
  const double hop_gap = std::max(0.0, t.hop_detect - m.hop_steady[0]) +
                         std::max(0.0, m.hop3_pulse - 0.9 * t.hop_detect);
  add("hop_pattern", 0.0, hop_gap, hop_ok > 0 ? std::max(hop_gap, 1.0) : hop_gap / t.hop_detect, 0.2);
  return out;
}

struct FitOptions {
  int max_sweeps = 60;
  double initial_step = 0.2;  // in log space
  double min_step = 2e-3;
  double target_objective = 2.5e-4;  // stop once the summed squared error is this small
  double box = 4.0;           // each parameter stays within [start/box, start*box]
};

struct FitResult {
  Platform platform;
  StepResponse response;
  std::vector<FitResidual> residuals;
  double objective = 0.0;
  int sweeps = 0;
  bool within_tolerance = false;

  std::string diagnostic() const {
    std::ostringstream os;
    os << (within_tolerance ? "fit within tolerance" : "fit outside tolerance") << " after " << sweeps
       << " sweeps:";
    for (const auto& r : residuals)
      os << ' ' << r.target << "=" << r.got << " (want " << r.wanted << ", rel " << r.relative_error << ")";
    return os.str();
  }
};

namespace detail {

inline constexpr std::size_t kFitParams = 7;

inline std::array<double, kFitParams> fit_vector(const Platform& p) {
  return {p.topology.core_capacitance, p.topology.spreader_capacitance, p.topology.r_die_to_spreader,
          p.topology.r_spreader_to_ambient, p.topology.r_lateral, p.power.active_coeff, p.power.idle_w};
}

inline Platform with_fit_vector(Platform p, const std::array<double, kFitParams>& v) {
  p.topology.core_capacitance = v[0];
  p.topology.spreader_capacitance = v[1];
  p.topology.r_die_to_spreader = v[2];
  p.topology.r_spreader_to_ambient = v[3];
  p.topology.r_lateral = v[4];
  p.power.active_coeff = v[5];
  p.power.idle_w = v[6];
  return p;
}

inline double fit_objective(const std::vector<FitResidual>& res) {
  double s = 0.0;
  for (const auto& r : res) s += r.relative_error * r.relative_error;
  return s;
}

}  // namespace detail

/// Coordinate descent in log-parameter space over core C, spreader C,
/// die-to-spreader R, spreader-to-ambient R, lateral R, active coefficient
/// and idle power. Deterministic. Candidates that would violate the Euler
/// stability bound are skipped.
inline FitResult fit_model(const FitTargets& targets, const Platform& start, const FitOptions& opt = {}) {
  targets.validate();
  start.validate();
  const double ambient = start.topology.ambient_temp;
  if (!(targets.idle_baseline > ambient)) throw ConfigError("idle baseline must lie above ambient");

  auto evaluate = [&](const Platform& p, StepResponse& resp, std::vector<FitResidual>& res) {
    resp = measure_step_response(p, targets);
    res = fit_residuals(resp, targets, ambient);
    return detail::fit_objective(res);
  };

  const auto origin = detail::fit_vector(start);
  std::array<double, detail::kFitParams> x{};
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::log(origin[i]);
  auto platform_at = [&](const std::array<double, detail::kFitParams>& lx) {
    std::array<double, detail::kFitParams> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(lx[i]);
    return detail::with_fit_vector(start, v);
  };
  auto admissible = [&](const std::array<double, detail::kFitParams>& lx) {
    for (std::size_t i = 0; i < lx.size(); ++i)
      if (std::abs(lx[i] - std::log(origin[i])) > std::log(opt.box) + 1e-12) return false;
    return platform_at(lx).topology.stability_bound() > start.dt;
  };

  FitResult best;
  best.platform = start;
  best.objective = evaluate(start, best.response, best.residuals);
  double step = opt.initial_step;
  int sweep = 0;
  for (; sweep < opt.max_sweeps && step >= opt.min_step && best.objective > opt.target_objective; ++sweep) {
    bool improved = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double dir : {+1.0, -1.0}) {
        auto cand = x;
        cand[i] += dir * step;
        if (!admissible(cand)) continue;
        const Platform p = platform_at(cand);
        StepResponse resp;
        std::vector<FitResidual> res;
        const double obj = evaluate(p, resp, res);
        if (obj < best.objective) {
          x = cand;
          best.platform = p;
          best.response = resp;
          best.residuals = std::move(res);
          best.objective = obj;
          improved = true;
          break;
        }
      }
      if (best.objective <= opt.target_objective) break;
    }
    if (!improved) step *= 0.5;
  }
  best.sweeps = sweep;
  best.within_tolerance =
      std::all_of(best.residuals.begin(), best.residuals.end(), [](const FitResidual& r) { return r.ok; });
  return best;
}

// ---------------------------------------------------------------------------
// Bit-period sweeps
// ---------------------------------------------------------------------------

struct CalibrationRow {
  double bit_period_ms = 0.0;
  Mode mode = Mode::spatial;
  int hop = 1;  // spatial hop count; 0 in temporal mode
  int core = 3;  // source (spatial) or shared (temporal) core
  double frequency_ghz = 2.9;
  bool decodable = false;
  double ber_percent = 0.0;  // mean over synced trials; meaningless when undecodable
  int synced = 0;
  int trials = 0;
  std::vector<double> trial_ber_percent;  // synced trials only
};

struct CalibrationTable {
  std::vector<CalibrationRow> rows;
};

/// For each bit period, sends the 100-bit alternating pattern `trials` times
/// with seeds base_seed, base_seed+1, ... and records the mean BER over the
/// trials that synchronised, or undecodable if none did.
inline CalibrationTable calibrate_tb(const Platform& platform, const DtsConfig& dts, const LinkSetup& link,
                                     const std::vector<double>& bit_periods, int trials,
                                     std::uint64_t base_seed = 1) {
  if (bit_periods.empty()) throw ConfigError("bit-period sweep list is empty");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const Bits payload = alternating_bits(kMaxBlockPayload);
  CalibrationTable table;
  for (double tb : bit_periods) {
    CalibrationRow row;
    row.bit_period_ms = tb * 1000.0;
    row.mode = link.mode;
    row.hop = link.mode == Mode::spatial ? link.hop : 0;
    row.core = link.source_core;
    row.frequency_ghz = link.frequency_ghz;
    row.trials = trials;
    double sum = 0.0;
    for (int k = 0; k < trials; ++k) {
      const BlockResult r = transmit_block(platform, dts, link, tb, payload, base_seed + static_cast<std::uint64_t>(k));
      if (!r.synced) continue;
      ++row.synced;
      row.trial_ber_percent.push_back(100.0 * r.ber);
      sum += 100.0 * r.ber;
    }
    row.decodable = row.synced > 0;
    row.ber_percent = row.decodable ? sum / row.synced : 0.0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Smallest bit period (seconds) whose decodable BER is at or below the
/// ceiling (percent); nullopt when none qualifies.
inline std::optional<double> select_min_tb(const CalibrationTable& table, double ber_ceiling_percent) {
  if (table.rows.empty()) throw ConfigError("calibration table is empty");
  std::optional<double> best;
  for (const auto& r : table.rows) {
    if (!r.decodable || r.ber_percent > ber_ceiling_percent) continue;
    const double tb = r.bit_period_ms / 1000.0;
    if (!best || tb < *best) best = tb;
  }
  return best;
}

struct NoiseFit {
  double wander_sigma = 0.0;
  double ber_percent = 0.0;
  int iterations = 0;
};

/// Bisects the wander amplitude so the mean alternating-pattern BER at the
/// given link and bit period lands on `target_percent`. Uses the same seed
/// set at every probe, so the search is deterministic.
inline NoiseFit fit_noise(const Platform& platform, const DtsConfig& dts, const LinkSetup& link, double bit_period,
                          double target_percent, int trials = 10, double lo = 0.0, double hi = 1.5,
                          int iterations = 14, std::uint64_t base_seed = 1) {
  auto probe = [&](double sigma) {
    DtsConfig d = dts;
    d.wander_sigma = sigma;
    const auto t = calibrate_tb(platform, d, link, {bit_period}, trials, base_seed);
    return t.rows.front().decodable ? t.rows.front().ber_percent : 100.0;
  };
  NoiseFit fit;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid) < target_percent)
      lo = mid;
    else
      hi = mid;
    fit.iterations = i + 1;
  }
  fit.wander_sigma = 0.5 * (lo + hi);
  fit.ber_percent = probe(fit.wander_sigma);
  return fit;
}

}  // namespace thermalcc
