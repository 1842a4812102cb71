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
 * @file sensor.hpp
 * @brief Digital thermal sensor as seen from user space.
 *
 * A reading is the true die temperature plus additive Gaussian noise,
 * rounded half-up onto the resolution grid, refreshed once per
 * `refresh_period`. The noise has two parts: an independent per-tick term
 * (`noise_sigma`) and a slowly wandering term (`wander_sigma`). The wander
 * is white noise pushed through `wander_order` identical first-order
 * low-pass stages of time constant `wander_tau`, rescaled so its stationary
 * deviation is exactly `wander_sigma`. Order 1 is an Ornstein-Uhlenbeck
 * process; higher orders are smoother at short lags. The stationary marginal of the sum is Gaussian with
 * variance noise_sigma^2 + wander_sigma^2.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "thermalcc/errors.hpp"
#include "thermalcc/thermal_model.hpp"

namespace thermalcc {

struct DtsConfig {
  double tj_max = 95.0;
  double resolution = 1.0;
  double refresh_period = 0.002;
  double noise_sigma = 0.02;
  double wander_sigma = 0.35;
  double wander_tau = 0.035;
  int wander_order = 8;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(resolution > 0)) throw ConfigError("sensor resolution must be positive");
    if (!(refresh_period > 0)) throw ConfigError("sensor refresh_period must be positive");
    if (!(noise_sigma >= 0) || !(wander_sigma >= 0)) throw ConfigError("noise sigmas must be non-negative");
    if (wander_sigma > 0 && !(wander_tau > 0)) throw ConfigError("wander_tau must be positive");
    if (wander_order < 1 || wander_order > 8) throw ConfigError("wander_order must be in [1, 8]");
  }

  DtsConfig noiseless() const {
    DtsConfig c = *this;
    c.noise_sigma = 0.0;
    c.wander_sigma = 0.0;
    return c;
  }
};

struct SensorSample {
  double time = 0.0;
  int core = 0;
  double reading = 0.0;

  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

struct SensorTrace {
  std::vector<SensorSample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }

  std::vector<double> readings() const {
    std::vector<double> r;
    r.reserve(samples.size());
    for (const auto& s : samples) r.push_back(s.reading);
    return r;
  }

  SensorTrace for_core(int core) const {
    SensorTrace out;
    for (const auto& s : samples)
      if (s.core == core) out.samples.push_back(s);
    return out;
  }

  friend bool operator==(const SensorTrace&, const SensorTrace&) = default;
};

/// Half-open time interval [begin, end).
struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
};

inline double quantize(double value, double resolution) { return std::floor(value / resolution + 0.5) * resolution; }

/// One DTS reading for `true_temp` with the additive noise `noise_c` already drawn.
inline double sample(double true_temp, const DtsConfig& config, double noise_c) {
  if (true_temp >= config.tj_max) throw ThermalTrip(0.0, -1, true_temp);
  return quantize(true_temp + noise_c, config.resolution);
}

/// Per-tick noise draws for one core. Deterministic given (seed, stream).
class NoiseStream {
 public:
  NoiseStream(const DtsConfig& config, std::uint64_t stream)
      : white_(config.noise_sigma), wander_(config.wander_sigma) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x7c0de5u};
    rng_.seed(seq);
    if (wander_ > 0) {
      b_ = std::exp(-config.refresh_period / config.wander_tau);
      stages_.assign(static_cast<std::size_t>(config.wander_order), 0.0);
      gain_ = wander_ / std::sqrt(unit_variance());
      const auto burn_in = static_cast<long>(
          std::ceil(12.0 * config.wander_order * config.wander_tau / config.refresh_period));
      for (long k = 0; k < burn_in; ++k) advance(normal_(rng_));
    }
  }

  double next() {
    double v = 0.0;
    if (white_ > 0) v += white_ * normal_(rng_);
    if (wander_ > 0) {
      v += gain_ * stages_.back();
      advance(normal_(rng_));
    }
    return v;
  }

 private:
  void advance(double e) {
    double in = e;
    for (auto& y : stages_) {
      y = b_ * y + (1.0 - b_) * in;
      in = y;
    }
  }

  // Stationary variance of the cascade output for unit white input, from
  // its impulse response.
  double unit_variance() const {
    std::vector<double> y(stages_.size(), 0.0);
    double var = 0.0;
    double in = 1.0;
    for (long k = 0; k < 1'000'000; ++k) {
      double x = in;
      for (auto& s : y) {
        s = b_ * s + (1.0 - b_) * x;
        x = s;
      }
      in = 0.0;
      var += x * x;
      if (k > 16 && x * x < 1e-18 * var) break;
    }
    return var;
  }

  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double white_;
  double wander_;
  double b_ = 0.0;
  double gain_ = 1.0;
  std::vector<double> stages_;
};

namespace detail {

inline void check_windows(std::span<const TimeWindow> windows) {
  for (std::size_t k = 0; k < windows.size(); ++k) {
    if (!(windows[k].end > windows[k].begin)) throw ConfigError("gating window must have end > begin");
    if (k > 0 && windows[k].begin < windows[k - 1].end - 1e-12)
      throw ConfigError("gating windows must be sorted and non-overlapping");
  }
}

}  // namespace detail

/// Samples one core of a ground-truth trace. The sensor latches a new value
/// at every refresh tick and holds it until the next one.
///
/// Ungated, the result has one sample per tick. With gating windows the
/// reader polls at the start of each window and then once per refresh period
/// while inside it; each poll returns the value latched at the latest tick
/// at or before the poll. Polls are stamped with the poll time. The noise
/// stream advances on every tick, read or not.
inline SensorTrace observe(const ThermalTrace& trace, int core, const DtsConfig& config,
                           std::span<const TimeWindow> gating = {}) {
  config.validate();
  detail::check_windows(gating);
  SensorTrace out;
  if (trace.empty()) return out;
  if (core < 0 || core >= trace.n_cores) throw ConfigError("observed core out of range");

  const double ratio = config.refresh_period / trace.dt;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9)
    throw ConfigError("refresh_period must be an integer multiple of the simulation dt");
  const std::size_t n_ticks = (trace.size() - 1) / stride + 1;

  NoiseStream noise(config, static_cast<std::uint64_t>(core));
  std::size_t drawn = 0;  // ticks whose noise has been consumed
  double latched_noise = 0.0;
  auto read_tick = [&](std::size_t tick) {
    while (drawn <= tick) {
      latched_noise = noise.next();
      ++drawn;
    }
    const double t = static_cast<double>(tick) * config.refresh_period;
    const double truth = trace.die_temp(tick * stride, core);
    if (truth >= config.tj_max) throw ThermalTrip(t, core, truth);
    return quantize(truth + latched_noise, config.resolution);
  };

  if (gating.empty()) {
    out.samples.reserve(n_ticks);
    for (std::size_t tick = 0; tick < n_ticks; ++tick)
      out.samples.push_back({static_cast<double>(tick) * config.refresh_period, core, read_tick(tick)});
    return out;
  }

  for (const auto& w : gating) {
    for (std::size_t j = 0;; ++j) {
      const double poll = w.begin + static_cast<double>(j) * config.refresh_period;
      if (poll >= w.end - 1e-12) break;
      const auto tick = static_cast<std::size_t>(std::floor(poll / config.refresh_period + 1e-9));
      if (tick >= n_ticks) return out;
      out.samples.push_back({poll, core, read_tick(tick)});
    }
  }
  return out;
}

}  // namespace thermalcc
