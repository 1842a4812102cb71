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
 * @file harness.hpp
 * @brief Experiment plans, their execution, and report emission.
 *
 * A report is a JSON document
 *
 *   {"kind", "plan", "trials", "aggregates", "provenance"}
 *
 * plus zero or more tables written as CSV or gnuplot data. Nothing in a
 * report depends on wall-clock time or thread scheduling, so identical
 * plans, configs and seeds produce identical bytes.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "thermalcc/calibration.hpp"
#include "thermalcc/chanstack.hpp"
#include "thermalcc/config.hpp"
#include "thermalcc/csv.hpp"
#include "thermalcc/errors.hpp"
#include "thermalcc/fingerprint.hpp"
#include "thermalcc/partitioning.hpp"

namespace thermalcc {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kPayloadGenerator = "mt19937_64, one bit per draw from the top bit";

enum class PlanKind { fig2_trace, hop_sweep, freq_sweep, calibrate_tb, ber_run, throughput, fingerprint };

inline const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::fig2_trace: return "fig2-trace";
    case PlanKind::hop_sweep: return "hop-sweep";
    case PlanKind::freq_sweep: return "freq-sweep";
    case PlanKind::calibrate_tb: return "calibrate-tb";
    case PlanKind::ber_run: return "ber-run";
    case PlanKind::throughput: return "throughput";
    case PlanKind::fingerprint: return "fingerprint";
  }
  return "?";
}

inline PlanKind plan_kind_from_string(const std::string& s) {
  for (auto k : {PlanKind::fig2_trace, PlanKind::hop_sweep, PlanKind::freq_sweep, PlanKind::calibrate_tb,
                 PlanKind::ber_run, PlanKind::throughput, PlanKind::fingerprint})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown plan kind '" + s + "'");
}

inline std::vector<double> default_bit_periods() { return {0.25, 0.5, 0.75, 1.0, 1.25, 1.5}; }

/// Everything one experiment needs besides the platform config. Fields a
/// kind does not use are ignored and left out of the plan echo.
struct ExperimentPlan {
  PlanKind kind = PlanKind::ber_run;
  std::uint64_t seed = 1;

  // ber-run, throughput; link also drives calibrate-tb, freq-sweep, hop-sweep
  LinkSetup link;
  double bit_period = 0.75;  // s; the time slice in temporal mode
  int blocks = 10;
  std::size_t block_bits = kMaxBlockPayload;

  // calibrate-tb, freq-sweep
  std::vector<double> bit_periods = default_bit_periods();
  std::vector<int> hops{1, 2};
  std::vector<double> frequencies{2.9, 2.4, 1.9};
  int trials = 10;
  double ber_ceiling_percent = 15.0;

  // fig2-trace, hop-sweep
  FitTargets targets;
  double on_time = 100.0;
  double off_time = 60.0;
  double trace_step = 0.01;  // s between emitted trace rows
  std::vector<double> pulses{1.5};
  int max_hop = 3;

  // fingerprint
  FingerprintOptions fingerprint;
  double same_threshold = 0.8;
  double match_threshold = 0.85;

  /// Collects every problem before anything is simulated.
  void validate(const Config& config) const {
    std::vector<std::string> problems;
    auto check = [&](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        problems.push_back(e.what());
      }
    };
    const auto& topo = config.platform.topology;
    const auto& power = config.platform.power;
    auto need_freq = [&](double f) {
      if (!power.supports(f)) problems.push_back("unsupported frequency " + fixed(f, 3) + " GHz");
    };
    auto need_period = [&](double tb, Mode mode) {
      if (!(tb > 0)) {
        problems.push_back("bit periods must be positive");
        return;
      }
      check([&] { ChannelParams{tb, link.threshold, mode}.validate(config.dts.resolution); });
      if (mode == Mode::temporal && tb < config.dts.refresh_period - 1e-12)
        problems.push_back("time slice shorter than the sensor refresh period");
    };

    switch (kind) {
      case PlanKind::fig2_trace:
      case PlanKind::hop_sweep:
        check([&] { targets.validate(); });
        if (targets.source_core < 3 || targets.source_core >= topo.n_cores)
          problems.push_back("source core needs three neighbours below it");
        need_freq(targets.frequency_ghz);
        if (kind == PlanKind::fig2_trace) {
          if (!(on_time > targets.rise_window) || !(off_time > 0)) problems.push_back("on/off times must be positive");
          if (!(trace_step >= config.platform.dt)) problems.push_back("trace_step must be at least dt");
        } else {
          if (max_hop < 1 || max_hop > targets.source_core) problems.push_back("max_hop out of range");
          for (double p : pulses)
            if (!(p > 0)) problems.push_back("pulse lengths must be positive");
        }
        break;
      case PlanKind::calibrate_tb:
      case PlanKind::freq_sweep:
        if (bit_periods.empty()) problems.push_back("bit-period list is empty");
        if (trials < 1) problems.push_back("trials must be >= 1");
        for (double tb : bit_periods) need_period(tb, link.mode);
        if (kind == PlanKind::calibrate_tb) {
          need_freq(link.frequency_ghz);
          if (hops.empty()) problems.push_back("hop list is empty");
          for (int h : hops) {
            LinkSetup l = link;
            l.hop = h;
            check([&] { l.validate(topo); });
          }
        } else {
          if (frequencies.empty()) problems.push_back("frequency list is empty");
          for (double f : frequencies) need_freq(f);
          check([&] { link.validate(topo); });
        }
        break;
      case PlanKind::ber_run:
        check([&] { link.validate(topo); });
        need_freq(link.frequency_ghz);
        need_period(bit_period, link.mode);
        if (blocks < 1) problems.push_back("blocks must be >= 1");
        if (block_bits < 1 || block_bits > kMaxBlockPayload) problems.push_back("block_bits must lie in [1, 100]");
        break;
      case PlanKind::throughput:
        need_period(bit_period, link.mode);
        break;
      case PlanKind::fingerprint:
        check([&] { fingerprint.validate(topo, config.dts); });
        need_freq(fingerprint.frequency_ghz);
        break;
    }
    check([&] { config.validate(); });
    if (!problems.empty()) {
      std::string msg = "invalid " + std::string(to_string(kind)) + " plan:";
      for (const auto& p : problems) msg += " " + p + ";";
      msg.pop_back();
      throw ConfigError(msg);
    }
  }
};

inline Json link_json(const LinkSetup& l) {
  Json j;
  j["mode"] = to_string(l.mode);
  j["source_core"] = l.source_core;
  if (l.mode == Mode::spatial) j["hop"] = l.hop;
  j["sink_core"] = l.sink_core();
  j["frequency_ghz"] = l.frequency_ghz;
  j["threshold_c"] = l.threshold;
  return j;
}

inline Json targets_json(const FitTargets& t) {
  return {{"fast_rise_c", t.fast_rise},      {"rise_window_s", t.rise_window}, {"saturation_c", t.saturation},
          {"decay_time_s", t.decay_time},    {"decay_band_c", t.decay_band},   {"idle_baseline_c", t.idle_baseline},
          {"hop_detect_c", t.hop_detect},    {"hop_pulse_s", t.hop_pulse},     {"frequency_ghz", t.frequency_ghz},
          {"source_core", t.source_core}};
}

inline Json plan_json(const ExperimentPlan& p) {
  Json j;
  j["kind"] = to_string(p.kind);
  j["seed"] = p.seed;
  switch (p.kind) {
    case PlanKind::fig2_trace:
      j["targets"] = targets_json(p.targets);
      j["on_time_s"] = p.on_time;
      j["off_time_s"] = p.off_time;
      j["trace_step_s"] = p.trace_step;
      break;
    case PlanKind::hop_sweep:
      j["targets"] = targets_json(p.targets);
      j["pulses_s"] = p.pulses;
      j["max_hop"] = p.max_hop;
      break;
    case PlanKind::calibrate_tb:
    case PlanKind::freq_sweep:
      j["link"] = link_json(p.link);
      j["bit_periods_s"] = p.bit_periods;
      if (p.kind == PlanKind::calibrate_tb)
        j["hops"] = p.hops;
      else
        j["frequencies_ghz"] = p.frequencies;
      j["trials"] = p.trials;
      j["payload"] = "alternating";
      j["ber_ceiling_percent"] = p.ber_ceiling_percent;
      break;
    case PlanKind::ber_run:
      j["link"] = link_json(p.link);
      j["bit_period_s"] = p.bit_period;
      j["blocks"] = p.blocks;
      j["block_bits"] = p.block_bits;
      j["payload_generator"] = kPayloadGenerator;
      break;
    case PlanKind::throughput:
      j["mode"] = to_string(p.link.mode);
      j["bit_period_s"] = p.bit_period;
      break;
    case PlanKind::fingerprint: {
      const auto& f = p.fingerprint;
      j["run_seconds"] = f.run_seconds;
      j["pre_roll_s"] = f.pre_roll;
      j["sample_period_s"] = f.sample_period;
      j["repeats"] = f.repeats;
      j["victim_core"] = f.victim_core;
      j["observer_core"] = f.observer_core;
      j["frequency_ghz"] = f.frequency_ghz;
      j["same_threshold"] = p.same_threshold;
      j["match_threshold"] = p.match_threshold;
      break;
    }
  }
  return j;
}

struct ExperimentReport {
  Json document;
  std::vector<Table> tables;

  const Json& aggregates() const { return document.at("aggregates"); }
  const Json& trials() const { return document.at("trials"); }
};

enum class Format { json, csv, gnuplot };

inline Format format_from_string(const std::string& s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  if (s == "gnuplot") return Format::gnuplot;
  throw ConfigError("unknown format '" + s + "' (want json, csv or gnuplot)");
}

/// Mean and sample standard deviation, summed in order.
struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

inline MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd m;
  m.n = v.size();
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double q = 0.0;
    for (double x : v) q += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(q / static_cast<double>(v.size() - 1));
  }
  return m;
}

inline Json optional_number(double v, bool present) { return present ? Json(v) : Json(nullptr); }

/// Pseudorandom payload bits for a ber-run.
inline Bits payload_bits(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  Bits b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(gen() >> 63);
  return b;
}

/// Noise seed of block k in a ber-run seeded with `seed`.
inline std::uint64_t block_seed(std::uint64_t seed, int k) { return seed * 1000 + static_cast<std::uint64_t>(k); }

/// Fraction of 4-bit groups holding at most one error, over every complete
/// group in the given error vectors.
inline double groups_with_at_most_one_error(const std::vector<std::vector<std::uint8_t>>& error_logs,
                                            std::size_t* groups_out = nullptr) {
  std::size_t groups = 0;
  std::size_t good = 0;
  for (const auto& log : error_logs) {
    for (std::size_t g = 0; g + 4 <= log.size(); g += 4) {
      const int e = log[g] + log[g + 1] + log[g + 2] + log[g + 3];
      ++groups;
      good += e <= 1 ? 1 : 0;
    }
  }
  if (groups_out) *groups_out = groups;
  return groups == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(groups);
}

inline std::vector<std::uint8_t> error_log(const BlockResult& r) {
  std::vector<std::uint8_t> e(r.sent.size(), 1);
  for (std::size_t i = 0; i < r.sent.size() && i < r.received.size(); ++i) e[i] = r.sent[i] != r.received[i];
  return e;
}

namespace detail {

inline Json provenance(const Config& config, std::vector<std::uint64_t> seeds) {
  Json j;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(config);
  j["seeds"] = std::move(seeds);
  return j;
}

inline Json document(const ExperimentPlan& plan, Json trials, Json aggregates, const Config& config,
                     std::vector<std::uint64_t> seeds) {
  Json d;
  d["kind"] = to_string(plan.kind);
  d["plan"] = plan_json(plan);
  d["trials"] = std::move(trials);
  d["aggregates"] = std::move(aggregates);
  d["provenance"] = provenance(config, std::move(seeds));
  return d;
}

inline ExperimentReport run_fig2(const ExperimentPlan& plan, const Config& config) {
  const auto& pf = config.platform;
  const auto& t = plan.targets;
  const StepResponse resp = measure_step_response(pf, t, plan.on_time, plan.off_time);
  const auto residuals = fit_residuals(resp, t, pf.topology.ambient_temp);

  const int n = pf.topology.n_cores;
  PowerSchedule sched = PowerSchedule::uniform(n, power_of(pf.power, 0.0, t.frequency_ghz), t.frequency_ghz);
  sched.core_watts[static_cast<std::size_t>(t.source_core)].assign(0.0, plan.on_time,
                                                                  power_of(pf.power, 1.0, t.frequency_ghz));
  const ThermalTrace tr = simulate(pf.topology, sched, plan.on_time + plan.off_time, pf.dt, pf.idle_state());
  DtsConfig dts = config.dts;
  dts.seed = plan.seed;
  const SensorTrace sensed = observe(tr, t.source_core, dts);
  const auto stride = static_cast<std::size_t>(std::llround(plan.trace_step / pf.dt));
  Table truth = truth_table(tr, {t.source_core}, stride, "fig2_truth");
  const auto sstride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(plan.trace_step / dts.refresh_period)));
  SensorTrace thin;
  for (std::size_t i = 0; i < sensed.samples.size(); i += sstride) thin.samples.push_back(sensed.samples[i]);

  Json agg;
  agg["baseline_c"] = resp.baseline;
  agg["rise_c"] = resp.rise;
  agg["saturation_c"] = resp.saturation;
  agg["decay_time_s"] = optional_number(resp.decay_time, std::isfinite(resp.decay_time));
  Json res = Json::array();
  for (const auto& r : residuals)
    res.push_back({{"target", r.target},
                   {"wanted", r.wanted},
                   {"got", optional_number(r.got, std::isfinite(r.got))},
                   {"relative_error", r.relative_error},
                   {"tolerance", r.tolerance},
                   {"ok", r.ok}});
  agg["residuals"] = res;
  ExperimentReport rep{document(plan, Json::array(), agg, config, {plan.seed}), {}};
  rep.tables.push_back(std::move(truth));
  rep.tables.push_back(sensor_table(thin, "fig2_sensor"));
  return rep;
}

inline ExperimentReport run_hops(const ExperimentPlan& plan, const Config& config) {
  const auto& pf = config.platform;
  const auto& t = plan.targets;
  const int n = pf.topology.n_cores;
  const double idle = power_of(pf.power, 0.0, t.frequency_ghz);
  const double active = power_of(pf.power, 1.0, t.frequency_ghz);
  const ThermalState base = pf.idle_state();
  std::vector<double> hot(static_cast<std::size_t>(n), idle);
  hot[static_cast<std::size_t>(t.source_core)] = active;
  const ThermalState steady = steady_state(pf.topology, hot);

  std::vector<ThermalTrace> pulses;
  for (double p : plan.pulses) {
    PowerSchedule s = PowerSchedule::uniform(n, idle, t.frequency_ghz);
    s.core_watts[static_cast<std::size_t>(t.source_core)].assign(0.0, p, active);
    pulses.push_back(simulate(pf.topology, s, 2.0 * p, pf.dt, base));
  }

  Table tab{"hops", {"hop", "core_id", "steady_delta_c", "pulse_s", "pulse_delta_c"}, {}};
  Json trials = Json::array();
  for (int h = 1; h <= plan.max_hop; ++h) {
    const int c = t.source_core - h;
    const auto cs = static_cast<std::size_t>(c);
    const double sd = steady.die_temps[cs] - base.die_temps[cs];
    Json pj = Json::array();
    for (std::size_t i = 0; i < pulses.size(); ++i) {
      double peak = 0.0;
      for (std::size_t k = 0; k < pulses[i].size(); ++k) peak = std::max(peak, pulses[i].die_temp(k, c) - base.die_temps[cs]);
      pj.push_back({{"pulse_s", plan.pulses[i]}, {"delta_c", peak}});
      tab.add({std::to_string(h), std::to_string(c), fixed(sd), fixed(plan.pulses[i]), fixed(peak)});
    }
    trials.push_back({{"hop", h}, {"core_id", c}, {"steady_delta_c", sd}, {"pulses", pj}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < trials.size(); ++i)
    decreasing = decreasing && trials[i]["steady_delta_c"].get<double>() < trials[i - 1]["steady_delta_c"].get<double>();
  Json agg;
  agg["steady_strictly_decreasing"] = decreasing;
  agg["detect_threshold_c"] = t.hop_detect;
  ExperimentReport rep{document(plan, trials, agg, config, {}), {}};
  rep.tables.push_back(std::move(tab));
  return rep;
}

inline Json calibration_row_json(const CalibrationRow& r) {
  return {{"bit_period_ms", r.bit_period_ms},
          {"mode", to_string(r.mode)},
          {"hop", r.hop},
          {"core_id", r.core},
          {"frequency_ghz", r.frequency_ghz},
          {"decodable", r.decodable},
          {"ber_percent", optional_number(r.ber_percent, r.decodable)},
          {"synced", r.synced},
          {"trials", r.trials},
          {"trial_ber_percent", r.trial_ber_percent}};
}

/// Table-1-style layout: one row per bit period, one column per link.
inline Table wide_table(const std::string& name, const std::vector<std::string>& columns,
                        const std::vector<CalibrationTable>& tables) {
  Table t{name, {"tb_ms"}, {}};
  for (const auto& c : columns) t.header.push_back(c);
  const std::size_t rows = tables.empty() ? 0 : tables.front().rows.size();
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<std::string> cells{fixed(tables.front().rows[i].bit_period_ms, 0)};
    for (const auto& tab : tables) {
      const auto& r = tab.rows[i];
      cells.push_back(r.decodable ? fixed(r.ber_percent, 2) : "--");
    }
    t.add(std::move(cells));
  }
  return t;
}

inline Table long_table(const std::string& name, const std::vector<CalibrationTable>& tables) {
  Table t{name, {"tb_ms", "mode", "hop", "core_id", "frequency_ghz", "decodable", "ber_percent", "synced", "trials"}, {}};
  for (const auto& tab : tables)
    for (const auto& r : tab.rows)
      t.add({fixed(r.bit_period_ms, 0), to_string(r.mode), std::to_string(r.hop), std::to_string(r.core),
             fixed(r.frequency_ghz, 1), r.decodable ? "1" : "0", r.decodable ? fixed(r.ber_percent, 6) : "--",
             std::to_string(r.synced), std::to_string(r.trials)});
  return t;
}

inline std::vector<std::uint64_t> trial_seeds(std::uint64_t base, int trials) {
  std::vector<std::uint64_t> s;
  for (int k = 0; k < trials; ++k) s.push_back(base + static_cast<std::uint64_t>(k));
  return s;
}

inline ExperimentReport run_sweep(const ExperimentPlan& plan, const Config& config) {
  std::vector<CalibrationTable> tables;
  std::vector<std::string> columns;
  Json agg;
  Json per = Json::array();
  if (plan.kind == PlanKind::calibrate_tb) {
    for (int h : plan.hops) {
      LinkSetup l = plan.link;
      l.hop = h;
      tables.push_back(calibrate_tb(config.platform, config.dts, l, plan.bit_periods, plan.trials, plan.seed));
      columns.push_back(plan.link.mode == Mode::spatial ? "hop" + std::to_string(h) + "_ber_percent"
                                                        : "ber_percent");
      const auto sel = select_min_tb(tables.back(), plan.ber_ceiling_percent);
      per.push_back({{"hop", h}, {"min_tb_ms", optional_number(sel ? *sel * 1000.0 : 0.0, sel.has_value())}});
      if (plan.link.mode == Mode::temporal) break;
    }
    agg["selected"] = per;
  } else {
    for (double f : plan.frequencies) {
      LinkSetup l = plan.link;
      l.frequency_ghz = f;
      tables.push_back(calibrate_tb(config.platform, config.dts, l, plan.bit_periods, plan.trials, plan.seed));
      columns.push_back("f" + fixed(f, 1) + "_ber_percent");
      const auto sel = select_min_tb(tables.back(), plan.ber_ceiling_percent);
      per.push_back({{"frequency_ghz", f}, {"min_tb_ms", optional_number(sel ? *sel * 1000.0 : 0.0, sel.has_value())}});
    }
    agg["selected"] = per;
  }
  Json trials = Json::array();
  for (const auto& t : tables)
    for (const auto& r : t.rows) trials.push_back(calibration_row_json(r));
  ExperimentReport rep{document(plan, trials, agg, config, trial_seeds(plan.seed, plan.trials)), {}};
  const std::string base = plan.kind == PlanKind::calibrate_tb ? "calibration" : "frequency";
  rep.tables.push_back(wide_table(base, columns, tables));
  rep.tables.push_back(long_table(base + "_rows", tables));
  return rep;
}

inline Json throughput_json(double bit_period, Mode mode) {
  return {{"raw_bps", raw_rate(bit_period, mode)},
          {"code_rate_bps", throughput(bit_period, mode, Accounting::code_rate)},
          {"paper_overhead_bps", throughput(bit_period, mode, Accounting::paper_overhead)}};
}

inline ExperimentReport run_ber(const ExperimentPlan& plan, const Config& config) {
  const Bits message = payload_bits(plan.seed, static_cast<std::size_t>(plan.blocks) * plan.block_bits);
  Json trials = Json::array();
  Table tab{"blocks", {"block", "seed", "synced", "offset_s", "errors", "ber_percent"}, {}};
  std::vector<double> bers;
  std::vector<std::vector<std::uint8_t>> logs;
  std::vector<std::uint64_t> seeds;
  int synced = 0;
  for (int k = 0; k < plan.blocks; ++k) {
    const auto first = message.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(k) * plan.block_bits);
    const Bits payload(first, first + static_cast<std::ptrdiff_t>(plan.block_bits));
    const std::uint64_t s = block_seed(plan.seed, k);
    seeds.push_back(s);
    const BlockResult r = transmit_block(config.platform, config.dts, plan.link, plan.bit_period, payload, s);
    const double pct = 100.0 * r.ber;
    trials.push_back({{"block", k},
                      {"seed", s},
                      {"synced", r.synced},
                      {"offset_s", optional_number(r.offset, r.synced)},
                      {"errors", r.errors},
                      {"ber_percent", pct},
                      {"sent", to_string(r.sent)},
                      {"received", to_string(r.received)}});
    tab.add({std::to_string(k), std::to_string(s), r.synced ? "1" : "0", r.synced ? fixed(r.offset) : "--",
             std::to_string(r.errors), fixed(pct)});
    if (!r.synced) continue;
    ++synced;
    bers.push_back(pct);
    logs.push_back(error_log(r));
  }
  const MeanSd m = mean_sd(bers);
  std::size_t groups = 0;
  const double good = groups_with_at_most_one_error(logs, &groups);
  Json agg;
  agg["synced"] = synced;
  agg["blocks"] = plan.blocks;
  agg["mean_ber_percent"] = optional_number(m.mean, synced > 0);
  agg["sd_ber_percent"] = optional_number(m.sd, synced > 0);
  agg["groups_at_most_one_error"] = optional_number(good, groups > 0);
  agg["groups"] = groups;
  agg["throughput"] = throughput_json(plan.bit_period, plan.link.mode);
  ExperimentReport rep{document(plan, trials, agg, config, seeds), {}};
  rep.tables.push_back(std::move(tab));
  return rep;
}

inline ExperimentReport run_throughput(const ExperimentPlan& plan, const Config& config) {
  const Json tj = throughput_json(plan.bit_period, plan.link.mode);
  Table tab{"throughput", {"mode", "bit_period_s", "accounting", "bps"}, {}};
  for (auto a : {Accounting::paper_overhead, Accounting::code_rate})
    tab.add({to_string(plan.link.mode), fixed(plan.bit_period), to_string(a),
             fixed(throughput(plan.bit_period, plan.link.mode, a))});
  ExperimentReport rep{document(plan, Json::array(), tj, config, {}), {}};
  rep.tables.push_back(std::move(tab));
  return rep;
}

inline ExperimentReport run_fingerprint(const ExperimentPlan& plan, const Config& config) {
  FingerprintOptions opt = plan.fingerprint;
  opt.base_seed = plan.seed;
  const auto profiles = default_profiles();
  const ReferenceLibrary lib = build_library(profiles, config.platform, config.dts, opt);

  Json trials = Json::array();
  Table scores{"scores", {"observed", "library", "mean_r"}, {}};
  std::vector<std::uint64_t> seeds;
  for (const auto& e : lib.entries) seeds.insert(seeds.end(), e.seeds.begin(), e.seeds.end());
  const std::uint64_t probe_base = opt.base_seed + lib.trace_count();
  int correct = 0;
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    const std::uint64_t s = probe_base + p;
    seeds.push_back(s);
    const auto observed = record_workload(profiles[p], config.platform, config.dts, opt, s);
    const Classification c = classify(observed, lib, plan.match_threshold);
    Json sj = Json::object();
    for (const auto& sc : c.scores) {
      sj[sc.label] = sc.mean ? Json(*sc.mean) : Json(nullptr);
      scores.add({profiles[p].name, sc.label, sc.mean ? fixed(*sc.mean) : "--"});
    }
    correct += c.label && *c.label == profiles[p].name ? 1 : 0;
    trials.push_back({{"observed", profiles[p].name},
                      {"seed", s},
                      {"label", c.label ? Json(*c.label) : Json(nullptr)},
                      {"scores", sj}});
  }

  Json same = Json::object();
  for (const auto& e : lib.entries) {
    const PairStats st = same_workload_pairs(lib, e.label, plan.same_threshold);
    same[e.label] = {{"pairs", st.pairs}, {"at_or_above", st.above}, {"mean_r", st.mean}};
  }
  const PairStats cross = cross_workload_pairs(lib, plan.match_threshold);
  Json agg;
  agg["same_workload"] = same;
  agg["cross_workload"] = {{"pairs", cross.pairs},
                           {"false_positives", cross.above},
                           {"false_positive_rate", cross.rate()},
                           {"mean_r", cross.mean}};
  agg["probes_correct"] = correct;
  agg["probes"] = profiles.size();
  Json manifest = Json::array();
  for (const auto& e : lib.entries) {
    Json files = Json::array();
    for (std::size_t r = 0; r < e.traces.size(); ++r) files.push_back("library_" + e.label + "_" + std::to_string(r));
    manifest.push_back({{"label", e.label}, {"seeds", e.seeds}, {"tables", files}});
  }
  agg["library"] = manifest;

  ExperimentReport rep{document(plan, trials, agg, config, seeds), {}};
  rep.tables.push_back(std::move(scores));
  for (const auto& e : lib.entries)
    for (std::size_t r = 0; r < e.traces.size(); ++r)
      rep.tables.push_back(sensor_table(e.traces[r], "library_" + e.label + "_" + std::to_string(r)));
  return rep;
}

}  // namespace detail

inline ExperimentReport run(const ExperimentPlan& plan, const Config& config) {
  plan.validate(config);
  switch (plan.kind) {
    case PlanKind::fig2_trace: return detail::run_fig2(plan, config);
    case PlanKind::hop_sweep: return detail::run_hops(plan, config);
    case PlanKind::calibrate_tb:
    case PlanKind::freq_sweep: return detail::run_sweep(plan, config);
    case PlanKind::ber_run: return detail::run_ber(plan, config);
    case PlanKind::throughput: return detail::run_throughput(plan, config);
    case PlanKind::fingerprint: return detail::run_fingerprint(plan, config);
  }
  throw InternalError("unhandled plan kind");
}

/// Fits the model to the step-response targets, starting from `config`.
/// The fitted platform is echoed as a ready-to-use config.
inline ExperimentReport fit_report(const Config& config, const FitTargets& targets, const FitOptions& opt = {}) {
  config.validate();
  const FitResult fr = fit_model(targets, config.platform, opt);
  Config fitted = config;
  fitted.platform = fr.platform;
  Json res = Json::array();
  for (const auto& r : fr.residuals)
    res.push_back({{"target", r.target},
                   {"wanted", r.wanted},
                   {"got", optional_number(r.got, std::isfinite(r.got))},
                   {"relative_error", r.relative_error},
                   {"tolerance", r.tolerance},
                   {"ok", r.ok}});
  Json d;
  d["kind"] = "fit";
  d["plan"] = {{"kind", "fit"}, {"targets", targets_json(targets)}};
  d["trials"] = Json::array();
  d["aggregates"] = {{"within_tolerance", fr.within_tolerance},
                     {"objective", fr.objective},
                     {"sweeps", fr.sweeps},
                     {"residuals", res},
                     {"fitted_config", to_json(fitted)}};
  d["provenance"] = detail::provenance(config, {});
  return {d, {}};
}

/// Decodes an externally supplied trace. `expect`, when given, is compared
/// against the decoded payload.
inline ExperimentReport replay_report(const SensorTrace& trace, const ChannelParams& params, std::size_t n_bits,
                                      const std::optional<Bits>& expect, const Config& config) {
  params.validate(config.dts.resolution);
  if (expect && expect->size() != n_bits) throw ConfigError("expected bit string length must equal the bit count");
  Json agg;
  const auto off = find_preamble(trace, params);
  agg["synced"] = off.has_value();
  agg["offset_s"] = optional_number(off ? *off : 0.0, off.has_value());
  Bits got;
  bool truncated = false;
  if (off) {
    try {
      got = demodulate(trace, *off + static_cast<double>(kPreambleBits) * params.period(), n_bits, params);
    } catch (const TruncationError& e) {
      got = e.recovered();
      truncated = true;
    }
  }
  agg["truncated"] = truncated;
  agg["received"] = to_string(got);
  if (expect) {
    std::size_t errors = 0;
    for (std::size_t i = 0; i < expect->size(); ++i) errors += (i >= got.size() || got[i] != (*expect)[i]) ? 1 : 0;
    agg["errors"] = errors;
    agg["ber_percent"] = expect->empty() ? 0.0 : 100.0 * static_cast<double>(errors) / static_cast<double>(expect->size());
  }
  Json d;
  d["kind"] = "replay";
  d["plan"] = {{"kind", "replay"},
               {"mode", to_string(params.mode)},
               {"bit_period_s", params.bit_period},
               {"threshold_c", params.threshold},
               {"bits", n_bits},
               {"samples", trace.size()}};
  d["trials"] = Json::array();
  d["aggregates"] = agg;
  d["provenance"] = detail::provenance(config, {});
  return {d, {}};
}

inline std::string report_json(const ExperimentReport& r) { return r.document.dump(2) + "\n"; }

/// Writes the report to `dir` and returns the paths written, in order.
/// json: report.json; csv: report.json plus <table>.csv; gnuplot:
/// report.json plus <table>.dat.
inline std::vector<std::string> emit(const ExperimentReport& report, const std::string& dir, Format format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& bytes) {
    const std::string path = (fs::path(dir) / name).string();
    write_file(path, bytes);
    written.push_back(path);
  };
  put("report.json", report_json(report));
  for (const auto& t : report.tables) {
    if (format == Format::csv) put(t.name + ".csv", t.to_csv());
    if (format == Format::gnuplot) put(t.name + ".dat", t.to_gnuplot());
  }
  return written;
}

}  // namespace thermalcc
