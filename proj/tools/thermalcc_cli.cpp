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

// thermalcc: command-line front end.
//
//   thermalcc [--config PATH] [--seed N] [--out DIR] [--format json|csv|gnuplot] <verb> [options]
//
// Verbs: fit, simulate, calibrate, ber, throughput, fingerprint, replay.
// On success the aggregates are printed to stdout and the report is written
// under --out. On failure a JSON error object goes to stderr and the exit
// code is nonzero.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermalcc.hpp"

namespace {

using namespace thermalcc;

void print_error(const std::string& kind, const std::string& message) {
  Json e;
  e["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << e.dump() << "\n";
}

std::vector<double> ms_to_s(const std::vector<double>& ms) {
  std::vector<double> s;
  for (double v : ms) s.push_back(v / 1000.0);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermal covert channel simulator and experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = "thermalcc-out";
  std::string format = "json";
  app.add_option("--config", config_path, "platform config JSON");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "json, csv or gnuplot")->check(CLI::IsMember({"json", "csv", "gnuplot"}));

  // link options shared by several verbs
  std::string mode = "spatial";
  int core = 3;
  int hop = 1;
  double freq = 2.9;
  double threshold = 2.0;
  auto add_link = [&](CLI::App* sub) {
    sub->add_option("--mode", mode, "spatial or temporal")->check(CLI::IsMember({"spatial", "temporal"}));
    sub->add_option("--core", core, "source core (shared core in temporal mode)");
    sub->add_option("--hop", hop, "sink distance in cores (spatial)");
    sub->add_option("--freq", freq, "processor frequency, GHz");
    sub->add_option("--threshold", threshold, "edge threshold, C");
  };

  auto* fit = app.add_subcommand("fit", "fit the thermal model to the step-response targets");

  auto* simulate = app.add_subcommand("simulate", "step-response trace or hop attenuation sweep");
  std::string sim_plan = "fig2";
  double on_time = 100.0;
  double off_time = 60.0;
  std::vector<double> pulses{1.5};
  simulate->add_option("--plan", sim_plan, "fig2 or hops")->check(CLI::IsMember({"fig2", "hops"}));
  simulate->add_option("--on", on_time, "heating time, s");
  simulate->add_option("--off", off_time, "cooling time, s");
  simulate->add_option("--pulse", pulses, "pulse lengths for the hop sweep, s");

  auto* calibrate = app.add_subcommand("calibrate", "bit-period sweep over hops or frequencies");
  add_link(calibrate);
  std::vector<double> tb_list{250, 500, 750, 1000, 1250, 1500};
  std::vector<int> hops{1, 2};
  std::vector<double> freqs;
  int trials = 10;
  double ceiling = 15.0;
  calibrate->add_option("--tb-ms", tb_list, "bit periods (time slices in temporal mode), ms");
  calibrate->add_option("--hops", hops, "hop counts (one column each)");
  calibrate->add_option("--frequencies", freqs, "sweep these frequencies instead of hops, GHz");
  calibrate->add_option("--trials", trials, "blocks per bit period");
  calibrate->add_option("--ceiling", ceiling, "BER ceiling for bit-period selection, percent");

  auto* ber = app.add_subcommand("ber", "send seeded pseudorandom blocks and measure the bit error rate");
  add_link(ber);
  double tb_ms = 750.0;
  int blocks = 10;
  ber->add_option("--tb-ms", tb_ms, "bit period (time slice in temporal mode), ms");
  ber->add_option("--blocks", blocks, "100-bit blocks to send");

  auto* thr = app.add_subcommand("throughput", "throughput under both accountings");
  thr->add_option("--mode", mode, "spatial or temporal")->check(CLI::IsMember({"spatial", "temporal"}));
  thr->add_option("--tb-ms", tb_ms, "bit period (time slice in temporal mode), ms");

  auto* fp = app.add_subcommand("fingerprint", "workload reference library and classification");
  int repeats = 5;
  double run_seconds = 200.0;
  fp->add_option("--repeats", repeats, "traces per workload");
  fp->add_option("--run-seconds", run_seconds, "workload run time, s");

  auto* replay = app.add_subcommand("replay", "decode a trace CSV");
  std::string trace_path;
  std::size_t bits = kMaxBlockPayload;
  std::string expect;
  std::optional<int> replay_core;
  replay->add_option("--trace", trace_path, "trace CSV (time_s,core_id,reading_c)")->required();
  replay->add_option("--mode", mode, "spatial or temporal")->check(CLI::IsMember({"spatial", "temporal"}));
  replay->add_option("--tb-ms", tb_ms, "bit period (time slice in temporal mode), ms");
  replay->add_option("--bits", bits, "payload bits after the preamble");
  replay->add_option("--threshold", threshold, "edge threshold, C");
  replay->add_option("--sink-core", replay_core, "core to decode when the trace holds several");
  replay->add_option("--expect", expect, "payload that was sent, as 0/1 text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    const Config config = config_path.empty() ? Config{} : load_config(config_path);
    const Format fmt = format_from_string(format);
    LinkSetup link{mode_from_string(mode), core, hop, freq, threshold};

    ExperimentReport report;
    if (*fit) {
      report = fit_report(config, FitTargets{});
    } else if (*replay) {
      SensorTrace trace = read_trace_csv(trace_path);
      if (replay_core) trace = trace.for_core(*replay_core);
      const ChannelParams params{tb_ms / 1000.0, threshold, mode_from_string(mode)};
      std::optional<Bits> want;
      if (!expect.empty()) want = bits_from_string(expect);
      report = replay_report(trace, params, bits, want, config);
    } else {
      ExperimentPlan plan;
      plan.seed = seed;
      plan.link = link;
      if (*simulate) {
        plan.kind = sim_plan == "fig2" ? PlanKind::fig2_trace : PlanKind::hop_sweep;
        plan.on_time = on_time;
        plan.off_time = off_time;
        plan.pulses = pulses;
      } else if (*calibrate) {
        plan.kind = freqs.empty() ? PlanKind::calibrate_tb : PlanKind::freq_sweep;
        plan.bit_periods = ms_to_s(tb_list);
        plan.hops = hops;
        if (!freqs.empty()) plan.frequencies = freqs;
        plan.trials = trials;
        plan.ber_ceiling_percent = ceiling;
      } else if (*ber) {
        plan.kind = PlanKind::ber_run;
        plan.bit_period = tb_ms / 1000.0;
        plan.blocks = blocks;
      } else if (*thr) {
        plan.kind = PlanKind::throughput;
        plan.bit_period = tb_ms / 1000.0;
      } else if (*fp) {
        plan.kind = PlanKind::fingerprint;
        plan.fingerprint.repeats = repeats;
        plan.fingerprint.run_seconds = run_seconds;
      }
      report = run(plan, config);
    }
    emit(report, out_dir, fmt);
    std::cout << report.aggregates().dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
}
