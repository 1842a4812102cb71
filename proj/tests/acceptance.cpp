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


// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thermalcc.hpp"

namespace {

using namespace thermalcc;
namespace fs = std::filesystem;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-22s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(double v, int digits = 2) { return fixed(v, digits); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void hamming() {
  const auto t0 = std::chrono::steady_clock::now();
  std::array<Codeword, 16> words{};
  for (unsigned v = 0; v < 16; ++v)
    words[v] = hamming_encode({static_cast<std::uint8_t>((v >> 3) & 1), static_cast<std::uint8_t>((v >> 2) & 1),
                               static_cast<std::uint8_t>((v >> 1) & 1), static_cast<std::uint8_t>(v & 1)});
  int min_d = 7;
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = a + 1; b < 16; ++b) {
      int d = 0;
      for (std::size_t i = 0; i < 7; ++i) d += words[a][i] != words[b][i];
      min_d = std::min(min_d, d);
    }
  int corrected = 0;
  for (unsigned v = 0; v < 16; ++v)
    for (std::size_t i = 0; i < 7; ++i) {
      auto r = words[v];
      r[i] ^= 1;
      const auto got = hamming_decode(r);
      const Nibble want{words[v][2], words[v][4], words[v][5], words[v][6]};
      corrected += (got.data == want && got.corrected) ? 1 : 0;
    }
  const double s = seconds_since(t0);
  report(1, "hamming", min_d >= 3 && corrected == 112 && s < 1.0,
         "min distance " + std::to_string(min_d) + ", " + std::to_string(corrected) + "/112 corrected, " +
             fmt(s, 4) + " s");
}

void step_response(const Config& cfg) {
  const auto r = measure_step_response(cfg.platform, FitTargets{});
  const bool ok = std::abs(r.rise - 5.0) <= 1.0 && std::abs(r.saturation - 43.0) <= 1.0 &&
                  std::isfinite(r.decay_time) && std::abs(r.decay_time - 11.0) <= 0.3 * 11.0;
  report(2, "step-response", ok,
         "rise " + fmt(r.rise) + " C in 25 ms, saturation " + fmt(r.saturation) + " C, decay " + fmt(r.decay_time) +
             " s (baseline " + fmt(r.baseline) + " C)");
}

void hops(const Config& cfg) {
  const auto r = measure_step_response(cfg.platform, FitTargets{});
  const auto& h = r.hop_steady;
  const bool ok = h[0] > h[1] && h[1] > h[2] && h[0] >= 2.0 && r.hop3_pulse < 2.0;
  report(3, "hop-attenuation", ok,
         "steady dT " + fmt(h[0]) + " > " + fmt(h[1]) + " > " + fmt(h[2]) + " C, 3-hop 1.5 s pulse " +
             fmt(r.hop3_pulse) + " C");
}

CalibrationTable sweep(const Config& cfg, double ghz, const std::vector<double>& tbs, int trials) {
  LinkSetup l;
  l.frequency_ghz = ghz;
  return calibrate_tb(cfg.platform, cfg.dts, l, tbs, trials, 1);
}

std::string row_text(const CalibrationRow& r) {
  return r.decodable ? fmt(r.ber_percent, 1) + "%" : std::string("--");
}

void ber_band(const CalibrationTable& t) {
  const std::array<double, 6> expected{18, 14, 13, 11, 9, 8};
  bool ok = t.rows.size() == expected.size();
  std::string detail;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    ok = ok && r.decodable && std::abs(r.ber_percent - expected[i]) <= 6.0;
    if (i > 0) ok = ok && r.ber_percent <= t.rows[i - 1].ber_percent;
    detail += (i ? ", " : "") + fmt(r.bit_period_ms, 0) + " ms " + row_text(r);
  }
  report(4, "ber-band", ok, detail + " (50 runs each)");
}

void frequency(const Config& cfg, const CalibrationTable& f29) {
  const std::vector<double> tbs{0.5, 1.0, 1.5};
  const auto f24 = sweep(cfg, 2.4, tbs, 50);
  const auto f19 = sweep(cfg, 1.9, default_bit_periods(), 50);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < tbs.size(); ++i) {
    const CalibrationRow* base = nullptr;
    for (const auto& r : f29.rows)
      if (std::abs(r.bit_period_ms - tbs[i] * 1000.0) < 1e-9) base = &r;
    const auto& hi = f24.rows[i];
    // An undecodable 2.4 GHz cell is worse than any decodable 2.9 GHz one.
    const bool worse = base && base->decodable && (!hi.decodable || hi.ber_percent > base->ber_percent);
    ok = ok && worse;
    detail += (i ? ", " : "") + fmt(tbs[i] * 1000.0, 0) + " ms 2.4 " + row_text(hi) + " vs 2.9 " +
              (base ? row_text(*base) : std::string("?"));
  }
  int decodable = 0;
  for (const auto& r : f19.rows) decodable += r.decodable ? 1 : 0;
  ok = ok && decodable == 0;
  report(5, "frequency-effect", ok, detail + "; 1.9 GHz decodable at " + std::to_string(decodable) + "/6 periods");
}

void temporal(const Config& cfg) {
  bool ok = true;
  std::string detail;
  for (double ghz : {2.9, 2.4, 1.9}) {
    for (double ts : {0.010, 0.020, 0.025, 0.030}) {
      ExperimentPlan p;
      p.kind = PlanKind::ber_run;
      p.link.mode = Mode::temporal;
      p.link.frequency_ghz = ghz;
      p.bit_period = ts;
      const auto rep = run(p, cfg);
      const auto& a = rep.aggregates();
      long errors = 0;
      for (const auto& t : rep.trials()) errors += t["errors"].get<long>();
      const int synced = a["synced"].get<int>();
      const double pct = errors / 10.0;
      if (ts < 0.015)
        ok = ok && pct <= 5.0;
      else
        ok = ok && errors == 0;
      if (ghz == 2.9) ok = ok && synced == 10;
      detail += fmt(ghz, 1) + "/" + fmt(ts * 1000, 0) + ":" + std::to_string(errors) + "e" +
                std::to_string(synced) + "s ";
    }
  }
  report(6, "temporal-channel", ok, "GHz/ms:errors per 1000 bits, synced blocks: " + detail);
}

void throughput_figures() {
  const double spatial_overhead = throughput(0.75, Mode::spatial, Accounting::paper_overhead);
  const double temporal_overhead = throughput(0.010, Mode::temporal, Accounting::paper_overhead);
  const double spatial_code = throughput(0.75, Mode::spatial, Accounting::code_rate);
  const double temporal_code = throughput(0.010, Mode::temporal, Accounting::code_rate);
  const bool ok = fmt(spatial_overhead, 2) == "0.33" && temporal_overhead == 12.5 &&
                  std::abs(spatial_code - (4.0 / 3.0) * (4.0 / 7.0)) < 1e-12 &&
                  std::abs(temporal_code - 50.0 * 4.0 / 7.0) < 1e-12;
  report(7, "throughput", ok,
         "overhead " + fmt(spatial_overhead, 2) + " / " + fmt(temporal_overhead, 2) + " bps, code-rate " +
             fmt(spatial_code, 4) + " / " + fmt(temporal_code, 4) + " bps");
}

struct ClusterStats {
  double p = 0.0;
  std::size_t groups = 0;
  int synced = 0;
};

ClusterStats cluster_stats(const Config& cfg, bool alternating) {
  std::vector<std::vector<std::uint8_t>> logs;
  ClusterStats st;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Bits message = alternating ? Bits{} : payload_bits(seed, 1000);
    for (int k = 0; k < 10; ++k) {
      const Bits payload = alternating ? alternating_bits(100)
                                       : Bits(message.begin() + k * 100, message.begin() + (k + 1) * 100);
      const auto r = transmit_block(cfg.platform, cfg.dts, LinkSetup{}, 0.75, payload, block_seed(seed, k));
      if (!r.synced) continue;
      ++st.synced;
      logs.push_back(error_log(r));
    }
  }
  st.p = groups_with_at_most_one_error(logs, &st.groups);
  return st;
}

void clustering(const Config& cfg) {
  const ClusterStats alt = cluster_stats(cfg, true);
  const ClusterStats rnd = cluster_stats(cfg, false);
  report(8, "error-clustering", alt.groups > 0 && alt.p > 0.85,
         "alternating runs: P(<=1 error per 4 bits) " + fmt(alt.p, 3) + " over " + std::to_string(alt.groups) +
             " groups from " + std::to_string(alt.synced) + "/100 synced blocks; random payloads " + fmt(rnd.p, 3) +
             " (" + std::to_string(rnd.synced) + "/100 synced)");
}

void zero_noise(const Config& cfg) {
  const DtsConfig quiet = cfg.dts.noiseless();
  bool ok = true;
  std::string detail;
  for (double tb : {0.5, 1.0, 1.5}) {
    int identical = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      const Bits payload = payload_bits(5000 + k, 100);
      const auto r = transmit_block(cfg.platform, quiet, LinkSetup{}, tb, payload, 1);
      identical += (r.synced && r.received == payload) ? 1 : 0;
    }
    ok = ok && identical == 100;
    detail += (detail.empty() ? "" : ", ") + fmt(tb * 1000, 0) + " ms " + std::to_string(identical) + "/100";
  }
  report(9, "zero-noise-identity", ok, detail);
}

ExperimentReport fingerprint_report(const Config& cfg) {
  ExperimentPlan p;
  p.kind = PlanKind::fingerprint;
  return run(p, cfg);
}

void fingerprint(const Config& cfg, const ExperimentReport& rep) {
  const auto& a = rep.aggregates();
  const auto& rsa = a["same_workload"]["rsa"];
  const auto above = rsa["at_or_above"].get<int>();
  const auto pairs = rsa["pairs"].get<int>();
  const double fp = 100.0 * a["cross_workload"]["false_positive_rate"].get<double>();
  const bool ok = pairs == 10 && above >= 7 && std::abs(fp - 28.0) <= 10.0;
  (void)cfg;
  report(10, "fingerprinting", ok,
         "rsa pairs r>=0.8: " + std::to_string(above) + "/" + std::to_string(pairs) + ", cross-workload FP " +
             fmt(fp, 1) + "% at 0.85 (" + std::to_string(a["cross_workload"]["false_positives"].get<int>()) + "/" +
             std::to_string(a["cross_workload"]["pairs"].get<int>()) + ")");
}

void determinism(const Config& cfg, const ExperimentReport& fp_first) {
  std::vector<std::pair<std::string, ExperimentPlan>> plans;
  ExperimentPlan p;
  p.kind = PlanKind::fig2_trace;
  plans.push_back({"fig2", p});
  p = ExperimentPlan{};
  p.kind = PlanKind::hop_sweep;
  plans.push_back({"hops", p});
  p = ExperimentPlan{};
  p.kind = PlanKind::calibrate_tb;
  p.trials = 3;
  plans.push_back({"calibrate", p});
  p = ExperimentPlan{};
  p.kind = PlanKind::freq_sweep;
  p.bit_periods = {0.5};
  p.trials = 2;
  plans.push_back({"freq", p});
  p = ExperimentPlan{};
  p.kind = PlanKind::ber_run;
  p.seed = 7;
  plans.push_back({"ber", p});
  p = ExperimentPlan{};
  p.kind = PlanKind::throughput;
  plans.push_back({"throughput", p});

  const fs::path root = fs::temp_directory_path() / "thermalcc_acceptance";
  fs::remove_all(root);
  std::size_t files = 0;
  std::size_t differing = 0;
  auto compare = [&](const std::string& name, const ExperimentReport& a, const ExperimentReport& b) {
    for (auto format : {Format::csv, Format::gnuplot}) {
      const std::string tag = name + (format == Format::csv ? "_csv" : "_dat");
      const auto wa = emit(a, (root / "a" / tag).string(), format);
      const auto wb = emit(b, (root / "b" / tag).string(), format);
      if (wa.size() != wb.size()) {
        ++differing;
        continue;
      }
      for (std::size_t i = 0; i < wa.size(); ++i) {
        ++files;
        if (fs::path(wa[i]).filename() != fs::path(wb[i]).filename() || slurp(wa[i]) != slurp(wb[i])) ++differing;
      }
    }
  };
  for (const auto& [name, plan] : plans) compare(name, run(plan, cfg), run(plan, cfg));
  compare("fingerprint", fp_first, fingerprint_report(cfg));
  fs::remove_all(root);
  report(11, "determinism", differing == 0 && files > 0,
         std::to_string(files - differing) + "/" + std::to_string(files) + " report files byte-identical over " +
             std::to_string(plans.size() + 1) + " plans");
}

}  // namespace

int main() {
  const Config cfg;
  const auto guarded = [](int id, const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, name, false, std::string("exception: ") + e.what());
    }
  };
  guarded(1, "hamming", [&] { hamming(); });
  guarded(2, "step-response", [&] { step_response(cfg); });
  guarded(3, "hop-attenuation", [&] { hops(cfg); });
  CalibrationTable f29;
  guarded(4, "ber-band", [&] {
    f29 = sweep(cfg, 2.9, default_bit_periods(), 50);
    ber_band(f29);
  });
  guarded(5, "frequency-effect", [&] { frequency(cfg, f29); });
  guarded(6, "temporal-channel", [&] { temporal(cfg); });
  guarded(7, "throughput", [&] { throughput_figures(); });
  guarded(8, "error-clustering", [&] { clustering(cfg); });
  guarded(9, "zero-noise-identity", [&] { zero_noise(cfg); });
  ExperimentReport fp;
  guarded(10, "fingerprinting", [&] {
    fp = fingerprint_report(cfg);
    fingerprint(cfg, fp);
  });
  guarded(11, "determinism", [&] { determinism(cfg, fp); });
  std::printf("%s: %d of 11 criteria passed\n", failures ? "FAIL" : "PASS", 11 - failures);
  return failures ? 1 : 0;
}
