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
 * @file chanstack.hpp
 * @brief ON-OFF keyed thermal covert channel: framing, Hamming(7,4),
 *        modulation, preamble sync and edge-detection demodulation.
 *
 * Decoding works on one representative temperature per bit period:
 *  - spatial: median of the samples in the last quarter of the period;
 *  - temporal: the first sample of the sink slice, i.e. the temperature the
 *    source left behind.
 * Bit k is 1 if rep[k] - rep[k-1] >= threshold, 0 if rep[k-1] - rep[k] >=
 * threshold, otherwise a repeat of bit k-1. rep[-1] is the representative of
 * the period just before the offset.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermalcc/errors.hpp"
#include "thermalcc/partitioning.hpp"
#include "thermalcc/sensor.hpp"

namespace thermalcc {

using Bits = std::vector<std::uint8_t>;

inline std::string to_string(const Bits& bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

inline Bits bits_from_string(std::string_view s) {
  Bits out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw ConfigError("bit strings may only contain '0' and '1'");
    out.push_back(c == '1');
  }
  return out;
}

inline constexpr std::size_t kPreambleBits = 10;
inline constexpr std::size_t kMaxBlockPayload = 100;

inline Bits preamble() { return {1, 0, 1, 0, 1, 0, 1, 0, 1, 0}; }

struct Frame {
  Bits payload;

  void validate() const {
    if (payload.size() > kMaxBlockPayload) throw ConfigError("frame payload exceeds 100 bits");
  }

  Bits bits() const {
    Bits all = preamble();
    all.insert(all.end(), payload.begin(), payload.end());
    return all;
  }
};

/// Splits a message into preamble-framed blocks of at most 100 bits.
inline std::vector<Frame> frame_blocks(const Bits& message) {
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < message.size(); i += kMaxBlockPayload) {
    const auto end = std::min(message.size(), i + kMaxBlockPayload);
    frames.push_back({Bits(message.begin() + static_cast<std::ptrdiff_t>(i),
                           message.begin() + static_cast<std::ptrdiff_t>(end))});
  }
  return frames;
}

struct ChannelParams {
  double bit_period = 0.75;  // T_b in spatial mode, t_s in temporal mode
  double threshold = 2.0;
  Mode mode = Mode::spatial;

  /// Wall time covered by one bit.
  double period() const { return mode == Mode::spatial ? bit_period : 2.0 * bit_period; }

  void validate(double resolution = 1.0) const {
    if (!(bit_period > 0)) throw ConfigError("bit period must be positive");
    if (threshold < resolution - 1e-12) throw ConfigError("threshold must be at least the sensor resolution");
  }
};

// ---------------------------------------------------------------------------
// Hamming(7,4). Positions are 1-indexed: parity at 1, 2, 4; data at 3, 5, 6, 7.
// Codeword bit for position p lives at index p-1.
// ---------------------------------------------------------------------------

using Nibble = std::array<std::uint8_t, 4>;
using Codeword = std::array<std::uint8_t, 7>;

inline Codeword hamming_encode(const Nibble& d) {
  Codeword c{};
  c[2] = d[0] & 1;
  c[4] = d[1] & 1;
  c[5] = d[2] & 1;
  c[6] = d[3] & 1;
  c[0] = c[2] ^ c[4] ^ c[6];
  c[1] = c[2] ^ c[5] ^ c[6];
  c[3] = c[4] ^ c[5] ^ c[6];
  return c;
}

struct HammingDecoded {
  Nibble data{};
  bool corrected = false;
};

inline HammingDecoded hamming_decode(Codeword r) {
  unsigned syndrome = 0;
  for (unsigned pos = 1; pos <= 7; ++pos)
    if (r[pos - 1] & 1) syndrome ^= pos;
  HammingDecoded out;
  if (syndrome != 0) {
    r[syndrome - 1] ^= 1;
    out.corrected = true;
  }
  out.data = {r[2], r[4], r[5], r[6]};
  return out;
}

/// Encodes a bit string whose length is a multiple of 4.
inline Bits hamming_encode_bits(const Bits& data) {
  if (data.size() % 4 != 0) throw ConfigError("Hamming(7,4) input length must be a multiple of 4");
  Bits out;
  out.reserve(data.size() / 4 * 7);
  for (std::size_t i = 0; i < data.size(); i += 4) {
    const auto c = hamming_encode({data[i], data[i + 1], data[i + 2], data[i + 3]});
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

inline Bits hamming_decode_bits(const Bits& coded) {
  if (coded.size() % 7 != 0) throw ConfigError("Hamming(7,4) codeword stream length must be a multiple of 7");
  Bits out;
  out.reserve(coded.size() / 7 * 4);
  for (std::size_t i = 0; i < coded.size(); i += 7) {
    Codeword c;
    std::copy_n(coded.begin() + static_cast<std::ptrdiff_t>(i), 7, c.begin());
    const auto d = hamming_decode(c).data;
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Modulation
// ---------------------------------------------------------------------------

/// ON for every 1, OFF for every 0, preamble first.
inline OnOffSchedule modulate(const Frame& frame, const ChannelParams& params) {
  frame.validate();
  params.validate();
  OnOffSchedule s;
  s.mode = params.mode;
  s.slot = params.bit_period;
  s.on = frame.bits();
  return s;
}

// ---------------------------------------------------------------------------
// Demodulation
// ---------------------------------------------------------------------------

namespace detail {

/// Single-core view of a sensor trace with period representatives.
class TraceView {
 public:
  TraceView(const SensorTrace& trace, const ChannelParams& params) : params_(params) {
    if (!trace.empty()) {
      const int core = trace.samples.front().core;
      for (const auto& s : trace.samples)
        if (s.core != core) throw ConfigError("decoder expects a single-core trace");
    }
    t_.reserve(trace.size());
    r_.reserve(trace.size());
    for (const auto& s : trace.samples) {
      t_.push_back(s.time);
      r_.push_back(s.reading);
    }
  }

  std::size_t size() const { return t_.size(); }
  double time(std::size_t i) const { return t_[i]; }
  double reading(std::size_t i) const { return r_[i]; }
  double last_time() const { return t_.empty() ? 0.0 : t_.back(); }

  /// Representative of period k relative to offset; nullopt when the
  /// window holds no samples.
  std::optional<double> representative(double offset, long k) const {
    const double period = params_.period();
    const double pstart = offset + static_cast<double>(k) * period;
    if (params_.mode == Mode::spatial) {
      const double b = pstart + 0.75 * period;
      const double e = pstart + period;
      auto [lo, hi] = range(b, e);
      if (lo == hi) return std::nullopt;
      scratch_.assign(r_.begin() + static_cast<std::ptrdiff_t>(lo), r_.begin() + static_cast<std::ptrdiff_t>(hi));
      return median(scratch_);
    }
    const double b = pstart + params_.bit_period;
    const double e = pstart + period;
    auto [lo, hi] = range(b, e);
    if (lo == hi) return std::nullopt;
    return r_[lo];
  }

  /// True when the trace extends to the end of period k.
  bool covers(double offset, long k) const {
    return last_time() >= offset + static_cast<double>(k + 1) * params_.period() - params_.period() * 0.25 - 1e-9;
  }

  static double median(std::vector<double>& v) {
    const auto n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
  }

 private:
  std::pair<std::size_t, std::size_t> range(double b, double e) const {
    constexpr double eps = 1e-9;
    auto lo = std::lower_bound(t_.begin(), t_.end(), b - eps);
    auto hi = std::lower_bound(lo, t_.end(), e - eps);
    return {static_cast<std::size_t>(lo - t_.begin()), static_cast<std::size_t>(hi - t_.begin())};
  }

  ChannelParams params_;
  std::vector<double> t_;
  std::vector<double> r_;
  mutable std::vector<double> scratch_;
};

enum class DecodeStop { done, mismatch, truncated };

/// Edge-decodes up to `n_bits` periods. When `expect` is given, stops at the
/// first bit that disagrees with it.
inline DecodeStop decode(const TraceView& view, double offset, std::size_t n_bits, double threshold, Bits& out,
                         const Bits* expect = nullptr) {
  out.clear();
  auto prev = view.representative(offset, -1);
  if (!prev) return DecodeStop::truncated;
  std::uint8_t bit = 0;
  for (std::size_t k = 0; k < n_bits; ++k) {
    auto cur = view.representative(offset, static_cast<long>(k));
    if (!cur) return DecodeStop::truncated;
    const double diff = *cur - *prev;
    if (diff >= threshold)
      bit = 1;
    else if (-diff >= threshold)
      bit = 0;
    out.push_back(bit);
    if (expect && (*expect)[k] != bit) return DecodeStop::mismatch;
    prev = cur;
  }
  return DecodeStop::done;
}

}  // namespace detail

/// Earliest sync offset whose next ten periods decode to the preamble.
///
/// Spatial candidates are samples that sit at least `threshold` above the
/// representative of the quarter-period before them (a rising edge).
/// Temporal candidates are the starts of the sink's slices; the offset
/// returned is the start of the source slice that precedes them.
inline std::optional<double> find_preamble(const SensorTrace& trace, const ChannelParams& params) {
  params.validate();
  if (trace.empty()) return std::nullopt;
  const detail::TraceView view(trace, params);
  const Bits pre = preamble();
  Bits scratch;
  double min_gap = 0.0;
  for (std::size_t i = 1; i < view.size(); ++i) {
    const double g = view.time(i) - view.time(i - 1);
    if (g > 0 && (min_gap == 0.0 || g < min_gap)) min_gap = g;
  }

  for (std::size_t i = 0; i < view.size(); ++i) {
    double offset = view.time(i);
    if (params.mode == Mode::temporal) {
      // Only the first sample of each sink slice starts a candidate.
      if (i > 0 && view.time(i) - view.time(i - 1) < 1.5 * min_gap) continue;
      offset -= params.bit_period;
    } else {
      const auto base = view.representative(offset, -1);
      if (!base || view.reading(i) - *base < params.threshold) continue;
    }
    if (!view.covers(offset, static_cast<long>(pre.size()) - 1)) break;
    if (detail::decode(view, offset, pre.size(), params.threshold, scratch, &pre) == detail::DecodeStop::done)
      return offset;
  }
  return std::nullopt;
}

/// Decodes `n_bits` periods starting at `offset`. The first bit is judged
/// against the period before the offset and a no-change there reads as 0.
inline Bits demodulate(const SensorTrace& trace, double offset, std::size_t n_bits, const ChannelParams& params) {
  params.validate();
  const detail::TraceView view(trace, params);
  Bits out;
  if (detail::decode(view, offset, n_bits, params.threshold, out) == detail::DecodeStop::truncated)
    throw TruncationError(std::move(out), n_bits);
  return out;
}

/// Fraction of positions where the two sequences differ.
inline double ber(const Bits& sent, const Bits& received) {
  if (sent.size() != received.size()) throw ConfigError("ber needs sequences of equal length");
  if (sent.empty()) return 0.0;
  std::size_t diff = 0;
  for (std::size_t i = 0; i < sent.size(); ++i) diff += (sent[i] != received[i]);
  return static_cast<double>(diff) / static_cast<double>(sent.size());
}

enum class Accounting { code_rate, paper_overhead };

inline const char* to_string(Accounting a) { return a == Accounting::code_rate ? "code-rate" : "paper-overhead"; }

inline constexpr double kHammingRate = 4.0 / 7.0;
/// Published figures assume 75% of the raw rate goes to coding overhead.
inline constexpr double kOverheadRate = 0.25;

/// Raw rate is 1/T_b (spatial) or one bit per source+sink slice pair (temporal).
inline double raw_rate(double bit_period, Mode mode) {
  if (!(bit_period > 0)) throw ConfigError("bit period must be positive");
  return mode == Mode::spatial ? 1.0 / bit_period : 1.0 / (2.0 * bit_period);
}

inline double throughput(double bit_period, Mode mode, Accounting accounting) {
  return raw_rate(bit_period, mode) * (accounting == Accounting::code_rate ? kHammingRate : kOverheadRate);
}

}  // namespace thermalcc
