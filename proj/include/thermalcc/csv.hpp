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
 * @file csv.hpp
 * @brief Trace CSV files and the plain tables reports are made of.
 *
 * Ground truth:  time_s,core_id,temp_c
 * Sensor:        time_s,core_id,reading_c
 *
 * Values carry six decimals. The reader accepts either header, so a real
 * coretemp dump in the sensor schema decodes the same way a simulated one does.
 */

#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thermalcc/errors.hpp"
#include "thermalcc/sensor.hpp"
#include "thermalcc/thermal_model.hpp"

namespace thermalcc {

inline constexpr const char* kTruthHeader = "time_s,core_id,temp_c";
inline constexpr const char* kSensorHeader = "time_s,core_id,reading_c";

/// Fixed-point text with `digits` decimals; "-0.000000" is folded to zero.
inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

/// A header plus rows of preformatted cells.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw InternalError("table '" + name + "' row width mismatch");
    rows.push_back(std::move(row));
  }

  std::string to_csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  /// Whitespace-separated columns with a commented header, for gnuplot.
  std::string to_gnuplot() const {
    std::string out = "#";
    for (const auto& h : header) out += ' ' + h;
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ' ';
        out += (r[i].empty() || r[i] == "--") ? "?" : r[i];
      }
      out += '\n';
    }
    return out;
  }
};

/// Truth trace rows for the listed cores, every `stride`-th step.
inline Table truth_table(const ThermalTrace& trace, const std::vector<int>& cores, std::size_t stride = 1,
                         std::string name = "truth") {
  if (stride == 0) throw ConfigError("stride must be positive");
  Table t{std::move(name), {"time_s", "core_id", "temp_c"}, {}};
  for (std::size_t k = 0; k < trace.size(); k += stride)
    for (int c : cores) t.add({fixed(trace.time(k)), std::to_string(c), fixed(trace.die_temp(k, c))});
  return t;
}

inline Table sensor_table(const SensorTrace& trace, std::string name = "sensor") {
  Table t{std::move(name), {"time_s", "core_id", "reading_c"}, {}};
  for (const auto& s : trace.samples) t.add({fixed(s.time), std::to_string(s.core), fixed(s.reading)});
  return t;
}

namespace detail {

inline double parse_double(const std::string& cell, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE)
    throw ConfigError("trace CSV line " + std::to_string(line) + ": bad number '" + cell + "'");
  return v;
}

}  // namespace detail

/// Parses either trace schema into a SensorTrace. Blank lines are skipped.
inline SensorTrace parse_trace_csv(std::istream& in) {
  std::string line;
  std::size_t n = 0;
  SensorTrace out;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kSensorHeader && line != kTruthHeader)
        throw ConfigError("trace CSV header must be '" + std::string(kSensorHeader) + "' or '" + kTruthHeader + "'");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 3) throw ConfigError("trace CSV line " + std::to_string(n) + ": expected 3 columns");
    const double core = detail::parse_double(cells[1], n);
    if (core != static_cast<double>(static_cast<int>(core)) || core < 0)
      throw ConfigError("trace CSV line " + std::to_string(n) + ": core_id must be a non-negative integer");
    SensorSample s{detail::parse_double(cells[0], n), static_cast<int>(core), detail::parse_double(cells[2], n)};
    if (!out.samples.empty() && s.time < out.samples.back().time)
      throw ConfigError("trace CSV line " + std::to_string(n) + ": time goes backwards");
    out.samples.push_back(s);
  }
  if (!header) throw ConfigError("trace CSV is empty");
  return out;
}

inline SensorTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read trace file '" + path + "'");
  return parse_trace_csv(in);
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << bytes;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace thermalcc
