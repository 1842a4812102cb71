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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermalcc {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// A true temperature reached the maximum junction temperature.
class ThermalTrip : public Error {
 public:
  ThermalTrip(double time_s, int core, double temp_c)
      : Error("thermal_trip", "thermal trip on core " + std::to_string(core) + " at t=" + std::to_string(time_s) +
                                  " s (" + std::to_string(temp_c) + " C)"),
        time_s_(time_s),
        core_(core),
        temp_c_(temp_c) {}
  double time() const noexcept { return time_s_; }
  int core() const noexcept { return core_; }
  double temperature() const noexcept { return temp_c_; }

 private:
  double time_s_;
  int core_;
  double temp_c_;
};

/// Demodulation ran off the end of the trace. Carries the bits decoded so far.
class TruncationError : public Error {
 public:
  TruncationError(std::vector<std::uint8_t> recovered, std::size_t requested)
      : Error("truncated", "trace too short: recovered " + std::to_string(recovered.size()) + " of " +
                               std::to_string(requested) + " bits"),
        recovered_(std::move(recovered)) {}
  const std::vector<std::uint8_t>& recovered() const noexcept { return recovered_; }

 private:
  std::vector<std::uint8_t> recovered_;
};

class UndefinedCorrelation : public Error {
 public:
  explicit UndefinedCorrelation(const std::string& what) : Error("undefined_correlation", what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error("internal", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace thermalcc
