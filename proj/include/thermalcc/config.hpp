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
 * @file config.hpp
 * @brief JSON configuration for the platform and the sensor.
 *
 * Layout (every key optional, defaults fill the rest):
 *
 *   {
 *     "topology": {"n_cores", "core_capacitance", "spreader_capacitance",
 *                  "r_lateral", "r_die_to_spreader", "r_spreader_to_ambient",
 *                  "ambient_temp", "hotspot_offset"},
 *     "power":    {"idle_w", "active_coeff", "frequency_exponent", "frequencies"},
 *     "sensor":   {"tj_max", "resolution", "refresh_period", "noise_sigma",
 *                  "wander_sigma", "wander_tau", "wander_order"},
 *     "platform": {"sink_load_w", "dt"}
 *   }
 *
 * Unknown keys are rejected.
 */

#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "thermalcc/errors.hpp"
#include "thermalcc/partitioning.hpp"
#include "thermalcc/sensor.hpp"

namespace thermalcc {

using Json = nlohmann::ordered_json;

struct Config {
  Platform platform;
  DtsConfig dts;

  void validate() const {
    platform.validate();
    dts.validate();
  }
};

namespace detail {

inline void reject_unknown(const Json& j, const char* section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(std::string("config section '") + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(std::string("unknown key '") + it.key() + "' in config section '" + section + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline Json to_json(const Config& c) {
  const auto& t = c.platform.topology;
  const auto& p = c.platform.power;
  const auto& s = c.dts;
  Json j;
  j["topology"] = {{"n_cores", t.n_cores},
                   {"core_capacitance", t.core_capacitance},
                   {"spreader_capacitance", t.spreader_capacitance},
                   {"r_lateral", t.r_lateral},
                   {"r_die_to_spreader", t.r_die_to_spreader},
                   {"r_spreader_to_ambient", t.r_spreader_to_ambient},
                   {"ambient_temp", t.ambient_temp},
                   {"hotspot_offset", t.hotspot_offset}};
  j["power"] = {{"idle_w", p.idle_w},
                {"active_coeff", p.active_coeff},
                {"frequency_exponent", p.frequency_exponent},
                {"frequencies", p.frequencies}};
  j["sensor"] = {{"tj_max", s.tj_max},
                 {"resolution", s.resolution},
                 {"refresh_period", s.refresh_period},
                 {"noise_sigma", s.noise_sigma},
                 {"wander_sigma", s.wander_sigma},
                 {"wander_tau", s.wander_tau},
                 {"wander_order", s.wander_order}};
  j["platform"] = {{"sink_load_w", c.platform.sink_load_w}, {"dt", c.platform.dt}};
  return j;
}

inline Config config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown(j, "root", {"topology", "power", "sensor", "platform"});
  Config c;
  if (j.contains("topology")) {
    const auto& s = j.at("topology");
    detail::reject_unknown(s, "topology",
                           {"n_cores", "core_capacitance", "spreader_capacitance", "r_lateral", "r_die_to_spreader",
                            "r_spreader_to_ambient", "ambient_temp", "hotspot_offset"});
    auto& t = c.platform.topology;
    detail::read(s, "n_cores", t.n_cores);
    detail::read(s, "core_capacitance", t.core_capacitance);
    detail::read(s, "spreader_capacitance", t.spreader_capacitance);
    detail::read(s, "r_lateral", t.r_lateral);
    detail::read(s, "r_die_to_spreader", t.r_die_to_spreader);
    detail::read(s, "r_spreader_to_ambient", t.r_spreader_to_ambient);
    detail::read(s, "ambient_temp", t.ambient_temp);
    detail::read(s, "hotspot_offset", t.hotspot_offset);
  }
  if (j.contains("power")) {
    const auto& s = j.at("power");
    detail::reject_unknown(s, "power", {"idle_w", "active_coeff", "frequency_exponent", "frequencies"});
    auto& p = c.platform.power;
    detail::read(s, "idle_w", p.idle_w);
    detail::read(s, "active_coeff", p.active_coeff);
    detail::read(s, "frequency_exponent", p.frequency_exponent);
    detail::read(s, "frequencies", p.frequencies);
  }
  if (j.contains("sensor")) {
    const auto& s = j.at("sensor");
    detail::reject_unknown(s, "sensor",
                           {"tj_max", "resolution", "refresh_period", "noise_sigma", "wander_sigma", "wander_tau",
                            "wander_order"});
    detail::read(s, "tj_max", c.dts.tj_max);
    detail::read(s, "resolution", c.dts.resolution);
    detail::read(s, "refresh_period", c.dts.refresh_period);
    detail::read(s, "noise_sigma", c.dts.noise_sigma);
    detail::read(s, "wander_sigma", c.dts.wander_sigma);
    detail::read(s, "wander_tau", c.dts.wander_tau);
    detail::read(s, "wander_order", c.dts.wander_order);
  }
  if (j.contains("platform")) {
    const auto& s = j.at("platform");
    detail::reject_unknown(s, "platform", {"sink_load_w", "dt"});
    detail::read(s, "sink_load_w", c.platform.sink_load_w);
    detail::read(s, "dt", c.platform.dt);
  }
  c.validate();
  return c;
}

inline Config parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the canonical JSON form, printed as 16 hex digits.
inline std::string config_hash(const Config& c) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(to_json(c).dump());
  return os.str();
}

}  // namespace thermalcc
