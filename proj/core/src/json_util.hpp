// Copyright 2026 The drivestyle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Private JSON helpers. Not installed; nlohmann stays out of public headers.

#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "drivestyle/errors.hpp"
#include "drivestyle/styleanalysis.hpp"

namespace drivestyle::detail {

// JSON has no non-finite numbers; they travel as strings.
inline nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double real(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw SchemaError("expected a number, got " + j.dump());
}

template <typename T>
T get(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("key '") + key + "' has the wrong type");
  }
}

inline nlohmann::json parse_document(const std::string& text, const std::string& schema) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("invalid JSON for " + schema + ": " + e.what());
  }
  if (!j.is_object()) throw SchemaError(schema + " document must be a JSON object");
  if (j.contains("schema") && j["schema"] != schema)
    throw SchemaError("expected schema '" + schema + "', found " + j["schema"].dump());
  const int version = get<int>(j, "schema_version");
  if (version != 1)
    throw SchemaError(schema + " schema_version " + std::to_string(version) + " is not supported");
  return j;
}

/// Converts stray nlohmann exceptions raised while reading into SchemaError.
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed document: ") + e.what());
  }
}

nlohmann::json thresholds_json(const LevelThresholds& t);
LevelThresholds thresholds_from(const nlohmann::json& j);

}  // namespace drivestyle::detail
