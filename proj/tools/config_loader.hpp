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

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace drivestyle::cli {

/// YAML text to a JSON tree. Unquoted scalars become booleans, null,
/// integers or reals where they parse as such.
nlohmann::json yaml_to_json(const std::string& yaml_text);

/// Applies `section.key=value` overrides; values are read as YAML scalars
/// or flow sequences.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& overrides);

}  // namespace drivestyle::cli
