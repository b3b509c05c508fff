// Copyright 2026 The ModelForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace modelforge {

// Parses the restricted YAML dialect used by template and platform files
// into JSON: a single document, no anchors/aliases, no explicit tags. Plain
// scalars resolve to null/bool/int/float per the YAML 1.2 core schema;
// quoted scalars always stay strings. Errors are Error(kValidation,
// "yaml-parse") carrying {file, line}.
nlohmann::json parse_yaml(std::string_view text, const std::string& source_name);

std::string to_yaml(const nlohmann::json& value);

}  // namespace modelforge
