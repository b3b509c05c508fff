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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace modelforge::tmpl {

using nlohmann::json;

enum class FieldKind { kText, kCategorical, kNumeric, kTimestamp, kIdentifier };
enum class OutputKind { kClassLabel, kScore, kRankedList };
enum class ParamType { kString, kInt, kFloat, kBool, kEnum };

std::string_view to_string(FieldKind k);
std::string_view to_string(OutputKind k);
std::string_view to_string(ParamType t);
std::optional<FieldKind> field_kind_from(std::string_view s);

struct InputFieldSpec {
  std::string name;
  FieldKind kind = FieldKind::kText;
  bool required = true;
};

struct OutputSpec {
  OutputKind kind = OutputKind::kClassLabel;
  std::vector<std::string> label_set;
};

struct ConfigParamSpec {
  std::string name;
  ParamType type = ParamType::kString;
  std::optional<json> default_value;
  std::vector<std::string> enum_values;
  std::string description;
  bool required = false;
};

struct ResourceMinimums {
  std::int64_t cpu_millis = 0;
  std::int64_t memory_mb = 0;
};

struct TemplateManifest {
  std::string name;
  std::string version;
  std::string description;
  std::vector<InputFieldSpec> inputs;
  OutputSpec output;
  std::vector<ConfigParamSpec> params;
  ResourceMinimums resources;
  bool approval_required = true;

  const ConfigParamSpec* find_param(std::string_view name) const;
  const InputFieldSpec* find_input(std::string_view name) const;
  json to_json() const;
};

struct StepSpec {
  std::string name;
  std::string op;
  json params = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

struct PipelineSpec {
  std::vector<StepSpec> steps;
  json to_json() const;
};

struct ServingSpec {
  std::string model_kind;
  std::string artifact;
  json to_json() const;
};

// The three parsed specification files of a template.
struct TemplateBundle {
  TemplateManifest manifest;
  PipelineSpec pipeline;
  ServingSpec serving;
};

// Parsers append human-readable problems to `diagnostics` (prefixed with the
// source name) instead of throwing, so a validator can report everything at
// once. Structural garbage still yields a best-effort value.
TemplateManifest manifest_from_json(const json& doc, const std::string& source,
                                    std::vector<std::string>& diagnostics);
PipelineSpec pipeline_from_json(const json& doc, const std::string& source,
                                std::vector<std::string>& diagnostics);
ServingSpec serving_from_json(const json& doc, const std::string& source,
                              std::vector<std::string>& diagnostics);

// Cross-file checks: `${param}` references, artifact flow, op registry,
// serving artifact.
void cross_validate(const TemplateBundle& bundle, std::vector<std::string>& diagnostics);

// Every `${name}` occurring in string values of `params`, in document order.
std::vector<std::string> collect_param_refs(const json& params);

// True when `value` is acceptable for a parameter of `spec`'s type.
bool type_checks(const ConfigParamSpec& spec, const json& value);

bool valid_template_name(std::string_view name);
bool valid_identifier(std::string_view name);

constexpr std::string_view kDatasetArtifact = "dataset";
const std::vector<std::string>& serving_model_kinds();

}  // namespace modelforge::tmpl
