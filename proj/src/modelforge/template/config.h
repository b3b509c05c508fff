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

#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "modelforge/common/time.h"
#include "modelforge/template/manifest.h"

namespace modelforge::tmpl {

// Business-level configuration supplied when instantiating a template.
struct ModelConfig {
  std::string template_ref;  // "name@version"; a bare name means latest
  std::optional<ResourceMinimums> resources;
  json connector;  // connectors::ConnectorSpec document, null when absent
  std::map<std::string, std::string> inputs;  // template input field -> source field
  std::optional<std::string> output;          // source field holding labels
  json args = json::object();
  bool auto_approve = false;
  bool auto_start = true;
  std::optional<Duration> retrain_interval;
  json monitoring = json::object();

  // Throws Error(kValidation) on structural problems.
  static ModelConfig from_json(const json& doc);
  json to_json() const;
};

struct ResolvedConfig {
  // One entry per declared parameter; null for an optional parameter that
  // has neither a supplied value nor a default.
  std::map<std::string, json> values;
  std::map<std::string, std::string> inputs;
  std::optional<std::string> output;
  ResourceMinimums resources;

  json to_json() const;
  static ResolvedConfig from_json(const json& doc);
};

// Fills every declared parameter from the supplied value or its default and
// validates the input/output binding. All problems are reported together in
// the error detail; the error kind is that of the first problem.
ResolvedConfig merge_config(const TemplateManifest& manifest, const ModelConfig& config);

}  // namespace modelforge::tmpl
