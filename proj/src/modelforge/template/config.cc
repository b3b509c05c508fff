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

#include "modelforge/template/config.h"

#include <set>

#include "modelforge/common/error.h"

namespace modelforge::tmpl {

ModelConfig ModelConfig::from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kValidation, "config", "model config must be an object");
  ModelConfig c;
  json issues = json::array();
  auto bad = [&](const std::string& field, const std::string& msg) {
    issues.push_back({{"field", field}, {"message", msg}});
  };
  static const std::set<std::string> kKnown = {"template", "resources", "connector",  "inputs",
                                               "output",   "args",      "auto_approve", "auto_start",
                                               "retrain_interval", "monitoring"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!kKnown.count(it.key())) bad(it.key(), "unknown configuration field");
  }
  if (doc.contains("template")) {
    if (doc["template"].is_string()) {
      c.template_ref = doc["template"].get<std::string>();
    } else {
      bad("template", "must be a string like name@version");
    }
  }
  if (doc.contains("resources") && !doc["resources"].is_null()) {
    const auto& r = doc["resources"];
    ResourceMinimums res;
    if (!r.is_object()) {
      bad("resources", "must be an object");
    } else {
      for (const char* key : {"cpu_millis", "memory_mb"}) {
        if (!r.contains(key)) continue;
        if (!r[key].is_number_integer() || r[key].get<std::int64_t>() < 0) {
          bad(std::string("resources.") + key, "must be a non-negative integer");
        } else {
          (std::string(key) == "cpu_millis" ? res.cpu_millis : res.memory_mb) = r[key].get<std::int64_t>();
        }
      }
      c.resources = res;
    }
  }
  if (doc.contains("connector")) c.connector = doc["connector"];
  if (doc.contains("inputs") && !doc["inputs"].is_null()) {
    if (!doc["inputs"].is_object()) {
      bad("inputs", "must map template input fields to source fields");
    } else {
      for (auto it = doc["inputs"].begin(); it != doc["inputs"].end(); ++it) {
        if (!it->is_string()) {
          bad("inputs." + it.key(), "source field must be a string");
        } else {
          c.inputs[it.key()] = it->get<std::string>();
        }
      }
    }
  }
  if (doc.contains("output") && !doc["output"].is_null()) {
    if (doc["output"].is_string()) {
      c.output = doc["output"].get<std::string>();
    } else {
      bad("output", "must name the source field holding labels");
    }
  }
  if (doc.contains("args") && !doc["args"].is_null()) {
    if (doc["args"].is_object()) {
      c.args = doc["args"];
    } else {
      bad("args", "must be an object");
    }
  }
  for (auto [key, target] : {std::pair{"auto_approve", &c.auto_approve}, std::pair{"auto_start", &c.auto_start}}) {
    if (!doc.contains(key)) continue;
    if (doc[key].is_boolean()) {
      *target = doc[key].get<bool>();
    } else {
      bad(key, "must be a boolean");
    }
  }
  if (doc.contains("retrain_interval") && !doc["retrain_interval"].is_null()) {
    const auto& v = doc["retrain_interval"];
    std::optional<Duration> d;
    if (v.is_number_integer() && v.get<std::int64_t>() > 0) d = v.get<std::int64_t>();
    if (v.is_string()) d = parse_duration(v.get<std::string>());
    if (!d || *d <= 0) {
      bad("retrain_interval", "must be a positive duration such as 100ms, 30s or 7d");
    } else {
      c.retrain_interval = d;
    }
  }
  if (doc.contains("monitoring") && !doc["monitoring"].is_null()) {
    if (doc["monitoring"].is_object()) {
      c.monitoring = doc["monitoring"];
    } else {
      bad("monitoring", "must be an object");
    }
  }
  if (!issues.empty()) {
    fail(ErrorCode::kValidation, "config",
         "invalid model config: " + issues[0]["field"].get<std::string>() + " " +
             issues[0]["message"].get<std::string>(),
         issues);
  }
  return c;
}

json ModelConfig::to_json() const {
  json j = json::object();
  j["template"] = template_ref;
  if (resources) j["resources"] = {{"cpu_millis", resources->cpu_millis}, {"memory_mb", resources->memory_mb}};
  if (!connector.is_null()) j["connector"] = connector;
  j["inputs"] = inputs;
  if (output) j["output"] = *output;
  j["args"] = args;
  j["auto_approve"] = auto_approve;
  j["auto_start"] = auto_start;
  if (retrain_interval) j["retrain_interval"] = *retrain_interval;
  j["monitoring"] = monitoring;
  return j;
}

json ResolvedConfig::to_json() const {
  json j;
  j["values"] = json::object();
  for (const auto& [k, v] : values) j["values"][k] = v;
  j["inputs"] = inputs;
  j["output"] = output ? json(*output) : json(nullptr);
  j["resources"] = {{"cpu_millis", resources.cpu_millis}, {"memory_mb", resources.memory_mb}};
  return j;
}

ResolvedConfig ResolvedConfig::from_json(const json& doc) {
  ResolvedConfig r;
  for (auto it = doc.at("values").begin(); it != doc.at("values").end(); ++it) r.values[it.key()] = *it;
  r.inputs = doc.at("inputs").get<std::map<std::string, std::string>>();
  if (!doc.at("output").is_null()) r.output = doc.at("output").get<std::string>();
  r.resources.cpu_millis = doc.at("resources").at("cpu_millis");
  r.resources.memory_mb = doc.at("resources").at("memory_mb");
  return r;
}

ResolvedConfig merge_config(const TemplateManifest& manifest, const ModelConfig& config) {
  json issues = json::array();
  std::string first_kind;
  auto issue = [&](const std::string& kind, const std::string& field, const std::string& msg) {
    if (first_kind.empty()) first_kind = kind;
    issues.push_back({{"kind", kind}, {"field", field}, {"message", msg}});
  };

  ResolvedConfig resolved;
  if (!config.args.is_object()) {
    issue("config", "args", "args must be an object");
  } else {
    for (auto it = config.args.begin(); it != config.args.end(); ++it) {
      if (!manifest.find_param(it.key())) issue("unknown-param", it.key(), "unknown parameter '" + it.key() + "'");
    }
  }
  for (const auto& p : manifest.params) {
    const bool supplied = config.args.is_object() && config.args.contains(p.name) && !config.args[p.name].is_null();
    if (supplied) {
      const auto& v = config.args[p.name];
      if (!type_checks(p, v)) {
        issue("type-mismatch", p.name,
              "parameter '" + p.name + "' expects " + std::string(to_string(p.type)) + ", got " + v.dump());
        continue;
      }
      // Integers supplied for float parameters are widened.
      resolved.values[p.name] = (p.type == ParamType::kFloat) ? json(v.get<double>()) : v;
    } else if (p.default_value) {
      resolved.values[p.name] = *p.default_value;
    } else if (p.required) {
      issue("missing-required", p.name, "required parameter '" + p.name + "' has no value and no default");
    } else {
      resolved.values[p.name] = nullptr;
    }
  }

  for (const auto& [field, source] : config.inputs) {
    if (!manifest.find_input(field)) issue("unknown-input", field, "template has no input field '" + field + "'");
    if (source.empty()) issue("missing-input", field, "input field '" + field + "' maps to an empty source field");
  }
  for (const auto& f : manifest.inputs) {
    if (f.required && !config.inputs.count(f.name)) {
      issue("missing-input", f.name, "required input field '" + f.name + "' is not mapped");
    }
  }
  resolved.inputs = config.inputs;
  if (manifest.output.kind != OutputKind::kRankedList) {
    if (!config.output || config.output->empty()) {
      issue("missing-output", "output", "template output requires an 'output' label binding");
    }
  }
  resolved.output = config.output;

  resolved.resources = manifest.resources;
  if (config.resources) {
    if (config.resources->cpu_millis < manifest.resources.cpu_millis) {
      issue("insufficient-resources", "resources.cpu_millis",
            "cpu_millis below the template minimum of " + std::to_string(manifest.resources.cpu_millis));
    }
    if (config.resources->memory_mb < manifest.resources.memory_mb) {
      issue("insufficient-resources", "resources.memory_mb",
            "memory_mb below the template minimum of " + std::to_string(manifest.resources.memory_mb));
    }
    resolved.resources = *config.resources;
  }

  if (!issues.empty()) {
    std::string msg;
    for (const auto& i : issues) msg += (msg.empty() ? "" : "; ") + i["message"].get<std::string>();
    fail(ErrorCode::kValidation, first_kind, msg, issues);
  }
  return resolved;
}

}  // namespace modelforge::tmpl
