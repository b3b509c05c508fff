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

#include "modelforge/template/manifest.h"

#include <regex>
#include <set>

#include "modelforge/common/semver.h"
#include "modelforge/executor/ops.h"

namespace modelforge::tmpl {
namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view s, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  return std::nullopt;
}

constexpr std::pair<FieldKind, std::string_view> kFieldKinds[] = {
    {FieldKind::kText, "text"},
    {FieldKind::kCategorical, "categorical"},
    {FieldKind::kNumeric, "numeric"},
    {FieldKind::kTimestamp, "timestamp"},
    {FieldKind::kIdentifier, "identifier"},
};
constexpr std::pair<OutputKind, std::string_view> kOutputKinds[] = {
    {OutputKind::kClassLabel, "class-label"},
    {OutputKind::kScore, "score"},
    {OutputKind::kRankedList, "ranked-list"},
};
constexpr std::pair<ParamType, std::string_view> kParamTypes[] = {
    {ParamType::kString, "string"}, {ParamType::kInt, "int"},   {ParamType::kFloat, "float"},
    {ParamType::kBool, "bool"},     {ParamType::kEnum, "enum"},
};

class Reader {
 public:
  Reader(std::string source, std::vector<std::string>& diags) : source_(std::move(source)), diags_(diags) {}

  void error(const std::string& msg) { diags_.push_back(source_ + ": " + msg); }

  std::string str(const json& obj, const char* key, bool required, const std::string& where) {
    if (!obj.contains(key)) {
      if (required) error(where + "missing field '" + key + "'");
      return {};
    }
    if (!obj[key].is_string()) {
      error(where + "field '" + key + "' must be a string");
      return {};
    }
    return obj[key].get<std::string>();
  }

  bool boolean(const json& obj, const char* key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) {
      error(where + "field '" + key + "' must be a boolean");
      return fallback;
    }
    return obj[key].get<bool>();
  }

  std::vector<std::string> strings(const json& obj, const char* key, const std::string& where) {
    std::vector<std::string> out;
    if (!obj.contains(key) || obj[key].is_null()) return out;
    if (!obj[key].is_array()) {
      error(where + "field '" + key + "' must be a list");
      return out;
    }
    for (const auto& v : obj[key]) {
      if (v.is_string()) {
        out.push_back(v.get<std::string>());
      } else {
        error(where + "field '" + key + "' must contain only strings");
      }
    }
    return out;
  }

 private:
  std::string source_;
  std::vector<std::string>& diags_;
};

}  // namespace

std::string_view to_string(FieldKind k) {
  for (const auto& [e, n] : kFieldKinds) {
    if (e == k) return n;
  }
  return "text";
}
std::string_view to_string(OutputKind k) {
  for (const auto& [e, n] : kOutputKinds) {
    if (e == k) return n;
  }
  return "class-label";
}
std::string_view to_string(ParamType t) {
  for (const auto& [e, n] : kParamTypes) {
    if (e == t) return n;
  }
  return "string";
}
std::optional<FieldKind> field_kind_from(std::string_view s) { return lookup(s, kFieldKinds); }

bool valid_template_name(std::string_view name) {
  static const std::regex kName("[a-z][a-z0-9-]{1,62}");
  return std::regex_match(name.begin(), name.end(), kName);
}

bool valid_identifier(std::string_view name) {
  static const std::regex kIdent("[A-Za-z_][A-Za-z0-9_-]*");
  return std::regex_match(name.begin(), name.end(), kIdent);
}

const std::vector<std::string>& serving_model_kinds() {
  static const std::vector<std::string> kinds = {"majority", "nb-multinomial", "logreg-binary", "tfidf-knn"};
  return kinds;
}

bool type_checks(const ConfigParamSpec& spec, const json& value) {
  switch (spec.type) {
    case ParamType::kString: return value.is_string();
    case ParamType::kInt: return value.is_number_integer();
    case ParamType::kFloat: return value.is_number();
    case ParamType::kBool: return value.is_boolean();
    case ParamType::kEnum:
      return value.is_string() && std::find(spec.enum_values.begin(), spec.enum_values.end(),
                                            value.get<std::string>()) != spec.enum_values.end();
  }
  return false;
}

const ConfigParamSpec* TemplateManifest::find_param(std::string_view n) const {
  for (const auto& p : params) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

const InputFieldSpec* TemplateManifest::find_input(std::string_view n) const {
  for (const auto& f : inputs) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

json TemplateManifest::to_json() const {
  json j;
  j["name"] = name;
  j["version"] = version;
  j["description"] = description;
  j["inputs"] = json::array();
  for (const auto& f : inputs) {
    j["inputs"].push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"required", f.required}});
  }
  j["output"] = {{"kind", to_string(output.kind)}};
  if (!output.label_set.empty()) j["output"]["label_set"] = output.label_set;
  j["params"] = json::array();
  for (const auto& p : params) {
    json pj = {{"name", p.name}, {"type", to_string(p.type)}, {"required", p.required},
               {"description", p.description}};
    if (p.default_value) pj["default"] = *p.default_value;
    if (!p.enum_values.empty()) pj["enum_values"] = p.enum_values;
    j["params"].push_back(std::move(pj));
  }
  j["resources"] = {{"cpu_millis", resources.cpu_millis}, {"memory_mb", resources.memory_mb}};
  j["approval_required"] = approval_required;
  return j;
}

json PipelineSpec::to_json() const {
  json j = {{"steps", json::array()}};
  for (const auto& s : steps) {
    j["steps"].push_back({{"name", s.name}, {"op", s.op}, {"params", s.params}, {"inputs", s.inputs},
                          {"outputs", s.outputs}});
  }
  return j;
}

json ServingSpec::to_json() const { return {{"model_kind", model_kind}, {"artifact", artifact}}; }

TemplateManifest manifest_from_json(const json& doc, const std::string& source,
                                    std::vector<std::string>& diagnostics) {
  Reader r(source, diagnostics);
  TemplateManifest m;
  if (!doc.is_object()) {
    r.error("top level must be a mapping");
    return m;
  }
  m.name = r.str(doc, "name", true, "");
  if (!m.name.empty() && !valid_template_name(m.name)) {
    r.error("name '" + m.name + "' must match [a-z][a-z0-9-]{1,62}");
  }
  m.version = r.str(doc, "version", true, "");
  if (!m.version.empty() && !SemVer::parse(m.version)) r.error("version '" + m.version + "' is not semver");
  m.description = r.str(doc, "description", false, "");
  m.approval_required = r.boolean(doc, "approval_required", true, "");

  if (doc.contains("inputs")) {
    if (!doc["inputs"].is_array()) {
      r.error("'inputs' must be a list");
    } else {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < doc["inputs"].size(); ++i) {
        const auto& f = doc["inputs"][i];
        const std::string where = "inputs[" + std::to_string(i) + "]: ";
        if (!f.is_object()) {
          r.error(where + "must be a mapping");
          continue;
        }
        InputFieldSpec spec;
        spec.name = r.str(f, "name", true, where);
        if (!spec.name.empty() && !valid_identifier(spec.name)) r.error(where + "invalid field name");
        if (!seen.insert(spec.name).second) r.error(where + "duplicate input field '" + spec.name + "'");
        auto kind = r.str(f, "kind", true, where);
        if (auto k = lookup(kind, kFieldKinds)) {
          spec.kind = *k;
        } else if (!kind.empty()) {
          r.error(where + "unknown kind '" + kind + "'");
        }
        spec.required = r.boolean(f, "required", true, where);
        m.inputs.push_back(std::move(spec));
      }
    }
  } else {
    r.error("missing field 'inputs'");
  }

  if (doc.contains("output") && doc["output"].is_object()) {
    const auto& o = doc["output"];
    auto kind = r.str(o, "kind", true, "output: ");
    if (auto k = lookup(kind, kOutputKinds)) {
      m.output.kind = *k;
    } else if (!kind.empty()) {
      r.error("output: unknown kind '" + kind + "'");
    }
    m.output.label_set = r.strings(o, "label_set", "output: ");
    if (m.output.kind == OutputKind::kClassLabel && m.output.label_set.empty()) {
      r.error("output: label_set must be nonempty for class-label outputs");
    }
  } else {
    r.error("missing mapping 'output'");
  }

  if (doc.contains("params") && !doc["params"].is_null()) {
    if (!doc["params"].is_array()) {
      r.error("'params' must be a list");
    } else {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < doc["params"].size(); ++i) {
        const auto& p = doc["params"][i];
        const std::string where = "params[" + std::to_string(i) + "]: ";
        if (!p.is_object()) {
          r.error(where + "must be a mapping");
          continue;
        }
        ConfigParamSpec spec;
        spec.name = r.str(p, "name", true, where);
        if (!spec.name.empty() && !valid_identifier(spec.name)) r.error(where + "invalid parameter name");
        if (!seen.insert(spec.name).second) r.error(where + "duplicate parameter '" + spec.name + "'");
        auto type = r.str(p, "type", true, where);
        if (auto t = lookup(type, kParamTypes)) {
          spec.type = *t;
        } else if (!type.empty()) {
          r.error(where + "unknown type '" + type + "'");
        }
        spec.description = r.str(p, "description", false, where);
        spec.required = r.boolean(p, "required", false, where);
        spec.enum_values = r.strings(p, "enum_values", where);
        if (spec.type == ParamType::kEnum && spec.enum_values.empty()) {
          r.error(where + "enum parameter '" + spec.name + "' needs enum_values");
        }
        if (p.contains("default") && !p["default"].is_null()) {
          spec.default_value = p["default"];
          if (!type_checks(spec, *spec.default_value)) {
            r.error(where + "default of '" + spec.name + "' does not match type " +
                    std::string(to_string(spec.type)));
          }
        }
        m.params.push_back(std::move(spec));
      }
    }
  }

  if (doc.contains("resources")) {
    const auto& res = doc["resources"];
    auto read = [&](const char* key) -> std::int64_t {
      if (!res.contains(key)) return 0;
      if (!res[key].is_number_integer() || res[key].get<std::int64_t>() < 0) {
        r.error(std::string("resources: '") + key + "' must be a non-negative integer");
        return 0;
      }
      return res[key].get<std::int64_t>();
    };
    if (!res.is_object()) {
      r.error("'resources' must be a mapping");
    } else {
      m.resources.cpu_millis = read("cpu_millis");
      m.resources.memory_mb = read("memory_mb");
    }
  }
  return m;
}

PipelineSpec pipeline_from_json(const json& doc, const std::string& source,
                                std::vector<std::string>& diagnostics) {
  Reader r(source, diagnostics);
  PipelineSpec p;
  if (!doc.is_object() || !doc.contains("steps") || !doc["steps"].is_array()) {
    r.error("expected a mapping with a 'steps' list");
    return p;
  }
  for (std::size_t i = 0; i < doc["steps"].size(); ++i) {
    const auto& s = doc["steps"][i];
    const std::string where = "steps[" + std::to_string(i) + "]: ";
    if (!s.is_object()) {
      r.error(where + "must be a mapping");
      continue;
    }
    StepSpec step;
    step.name = r.str(s, "name", true, where);
    step.op = r.str(s, "op", true, where);
    if (s.contains("params") && !s["params"].is_null()) {
      if (s["params"].is_object()) {
        step.params = s["params"];
      } else {
        r.error(where + "'params' must be a mapping");
      }
    }
    step.inputs = r.strings(s, "inputs", where);
    step.outputs = r.strings(s, "outputs", where);
    p.steps.push_back(std::move(step));
  }
  if (p.steps.empty()) r.error("pipeline has no steps");
  return p;
}

ServingSpec serving_from_json(const json& doc, const std::string& source,
                              std::vector<std::string>& diagnostics) {
  Reader r(source, diagnostics);
  ServingSpec s;
  if (!doc.is_object()) {
    r.error("top level must be a mapping");
    return s;
  }
  s.model_kind = r.str(doc, "model_kind", true, "");
  s.artifact = r.str(doc, "artifact", true, "");
  const auto& kinds = serving_model_kinds();
  if (!s.model_kind.empty() && std::find(kinds.begin(), kinds.end(), s.model_kind) == kinds.end()) {
    r.error("unknown model_kind '" + s.model_kind + "'");
  }
  return s;
}

std::vector<std::string> collect_param_refs(const json& params) {
  static const std::regex kRef(R"(\$\{([^}]*)\})");
  std::vector<std::string> refs;
  if (params.is_string()) {
    const auto& s = params.get_ref<const std::string&>();
    for (std::sregex_iterator it(s.begin(), s.end(), kRef), end; it != end; ++it) {
      refs.push_back((*it)[1].str());
    }
  } else if (params.is_structured()) {
    for (const auto& v : params) {
      auto sub = collect_param_refs(v);
      refs.insert(refs.end(), sub.begin(), sub.end());
    }
  }
  return refs;
}

void cross_validate(const TemplateBundle& bundle, std::vector<std::string>& diagnostics) {
  const std::string pipe_src = "kfp/pipeline.yaml";
  std::set<std::string> step_names;
  std::set<std::string> produced;
  for (const auto& step : bundle.pipeline.steps) {
    const std::string where = pipe_src + ": step '" + step.name + "': ";
    if (!step.name.empty() && !valid_identifier(step.name)) diagnostics.push_back(where + "invalid step name");
    if (!step_names.insert(step.name).second) diagnostics.push_back(where + "duplicate step name");
    if (!step.op.empty() && !executor::is_builtin_op(step.op)) {
      diagnostics.push_back(where + "unknown op '" + step.op + "'");
    } else if (!step.op.empty()) {
      const auto arity = executor::op_arity(step.op);
      if (step.inputs.size() < arity.min_inputs || step.inputs.size() > arity.max_inputs) {
        diagnostics.push_back(where + "op '" + step.op + "' takes " + std::to_string(arity.min_inputs) +
                              (arity.max_inputs != arity.min_inputs ? "-" + std::to_string(arity.max_inputs) : "") +
                              " inputs, got " + std::to_string(step.inputs.size()));
      }
      if (step.outputs.size() != arity.outputs) {
        diagnostics.push_back(where + "op '" + step.op + "' produces " + std::to_string(arity.outputs) +
                              " outputs, got " + std::to_string(step.outputs.size()));
      }
    }
    for (const auto& in : step.inputs) {
      if (in != kDatasetArtifact && !produced.count(in)) {
        diagnostics.push_back(where + "input '" + in +
                              "' is neither 'dataset' nor an output of an earlier step");
      }
    }
    for (const auto& ref : collect_param_refs(step.params)) {
      if (!bundle.manifest.find_param(ref)) {
        diagnostics.push_back(where + "dangling reference ${" + ref + "} to undeclared parameter");
      }
    }
    for (const auto& out : step.outputs) {
      if (out == kDatasetArtifact || !valid_identifier(out)) {
        diagnostics.push_back(where + "invalid output artifact name '" + out + "'");
      } else if (!produced.insert(out).second) {
        diagnostics.push_back(where + "artifact '" + out + "' is produced more than once");
      }
    }
  }
  if (!bundle.serving.artifact.empty() && !produced.count(bundle.serving.artifact)) {
    diagnostics.push_back("kserve/serving.yaml: artifact '" + bundle.serving.artifact +
                          "' is not produced by any pipeline step");
  }
}

}  // namespace modelforge::tmpl
