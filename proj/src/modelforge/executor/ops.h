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

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modelforge/template/manifest.h"

namespace modelforge::executor {

namespace fs = std::filesystem;
using nlohmann::json;

// Everything a builtin step sees. Inputs are files named after the declared
// input artifacts inside `in_dir`; outputs go to `out_dir` under their
// declared names.
struct OpContext {
  std::string step;
  json params;  // after ${param} substitution
  const tmpl::TemplateManifest* manifest = nullptr;
  fs::path in_dir;
  fs::path out_dir;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, double>* metrics = nullptr;
  json* report = nullptr;  // extra structured results (confusion matrices)
  std::function<void(const std::string&)> log;
  std::function<void()> checkpoint;  // throws when the run must stop

  std::string read_input(std::size_t i) const;
  void write_output(std::size_t i, std::string_view bytes) const;
  // Typed parameter access; a missing or null value yields the fallback.
  double param_number(const std::string& name, double fallback) const;
  std::int64_t param_int(const std::string& name, std::int64_t fallback) const;
  std::string param_string(const std::string& name, const std::string& fallback) const;
};

using OpFn = std::function<void(OpContext&)>;

// Builtin pipeline step vocabulary.
bool is_builtin_op(std::string_view op);
const std::vector<std::string>& builtin_op_ids();
const OpFn& builtin_op(std::string_view op);

// Declared input/output arity of an op, checked before execution.
struct OpArity {
  std::size_t min_inputs;
  std::size_t max_inputs;
  std::size_t outputs;
};
OpArity op_arity(std::string_view op);

// Training-set size for a holdout split of n rows.
std::size_t split_train_size(std::size_t n, double ratio);

// Names the label column added to training snapshots.
constexpr const char* kLabelField = "label";

}  // namespace modelforge::executor
