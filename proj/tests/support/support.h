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

// Helpers shared by the unit suites and the acceptance runner.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <unistd.h>

#include "json.hpp"
#include "modelforge/common/fs.h"
#include "modelforge/connectors/connector.h"
#include "modelforge/corpus/corpus.h"
#include "modelforge/executor/executor.h"
#include "modelforge/executor/ops.h"
#include "modelforge/template/package.h"

#ifndef MF_TEMPLATES_DIR
#error "MF_TEMPLATES_DIR must point at the shipped template projects"
#endif

namespace mftest {

namespace fs = std::filesystem;
using nlohmann::json;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("mf-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline fs::path template_dir(const std::string& name) { return fs::path(MF_TEMPLATES_DIR) / name; }

inline modelforge::tmpl::TemplateArchive shipped_template(const std::string& name) {
  return modelforge::tmpl::package(template_dir(name));
}

// Writes a seeded corpus as CSV and returns its path.
inline fs::path write_corpus(const fs::path& dir, const modelforge::corpus::CorpusOptions& options = {},
                             const std::string& file = "corpus.csv") {
  const auto path = dir / file;
  modelforge::write_file_atomic(path, modelforge::corpus::to_csv(modelforge::corpus::generate_corpus(options)));
  return path;
}

// Model configurations for the three shipped templates reading `csv`.
inline json fcr_config(const fs::path& csv) {
  return {{"template", "fcr@1.0.0"},
          {"connector", {{"kind", "csv-file"}, {"location", csv.string()}}},
          {"inputs", {{"description", "description"}}},
          {"output", "failure_code"}};
}

inline json similarity_config(const fs::path& csv) {
  return {{"template", "similarity@1.0.0"},
          {"connector", {{"kind", "csv-file"}, {"location", csv.string()}}},
          {"inputs", {{"id", "id"}, {"description", "description"}, {"status", "status"}, {"opened_at", "opened_at"}}}};
}

inline json approval_config(const fs::path& csv, const std::string& site = "") {
  json c = {{"template", "approval@1.0.0"},
            {"connector", {{"kind", "csv-file"}, {"location", csv.string()}}},
            {"inputs", {{"cost", "cost"}, {"priority", "priority"}}},
            {"output", "approved"}};
  if (!site.empty()) c["connector"]["row_filter"] = "site = \"" + site + "\"";
  return c;
}

// A run request built the way the platform builds one: the connector selects
// the bound inputs plus the output column as "label".
inline modelforge::executor::RunRequest prepare_run(const std::string& template_name, const json& config_doc,
                                                    modelforge::Timestamp as_of, const std::string& run_id = "r-1") {
  using namespace modelforge;
  executor::RunRequest req;
  req.run_id = run_id;
  req.model_id = template_name + "-1";
  req.bundle = tmpl::read_bundle(shipped_template(template_name));
  req.config = tmpl::merge_config(req.bundle.manifest, tmpl::ModelConfig::from_json(config_doc));
  auto spec = connectors::ConnectorSpec::from_json(config_doc["connector"]);
  spec.select.clear();
  std::vector<connectors::Field> schema;
  for (const auto& in : req.bundle.manifest.inputs) {
    auto it = req.config.inputs.find(in.name);
    if (it == req.config.inputs.end()) continue;
    spec.select.emplace_back(it->second, in.name);
    schema.push_back({in.name, in.kind, in.required});
  }
  if (req.config.output) {
    spec.select.emplace_back(*req.config.output, executor::kLabelField);
    schema.push_back({executor::kLabelField, tmpl::FieldKind::kCategorical, true});
  }
  req.data = connectors::fetch(spec, schema, as_of);
  return req;
}

// Polls `pred` until it holds or `timeout` elapses.
inline bool eventually(const std::function<bool()>& pred,
                       std::chrono::milliseconds timeout = std::chrono::milliseconds(20000)) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return pred();
}

}  // namespace mftest
