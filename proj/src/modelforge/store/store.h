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
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "modelforge/common/time.h"
#include "modelforge/template/package.h"

namespace modelforge::store {

namespace fs = std::filesystem;
using nlohmann::json;

struct TemplateRef {
  std::string name;
  std::string version;
  std::string digest;

  std::string str() const { return name + "@" + version; }
  json to_json() const { return {{"name", name}, {"version", version}, {"digest", digest}}; }
  static TemplateRef from_json(const json& j);
};

struct TemplateSummary {
  TemplateRef ref;
  std::string description;
  bool approval_required = true;
  std::string output_kind;
  Timestamp published_at = 0;

  json to_json() const;
};

struct ArtifactKey {
  std::string bucket;
  std::string key;
  std::string digest;

  std::string path() const { return bucket + "/" + key; }
  json to_json() const { return {{"bucket", bucket}, {"key", key}, {"digest", digest}}; }
  static ArtifactKey from_json(const json& j);
  bool operator==(const ArtifactKey&) const = default;
};

// Template registry plus write-once, content-verified bucket/key storage on
// the local filesystem:
//   <root>/templates/<name>/<version>/{archive.tmpl.tgz,meta.json}
//   <root>/artifacts/<bucket>/<key>
//   <root>/index.json   (digest index, replaced atomically)
class Store {
 public:
  Store(fs::path root, const Clock& clock);

  TemplateRef publish(const tmpl::TemplateArchive& archive);
  // Name ascending, then version descending by semver precedence.
  std::vector<TemplateSummary> list_templates(const std::optional<std::string>& name_prefix = {}) const;
  // `version` may be "latest".
  TemplateRef resolve(const std::string& name, const std::string& version) const;
  // Accepts "name@version" or "name".
  TemplateRef resolve(const std::string& ref) const;
  tmpl::TemplateArchive pull(const TemplateRef& ref) const;
  void delete_template(const std::string& name, const std::string& version);

  ArtifactKey put_artifact(const std::string& bucket, const std::string& key, std::string_view bytes);
  std::string get_artifact(const ArtifactKey& key) const;
  std::optional<ArtifactKey> find_artifact(const std::string& bucket, const std::string& key) const;
  // Relocates an artifact under the `archive/` prefix of its bucket; the old
  // key is retired and can never be written again.
  ArtifactKey move_to_archive(const ArtifactKey& key);

  const fs::path& root() const { return root_; }

 private:
  void load();
  void save_index_locked() const;
  fs::path artifact_path(const std::string& bucket, const std::string& key) const;

  fs::path root_;
  const Clock& clock_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::map<std::string, TemplateSummary>> templates_;
  std::map<std::string, std::string> artifact_digests_;  // "bucket/key" -> digest
  std::set<std::string> retired_;
};

}  // namespace modelforge::store
