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

#include "modelforge/store/store.h"

#include <algorithm>
#include <mutex>

#include "modelforge/common/archive.h"
#include "modelforge/common/digest.h"
#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/common/semver.h"
#include "modelforge/template/manifest.h"

namespace modelforge::store {
namespace {

bool valid_bucket(const std::string& b) { return tmpl::valid_identifier(b); }

std::string artifact_id(const std::string& bucket, const std::string& key) { return bucket + "/" + key; }

}  // namespace

TemplateRef TemplateRef::from_json(const json& j) {
  return {j.at("name").get<std::string>(), j.at("version").get<std::string>(), j.value("digest", "")};
}

ArtifactKey ArtifactKey::from_json(const json& j) {
  return {j.at("bucket").get<std::string>(), j.at("key").get<std::string>(), j.value("digest", "")};
}

json TemplateSummary::to_json() const {
  json j = ref.to_json();
  j["description"] = description;
  j["approval_required"] = approval_required;
  j["output_kind"] = output_kind;
  j["published_at"] = format_rfc3339(published_at);
  return j;
}

Store::Store(fs::path root, const Clock& clock) : root_(std::move(root)), clock_(clock) {
  fs::create_directories(root_ / "templates");
  fs::create_directories(root_ / "artifacts");
  load();
}

void Store::load() {
  const auto index = root_ / "index.json";
  if (fs::exists(index)) {
    auto j = json::parse(read_file(index));
    for (auto it = j["artifacts"].begin(); it != j["artifacts"].end(); ++it) {
      artifact_digests_[it.key()] = it->at("digest").get<std::string>();
    }
    for (const auto& r : j.value("retired", json::array())) retired_.insert(r.get<std::string>());
  }
  for (const auto& name_dir : fs::directory_iterator(root_ / "templates")) {
    if (!name_dir.is_directory()) continue;
    for (const auto& ver_dir : fs::directory_iterator(name_dir.path())) {
      const auto meta_path = ver_dir.path() / "meta.json";
      if (!fs::exists(meta_path) || !fs::exists(ver_dir.path() / "archive.tmpl.tgz")) continue;
      auto meta = json::parse(read_file(meta_path));
      TemplateSummary s;
      s.ref = TemplateRef::from_json(meta);
      s.description = meta.value("description", "");
      s.approval_required = meta.value("approval_required", true);
      s.output_kind = meta.value("output_kind", "");
      s.published_at = meta.value("published_at_ms", Timestamp{0});
      templates_[s.ref.name][s.ref.version] = s;
    }
  }
}

void Store::save_index_locked() const {
  json j = {{"artifacts", json::object()}, {"retired", retired_}};
  for (const auto& [id, digest] : artifact_digests_) j["artifacts"][id] = {{"digest", digest}};
  write_file_atomic(root_ / "index.json", j.dump(1));
}

TemplateRef Store::publish(const tmpl::TemplateArchive& archive) {
  const auto bundle = tmpl::read_bundle(archive);
  const auto& m = bundle.manifest;
  std::unique_lock lock(mu_);
  if (templates_.count(m.name) && templates_[m.name].count(m.version)) {
    fail(ErrorCode::kConflict, "duplicate-template", "template " + m.name + "@" + m.version + " is already published",
         {{{"name", m.name}, {"version", m.version}}});
  }
  TemplateSummary s;
  s.ref = {m.name, m.version, archive.digest};
  s.description = m.description;
  s.approval_required = m.approval_required;
  s.output_kind = std::string(tmpl::to_string(m.output.kind));
  s.published_at = clock_.now();
  const auto dir = root_ / "templates" / m.name / m.version;
  write_file_atomic(dir / "archive.tmpl.tgz", archive.bytes);
  json meta = s.ref.to_json();
  meta["description"] = s.description;
  meta["approval_required"] = s.approval_required;
  meta["output_kind"] = s.output_kind;
  meta["published_at_ms"] = s.published_at;
  meta["manifest"] = m.to_json();
  write_file_atomic(dir / "meta.json", meta.dump(2));
  templates_[m.name][m.version] = s;
  return s.ref;
}

std::vector<TemplateSummary> Store::list_templates(const std::optional<std::string>& prefix) const {
  std::shared_lock lock(mu_);
  std::vector<TemplateSummary> out;
  for (const auto& [name, versions] : templates_) {
    if (prefix && name.rfind(*prefix, 0) != 0) continue;
    std::vector<TemplateSummary> vs;
    for (const auto& [v, s] : versions) vs.push_back(s);
    std::sort(vs.begin(), vs.end(), [](const TemplateSummary& a, const TemplateSummary& b) {
      return compare(*SemVer::parse(a.ref.version), *SemVer::parse(b.ref.version)) > 0;
    });
    out.insert(out.end(), vs.begin(), vs.end());
  }
  return out;
}

TemplateRef Store::resolve(const std::string& name, const std::string& version) const {
  std::shared_lock lock(mu_);
  auto it = templates_.find(name);
  if (it == templates_.end() || it->second.empty()) {
    fail(ErrorCode::kNotFound, "template-not-found", "no template named '" + name + "'");
  }
  if (version.empty() || version == "latest") {
    const TemplateSummary* best = nullptr;
    for (const auto& [v, s] : it->second) {
      if (!best || compare(*SemVer::parse(v), *SemVer::parse(best->ref.version)) > 0) best = &s;
    }
    return best->ref;
  }
  auto vit = it->second.find(version);
  if (vit == it->second.end()) {
    fail(ErrorCode::kNotFound, "template-not-found", "template " + name + "@" + version + " not found");
  }
  return vit->second.ref;
}

TemplateRef Store::resolve(const std::string& ref) const {
  auto at = ref.find('@');
  if (at == std::string::npos) return resolve(ref, "latest");
  return resolve(ref.substr(0, at), ref.substr(at + 1));
}

tmpl::TemplateArchive Store::pull(const TemplateRef& ref) const {
  const auto resolved = resolve(ref.name, ref.version);
  if (!ref.digest.empty() && ref.digest != resolved.digest) {
    fail(ErrorCode::kIntegrity, "digest-mismatch", "requested digest does not match published " + ref.str());
  }
  tmpl::TemplateArchive archive;
  archive.bytes = read_file(root_ / "templates" / resolved.name / resolved.version / "archive.tmpl.tgz");
  archive.digest = resolved.digest;
  if (sha256_hex(gzip_decompress(archive.bytes)) != resolved.digest) {
    fail(ErrorCode::kIntegrity, "digest-mismatch", "stored archive for " + resolved.str() + " is corrupt");
  }
  archive.manifest = tmpl::read_bundle(archive).manifest;
  return archive;
}

void Store::delete_template(const std::string& name, const std::string& version) {
  std::unique_lock lock(mu_);
  auto it = templates_.find(name);
  if (it == templates_.end() || !it->second.count(version)) {
    fail(ErrorCode::kNotFound, "template-not-found", "template " + name + "@" + version + " not found");
  }
  fs::remove_all(root_ / "templates" / name / version);
  it->second.erase(version);
  if (it->second.empty()) {
    templates_.erase(it);
    std::error_code ec;
    fs::remove(root_ / "templates" / name, ec);
  }
}

fs::path Store::artifact_path(const std::string& bucket, const std::string& key) const {
  return root_ / "artifacts" / bucket / key;
}

ArtifactKey Store::put_artifact(const std::string& bucket, const std::string& key, std::string_view bytes) {
  if (!valid_bucket(bucket)) fail(ErrorCode::kValidation, "invalid-key", "invalid bucket name '" + bucket + "'");
  if (!is_safe_relative_path(key)) fail(ErrorCode::kValidation, "invalid-key", "invalid artifact key '" + key + "'");
  const auto id = artifact_id(bucket, key);
  std::unique_lock lock(mu_);
  if (artifact_digests_.count(id) || retired_.count(id)) {
    fail(ErrorCode::kConflict, "write-once", "artifact " + id + " already written", {{{"key", id}}});
  }
  ArtifactKey k{bucket, key, sha256_hex(bytes)};
  write_file_atomic(artifact_path(bucket, key), bytes);
  artifact_digests_[id] = k.digest;
  save_index_locked();
  return k;
}

std::optional<ArtifactKey> Store::find_artifact(const std::string& bucket, const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = artifact_digests_.find(artifact_id(bucket, key));
  if (it == artifact_digests_.end()) return std::nullopt;
  return ArtifactKey{bucket, key, it->second};
}

std::string Store::get_artifact(const ArtifactKey& key) const {
  std::string expected;
  {
    std::shared_lock lock(mu_);
    auto it = artifact_digests_.find(artifact_id(key.bucket, key.key));
    if (it == artifact_digests_.end()) {
      fail(ErrorCode::kNotFound, "artifact-not-found", "artifact " + key.path() + " not found");
    }
    expected = it->second;
  }
  if (!key.digest.empty() && key.digest != expected) {
    fail(ErrorCode::kIntegrity, "digest-mismatch", "artifact " + key.path() + " digest differs from the index");
  }
  std::string bytes;
  try {
    bytes = read_file(artifact_path(key.bucket, key.key));
  } catch (const Error&) {
    fail(ErrorCode::kIntegrity, "artifact-missing", "artifact " + key.path() + " is indexed but missing on disk");
  }
  if (sha256_hex(bytes) != expected) {
    fail(ErrorCode::kIntegrity, "digest-mismatch", "artifact " + key.path() + " failed digest verification");
  }
  return bytes;
}

ArtifactKey Store::move_to_archive(const ArtifactKey& key) {
  if (key.key.rfind("archive/", 0) == 0) return key;
  const std::string bytes = get_artifact(key);
  auto archived = put_artifact(key.bucket, "archive/" + key.key, bytes);
  std::unique_lock lock(mu_);
  const auto id = artifact_id(key.bucket, key.key);
  artifact_digests_.erase(id);
  retired_.insert(id);
  save_index_locked();
  std::error_code ec;
  fs::remove(artifact_path(key.bucket, key.key), ec);
  return archived;
}

}  // namespace modelforge::store
