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

#include "modelforge/template/package.h"

#include <algorithm>
#include <fstream>

#include "modelforge/common/archive.h"
#include "modelforge/common/digest.h"
#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/common/yaml.h"

namespace modelforge::tmpl {
namespace {

struct LayoutEntry {
  const char* name;
  bool required;
  bool directory;
  bool packaged;
};

// Standard template project layout.
constexpr LayoutEntry kLayout[] = {
    {"kfp", true, true, true},          {"kserve", true, true, true},
    {"template", true, true, true},     {"common", false, true, true},
    {"third_party", false, true, true}, {"data", false, true, false},
    {"examples", false, true, false},   {"hack", false, true, false},
    {"research", false, true, false},   {"pretrained", false, true, false},
    {"Makefile", false, false, false},
};

bool is_packaged_path(const std::string& p) {
  return p == kManifestPath || p == kPipelinePath || p == kServingPath || p.rfind("common/", 0) == 0 ||
         p.rfind("third_party/", 0) == 0;
}

json parse_file(const std::string& text, const std::string& source, ValidationReport::FileStatus& status,
                std::vector<std::string>& diagnostics) {
  try {
    auto doc = parse_yaml(text, source);
    status.status = "ok";
    return doc;
  } catch (const Error& e) {
    status.status = "parse-error";
    status.message = e.what();
    if (!e.detail().empty() && e.detail()[0].contains("line")) status.line = e.detail()[0]["line"];
    diagnostics.push_back(e.what());
    return nullptr;
  }
}

std::vector<TarEntry> collect_entries(const fs::path& root) {
  std::vector<TarEntry> entries;
  for (const char* top : {"template", "kfp", "kserve", "common", "third_party"}) {
    const auto dir = root / top;
    if (!fs::is_directory(dir)) continue;
    for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) {
      if (!it->is_regular_file()) continue;
      auto rel = fs::relative(it->path(), root).generic_string();
      if (is_packaged_path(rel)) entries.push_back({rel, read_file(it->path())});
    }
  }
  return entries;
}

}  // namespace

json ValidationReport::to_json() const {
  json j = {{"ok", ok}, {"entries", json::array()}, {"files", json::array()}, {"diagnostics", diagnostics}};
  for (const auto& e : entries) {
    j["entries"].push_back(
        {{"name", e.name}, {"required", e.required}, {"directory", e.directory}, {"present", e.present}});
  }
  for (const auto& f : files) {
    json fj = {{"path", f.path}, {"status", f.status}};
    if (!f.message.empty()) fj["message"] = f.message;
    if (f.line) fj["line"] = f.line;
    j["files"].push_back(std::move(fj));
  }
  return j;
}

TemplateBundle parse_bundle(const std::string& manifest_yaml, const std::string& pipeline_yaml,
                            const std::string& serving_yaml, std::vector<std::string>& diagnostics) {
  TemplateBundle b;
  b.manifest = manifest_from_json(parse_yaml(manifest_yaml, kManifestPath), kManifestPath, diagnostics);
  b.pipeline = pipeline_from_json(parse_yaml(pipeline_yaml, kPipelinePath), kPipelinePath, diagnostics);
  b.serving = serving_from_json(parse_yaml(serving_yaml, kServingPath), kServingPath, diagnostics);
  cross_validate(b, diagnostics);
  return b;
}

ValidationReport validate_layout(const fs::path& project_dir) {
  std::error_code ec;
  if (!fs::is_directory(project_dir, ec)) {
    fail(ErrorCode::kNotFound, "io", "cannot read project directory " + project_dir.string());
  }
  ValidationReport report;
  bool all_required = true;
  for (const auto& e : kLayout) {
    const auto p = project_dir / e.name;
    const bool present = e.directory ? fs::is_directory(p) : fs::is_regular_file(p);
    report.entries.push_back({e.name, e.required, e.directory, present});
    if (e.required && !present) {
      all_required = false;
      report.diagnostics.push_back("missing required " + std::string(e.directory ? "folder" : "file") + " '" +
                                   e.name + "'");
    }
  }

  json docs[3];
  const char* paths[3] = {kManifestPath, kPipelinePath, kServingPath};
  bool parsed = true;
  for (int i = 0; i < 3; ++i) {
    ValidationReport::FileStatus status{paths[i], "missing", "", 0};
    const auto p = project_dir / paths[i];
    if (!fs::is_regular_file(p)) {
      report.diagnostics.push_back("missing required file '" + std::string(paths[i]) + "'");
      parsed = false;
    } else {
      docs[i] = parse_file(read_file(p), paths[i], status, report.diagnostics);
      parsed = parsed && status.status == "ok";
    }
    report.files.push_back(std::move(status));
  }

  if (parsed) {
    TemplateBundle b;
    std::vector<std::string> per_file[3];
    b.manifest = manifest_from_json(docs[0], kManifestPath, per_file[0]);
    b.pipeline = pipeline_from_json(docs[1], kPipelinePath, per_file[1]);
    b.serving = serving_from_json(docs[2], kServingPath, per_file[2]);
    for (int i = 0; i < 3; ++i) {
      if (!per_file[i].empty()) {
        report.files[i].status = "invalid";
        report.files[i].message = per_file[i].front();
        report.diagnostics.insert(report.diagnostics.end(), per_file[i].begin(), per_file[i].end());
      }
    }
    std::vector<std::string> cross;
    cross_validate(b, cross);
    report.diagnostics.insert(report.diagnostics.end(), cross.begin(), cross.end());
  }
  report.ok = all_required && parsed && report.diagnostics.empty();
  return report;
}

TemplateArchive package(const fs::path& project_dir) {
  auto report = validate_layout(project_dir);
  if (!report.ok) {
    fail(ErrorCode::kValidation, "invalid-template",
         "template project is invalid: " +
             (report.diagnostics.empty() ? std::string("see report") : report.diagnostics.front()),
         report.to_json());
  }
  const std::string tar = tar_write(collect_entries(project_dir));
  TemplateArchive archive;
  archive.digest = sha256_hex(tar);
  archive.bytes = gzip_compress(tar);
  std::vector<std::string> diags;
  archive.manifest = manifest_from_json(parse_yaml(read_file(project_dir / kManifestPath), kManifestPath),
                                        kManifestPath, diags);
  return archive;
}

namespace {

std::vector<TarEntry> verified_entries(const TemplateArchive& archive) {
  const std::string tar = gzip_decompress(archive.bytes);
  if (sha256_hex(tar) != archive.digest) {
    fail(ErrorCode::kIntegrity, "digest-mismatch", "template archive digest mismatch",
         {{{"expected", archive.digest}}});
  }
  auto entries = tar_read(tar);
  for (const auto& e : entries) {
    if (!is_safe_relative_path(e.path)) {
      fail(ErrorCode::kValidation, "security", "archive entry escapes the template root: " + e.path,
           {{{"entry", e.path}}});
    }
    if (!is_packaged_path(e.path)) {
      fail(ErrorCode::kValidation, "invalid-archive", "unexpected archive entry " + e.path,
           {{{"entry", e.path}}});
    }
  }
  for (const char* required : {kManifestPath, kPipelinePath, kServingPath}) {
    if (std::none_of(entries.begin(), entries.end(), [&](const TarEntry& e) { return e.path == required; })) {
      fail(ErrorCode::kValidation, "invalid-archive", std::string("archive lacks ") + required);
    }
  }
  return entries;
}

const std::string& entry_data(const std::vector<TarEntry>& entries, const char* path) {
  for (const auto& e : entries) {
    if (e.path == path) return e.data;
  }
  fail(ErrorCode::kValidation, "invalid-archive", std::string("archive lacks ") + path);
}

}  // namespace

TemplateManifest unpack(const TemplateArchive& archive, const fs::path& dest_dir) {
  const auto entries = verified_entries(archive);
  for (const auto& e : entries) {
    const auto target = (dest_dir / e.path).lexically_normal();
    auto rel = target.lexically_relative(dest_dir.lexically_normal());
    if (rel.empty() || *rel.begin() == "..") {
      fail(ErrorCode::kValidation, "security", "tar entry escapes destination: " + e.path);
    }
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    out.write(e.data.data(), static_cast<std::streamsize>(e.data.size()));
    if (!out) fail(ErrorCode::kInternal, "io", "cannot write " + target.string());
  }
  std::vector<std::string> diags;
  return manifest_from_json(parse_yaml(entry_data(entries, kManifestPath), kManifestPath), kManifestPath,
                            diags);
}

TemplateBundle read_bundle(const TemplateArchive& archive) {
  const auto entries = verified_entries(archive);
  std::vector<std::string> diags;
  auto bundle = parse_bundle(entry_data(entries, kManifestPath), entry_data(entries, kPipelinePath),
                             entry_data(entries, kServingPath), diags);
  if (!diags.empty()) {
    fail(ErrorCode::kValidation, "invalid-template", "archived template is invalid: " + diags.front(), diags);
  }
  return bundle;
}

TemplateArchive archive_from_bytes(std::string bytes) {
  TemplateArchive archive;
  try {
    archive.digest = sha256_hex(gzip_decompress(bytes));
  } catch (const Error& e) {
    // Uploaded bytes that are not an archive are the caller's mistake.
    fail(ErrorCode::kValidation, "invalid-archive", std::string("not a template archive: ") + e.what());
  }
  archive.bytes = std::move(bytes);
  archive.manifest = read_bundle(archive).manifest;
  return archive;
}

void scaffold_project(const fs::path& dir, const std::string& name) {
  if (!valid_template_name(name)) {
    fail(ErrorCode::kValidation, "invalid-name", "template name must match [a-z][a-z0-9-]{1,62}");
  }
  if (fs::exists(dir / kManifestPath)) {
    fail(ErrorCode::kConflict, "exists", "a template project already exists at " + dir.string());
  }
  for (const auto& e : kLayout) {
    if (e.directory) fs::create_directories(dir / e.name);
  }
  for (const char* keep : {"common", "third_party", "data", "examples", "hack", "research", "pretrained"}) {
    write_file_atomic(dir / keep / ".keep", "");
  }
  write_file_atomic(dir / kManifestPath,
                    "name: " + name +
                        "\n"
                        "version: 0.1.0\n"
                        "description: Hello-world template predicting the most frequent label.\n"
                        "inputs:\n"
                        "  - name: text\n"
                        "    kind: text\n"
                        "    required: true\n"
                        "output:\n"
                        "  kind: class-label\n"
                        "  label_set: [\"yes\", \"no\"]\n"
                        "params:\n"
                        "  - name: train_ratio\n"
                        "    type: float\n"
                        "    default: 0.8\n"
                        "    description: Fraction of rows used for training.\n"
                        "  - name: seed\n"
                        "    type: int\n"
                        "    default: 17\n"
                        "    description: Shuffle seed.\n"
                        "resources:\n"
                        "  cpu_millis: 100\n"
                        "  memory_mb: 64\n"
                        "approval_required: true\n");
  write_file_atomic(dir / kPipelinePath,
                    "steps:\n"
                    "  - name: load\n"
                    "    op: connector.load\n"
                    "    inputs: [dataset]\n"
                    "    outputs: [table]\n"
                    "  - name: split\n"
                    "    op: split.holdout\n"
                    "    params: {ratio: \"${train_ratio}\", seed: \"${seed}\"}\n"
                    "    inputs: [table]\n"
                    "    outputs: [train, holdout]\n"
                    "  - name: train\n"
                    "    op: train.majority\n"
                    "    inputs: [train, holdout]\n"
                    "    outputs: [model]\n"
                    "  - name: eval\n"
                    "    op: eval.classification\n"
                    "    inputs: [model, holdout]\n"
                    "    outputs: [report]\n");
  write_file_atomic(dir / kServingPath, "model_kind: majority\nartifact: model\n");
  write_file_atomic(dir / "hack" / "README.md", "Local experiments; not packaged.\n");
  write_file_atomic(dir / "Makefile",
                    "package:\n\tmodelforge template package . --out $(notdir $(CURDIR)).tmpl.tgz\n"
                    "validate:\n\tmodelforge template validate .\n");
}

}  // namespace modelforge::tmpl
