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
#include <string>
#include <vector>

#include "json.hpp"
#include "modelforge/template/manifest.h"

namespace modelforge::tmpl {

namespace fs = std::filesystem;

struct ValidationReport {
  struct Entry {
    std::string name;
    bool required = false;
    bool directory = true;
    bool present = false;
  };
  struct FileStatus {
    std::string path;
    std::string status;  // ok | missing | parse-error | invalid
    std::string message;
    int line = 0;
  };

  bool ok = false;
  std::vector<Entry> entries;
  std::vector<FileStatus> files;
  std::vector<std::string> diagnostics;

  json to_json() const;
};

// The immutable transportable unit: gzip'd canonical tar plus the SHA-256 of
// the uncompressed tar.
struct TemplateArchive {
  std::string bytes;
  std::string digest;
  TemplateManifest manifest;
};

constexpr const char* kManifestPath = "template/manifest.yaml";
constexpr const char* kPipelinePath = "kfp/pipeline.yaml";
constexpr const char* kServingPath = "kserve/serving.yaml";

// Throws Error(kNotFound, "io") when the directory cannot be read.
ValidationReport validate_layout(const fs::path& project_dir);

// Parses and cross-validates the three spec files from their text.
TemplateBundle parse_bundle(const std::string& manifest_yaml, const std::string& pipeline_yaml,
                            const std::string& serving_yaml, std::vector<std::string>& diagnostics);

// Throws Error(kValidation, "invalid-template") carrying the report as detail.
TemplateArchive package(const fs::path& project_dir);

// Verifies the digest, extracts into dest_dir and returns the manifest.
TemplateManifest unpack(const TemplateArchive& archive, const fs::path& dest_dir);

// Reads an archive from raw .tmpl.tgz bytes; the digest is computed from the
// content and the bundle validated.
TemplateArchive archive_from_bytes(std::string bytes);

// Decodes, verifies against archive.digest and cross-validates.
TemplateBundle read_bundle(const TemplateArchive& archive);

// Writes a boilerplate project following the standard folder layout with a
// minimal majority-class template.
void scaffold_project(const fs::path& project_dir, const std::string& name);

}  // namespace modelforge::tmpl
