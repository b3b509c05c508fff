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

#include <algorithm>

#include "doctest.h"
#include "modelforge/common/archive.h"
#include "modelforge/common/digest.h"
#include "modelforge/common/error.h"
#include "modelforge/common/random.h"
#include "modelforge/common/yaml.h"
#include "modelforge/template/config.h"
#include "support/support.h"

using namespace modelforge;
using namespace modelforge::tmpl;
using mftest::TempDir;

namespace {

void copy_project(const fs::path& from, const fs::path& to) {
  fs::copy(from, to, fs::copy_options::recursive);
}

std::string rewrite(const fs::path& p, const std::string& from, const std::string& to) {
  auto text = read_file(p);
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  write_file_atomic(p, text);
  return text;
}

// Renames one ustar entry in place and fixes its header checksum.
std::string patch_name(std::string tar, const std::string& from, const std::string& to) {
  std::size_t h = 0;
  while (h < tar.size() && tar.compare(h, from.size() + 1, from + '\0') != 0) h += 512;
  REQUIRE(h < tar.size());
  std::fill(tar.begin() + h, tar.begin() + h + 100, '\0');
  std::copy(to.begin(), to.end(), tar.begin() + h);
  std::fill(tar.begin() + h + 148, tar.begin() + h + 156, ' ');
  unsigned sum = 0;
  for (std::size_t i = h; i < h + 512; ++i) sum += static_cast<unsigned char>(tar[i]);
  char buf[8];
  std::snprintf(buf, sizeof buf, "%06o", sum);
  std::copy(buf, buf + 6, tar.begin() + h + 148);
  tar[h + 154] = '\0';
  return tar;
}

TemplateManifest five_param_manifest() {
  std::vector<std::string> diags;
  auto m = manifest_from_json(parse_yaml(R"(name: merge-fixture
version: 1.0.0
description: five parameters
inputs:
  - {name: text, kind: text, required: true}
output: {kind: class-label, label_set: [a, b]}
params:
  - {name: alpha, type: float, default: 1.0}
  - {name: window_days, type: int, default: 30}
  - {name: target_column, type: string, required: true}
  - {name: mode, type: enum, enum_values: [fast, slow]}
  - {name: verbose, type: bool}
resources: {cpu_millis: 100, memory_mb: 64}
)",
                                         "m.yaml"),
                              "m.yaml", diags);
  REQUIRE(diags.empty());
  return m;
}

ModelConfig base_config() {
  ModelConfig c;
  c.template_ref = "merge-fixture@1.0.0";
  c.inputs = {{"text", "description"}};
  c.output = "label";
  return c;
}

}  // namespace

TEST_CASE("shipped templates validate") {
  for (const char* name : {"fcr", "similarity", "approval"}) {
    CAPTURE(name);
    const auto report = validate_layout(mftest::template_dir(name));
    CHECK(report.ok);
    CHECK(report.diagnostics.empty());
  }
}

TEST_CASE("scaffolded project is valid and packages") {
  TempDir tmp;
  scaffold_project(tmp / "hello", "hello");
  const auto report = validate_layout(tmp / "hello");
  CHECK(report.ok);
  for (const auto& e : report.entries) CHECK(e.present);
  CHECK_NOTHROW(package(tmp / "hello"));
  CHECK_THROWS_AS(scaffold_project(tmp / "hello", "hello"), Error);
  CHECK_THROWS_AS(scaffold_project(tmp / "x", "Bad Name"), Error);
}

TEST_CASE("missing serving spec is reported by name") {
  TempDir tmp;
  scaffold_project(tmp / "p", "p-one");
  fs::remove(tmp / "p" / kServingPath);
  const auto report = validate_layout(tmp / "p");
  CHECK_FALSE(report.ok);
  const bool named = std::any_of(report.diagnostics.begin(), report.diagnostics.end(),
                                 [](const std::string& d) { return d.find("kserve/serving.yaml") != std::string::npos; });
  CHECK(named);
  fs::remove_all(tmp / "p" / "kserve");
  const auto r2 = validate_layout(tmp / "p");
  const auto kserve = std::find_if(r2.entries.begin(), r2.entries.end(), [](auto& e) { return e.name == "kserve"; });
  REQUIRE(kserve != r2.entries.end());
  CHECK_FALSE(kserve->present);
  CHECK_THROWS_AS(validate_layout(tmp / "nope"), Error);
}

TEST_CASE("dangling parameter reference fails validation") {
  TempDir tmp;
  copy_project(mftest::template_dir("similarity"), tmp / "s");
  rewrite(tmp / "s" / kPipelinePath, "\"${time_window_days}\"", "\"${window_days}\"");
  const auto report = validate_layout(tmp / "s");
  CHECK_FALSE(report.ok);
  const bool dangling = std::any_of(report.diagnostics.begin(), report.diagnostics.end(), [](const std::string& d) {
    return d.find("dangling") != std::string::npos && d.find("window_days") != std::string::npos;
  });
  CHECK(dangling);
}

TEST_CASE("malformed yaml reports file and line") {
  TempDir tmp;
  copy_project(mftest::template_dir("fcr"), tmp / "f");
  write_file_atomic(tmp / "f" / kManifestPath, "name: fcr\nversion: [1.0\n");
  const auto report = validate_layout(tmp / "f");
  CHECK_FALSE(report.ok);
  CHECK(report.files[0].status == "parse-error");
  CHECK(report.files[0].line > 0);
}

TEST_CASE("cross validation catches artifact flow and unknown ops") {
  std::vector<std::string> d;
  TemplateBundle b;
  b.manifest = five_param_manifest();
  b.pipeline = pipeline_from_json(parse_yaml(R"(steps:
  - {name: a, op: connector.load, inputs: [dataset], outputs: [t]}
  - {name: b, op: train.magic, inputs: [missing], outputs: [model]}
)",
                                             "p"),
                                  "p", d);
  b.serving = {"nb-multinomial", "nowhere"};
  cross_validate(b, d);
  auto has = [&](const std::string& s) {
    return std::any_of(d.begin(), d.end(), [&](const std::string& x) { return x.find(s) != std::string::npos; });
  };
  CHECK(has("train.magic"));
  CHECK(has("missing"));
  CHECK(has("nowhere"));
}

TEST_CASE("packaging excludes local-only folders") {
  TempDir tmp;
  copy_project(mftest::template_dir("fcr"), tmp / "f");
  fs::create_directories(tmp / "f" / "hack");
  write_file_atomic(tmp / "f" / "hack" / "notes.txt", "scratch");
  write_file_atomic(tmp / "f" / "common" / "util.txt", "shared");
  write_file_atomic(tmp / "f" / "examples" / "e.csv", "x");
  const auto archive = package(tmp / "f");
  const auto entries = tar_read(gzip_decompress(archive.bytes));
  for (const auto& e : entries) {
    const bool allowed = e.path.rfind("template/", 0) == 0 || e.path.rfind("kfp/", 0) == 0 ||
                         e.path.rfind("kserve/", 0) == 0 || e.path.rfind("common/", 0) == 0 ||
                         e.path.rfind("third_party/", 0) == 0;
    CHECK_MESSAGE(allowed, e.path);
    CHECK(e.path.rfind("hack/", 0) != 0);
  }
  CHECK(std::any_of(entries.begin(), entries.end(), [](auto& e) { return e.path == "common/util.txt"; }));
}

TEST_CASE("packaging is deterministic and content-sensitive") {
  TempDir tmp;
  copy_project(mftest::template_dir("approval"), tmp / "a");
  const auto a1 = package(tmp / "a");
  const auto a2 = package(tmp / "a");
  CHECK(a1.digest == a2.digest);
  CHECK(a1.bytes == a2.bytes);
  CHECK(a1.digest == sha256_hex(gzip_decompress(a1.bytes)));

  // package . unpack . package is digest-idempotent.
  const auto m = unpack(a1, tmp / "u");
  CHECK(m.name == "approval");
  for (const char* d : {"data", "examples", "hack", "research", "pretrained"}) fs::create_directories(tmp / "u" / d);
  CHECK(package(tmp / "u").digest == a1.digest);

  rewrite(tmp / "a" / kManifestPath, "Approval recommendation.", "Approval recommendation!");
  CHECK(package(tmp / "a").digest != a1.digest);
}

TEST_CASE("unpack verifies integrity and confines paths") {
  TempDir tmp;
  auto archive = mftest::shipped_template("fcr");
  auto corrupt = archive;
  corrupt.digest[0] = corrupt.digest[0] == 'a' ? 'b' : 'a';
  try {
    unpack(corrupt, tmp / "x");
    FAIL("expected an integrity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIntegrity);
  }
  auto flipped = archive;
  flipped.bytes[flipped.bytes.size() / 2] ^= 0x40;
  CHECK_THROWS_AS(unpack(flipped, tmp / "y"), Error);

  std::vector<TarEntry> entries = tar_read(gzip_decompress(archive.bytes));
  entries.push_back({"common/aaaaaa", "boom"});
  std::string tar = tar_write(entries);
  tar = patch_name(tar, "common/aaaaaa", "../evil");
  TemplateArchive evil{gzip_compress(tar), sha256_hex(tar), archive.manifest};
  try {
    unpack(evil, tmp / "z");
    FAIL("expected a security error");
  } catch (const Error& e) {
    CHECK(e.kind() == "security");
  }
  CHECK_FALSE(fs::exists(tmp / "evil"));
}

TEST_CASE("merge_config examples") {
  const auto m = five_param_manifest();
  auto c = base_config();
  c.args = {{"target_column", "code"}};
  const auto r = merge_config(m, c);
  CHECK(r.values.at("window_days") == 30);
  CHECK(r.values.at("alpha") == 1.0);
  CHECK(r.values.at("mode").is_null());

  c.args["alpha"] = "x";
  try {
    merge_config(m, c);
    FAIL("expected type mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == "type-mismatch");
    CHECK(e.detail()[0]["field"] == "alpha");
  }

  c.args = json::object();
  try {
    merge_config(m, c);
    FAIL("expected missing-required");
  } catch (const Error& e) {
    CHECK(e.kind() == "missing-required");
    CHECK(std::string(e.what()).find("target_column") != std::string::npos);
  }

  c.args = {{"target_column", "code"}, {"bogus", 1}};
  CHECK_THROWS_AS(merge_config(m, c), Error);

  c.args = {{"target_column", "code"}};
  c.inputs.clear();
  try {
    merge_config(m, c);
    FAIL("expected missing input");
  } catch (const Error& e) {
    CHECK(e.kind() == "missing-input");
  }
}

TEST_CASE("merge_config of an empty config equals the defaults iff all required params have defaults") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    TemplateManifest m;
    m.name = "prop";
    m.version = "1.0.0";
    m.inputs = {{"text", FieldKind::kText, true}};
    m.output.kind = OutputKind::kRankedList;
    bool all_required_defaulted = true;
    const int n = 1 + static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i) {
      ConfigParamSpec p;
      p.name = "p" + std::to_string(i);
      p.type = ParamType::kInt;
      p.required = rng.below(2) == 1;
      if (rng.below(2) == 1) p.default_value = json(static_cast<int>(rng.below(100)));
      if (p.required && !p.default_value) all_required_defaulted = false;
      m.params.push_back(p);
    }
    ModelConfig c;
    c.inputs = {{"text", "t"}};
    bool ok = true;
    ResolvedConfig r;
    try {
      r = merge_config(m, c);
    } catch (const Error&) {
      ok = false;
    }
    CHECK(ok == all_required_defaulted);
    if (ok) {
      for (const auto& p : m.params) CHECK(r.values.at(p.name) == (p.default_value ? *p.default_value : json(nullptr)));
    }
  }
}

TEST_CASE("resources below the template minimum are rejected") {
  const auto m = five_param_manifest();
  auto c = base_config();
  c.args = {{"target_column", "code"}};
  c.resources = ResourceMinimums{50, 64};
  CHECK_THROWS_AS(merge_config(m, c), Error);
  c.resources = ResourceMinimums{200, 128};
  CHECK(merge_config(m, c).resources.cpu_millis == 200);
}

TEST_CASE("model config parsing rejects unknown keys") {
  CHECK_THROWS_AS(ModelConfig::from_json({{"template", "fcr"}, {"colour", "red"}}), Error);
  const auto c = ModelConfig::from_json(
      {{"template", "fcr@1.0.0"}, {"inputs", {{"description", "d"}}}, {"output", "code"}, {"retrain_interval", "1d"}});
  CHECK(c.retrain_interval == kDay);
  CHECK(ModelConfig::from_json(c.to_json()).to_json() == c.to_json());
}
