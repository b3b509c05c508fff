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

#include <fstream>

#include "doctest.h"
#include "modelforge/common/error.h"
#include "modelforge/common/yaml.h"
#include "modelforge/store/store.h"
#include "support/support.h"

using namespace modelforge;
using namespace modelforge::store;
using mftest::TempDir;

namespace {

// The fcr project republished under another version.
tmpl::TemplateArchive fcr_version(const TempDir& tmp, const std::string& version) {
  const auto dir = tmp / ("fcr-" + version);
  if (!fs::exists(dir)) {
    fs::copy(mftest::template_dir("fcr"), dir, fs::copy_options::recursive);
    auto text = read_file(dir / tmpl::kManifestPath);
    text.replace(text.find("version: 1.0.0"), 14, "version: " + version);
    write_file_atomic(dir / tmpl::kManifestPath, text);
  }
  return tmpl::package(dir);
}

void flip_byte(const fs::path& p) {
  auto bytes = read_file(p);
  bytes[bytes.size() / 2] ^= 0x01;
  std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
}

}  // namespace

TEST_CASE("publish, list and resolve latest by semver") {
  TempDir tmp;
  VirtualClock clock(1000);
  Store s(tmp / "store", clock);
  CHECK(s.list_templates().empty());

  const auto r1 = s.publish(fcr_version(tmp, "1.0.0"));
  CHECK(r1.str() == "fcr@1.0.0");
  const auto r10 = s.publish(fcr_version(tmp, "1.10.0"));
  const auto r2 = s.publish(fcr_version(tmp, "1.2.0"));
  s.publish(fcr_version(tmp, "2.0.0-rc.1"));
  s.publish(mftest::shipped_template("approval"));

  const auto all = s.list_templates();
  REQUIRE(all.size() == 5);
  CHECK(all[0].ref.name == "approval");
  std::vector<std::string> fcr_versions;
  for (const auto& t : all) {
    if (t.ref.name == "fcr") fcr_versions.push_back(t.ref.version);
  }
  CHECK(fcr_versions == std::vector<std::string>{"2.0.0-rc.1", "1.10.0", "1.2.0", "1.0.0"});

  // "latest" is the greatest release by precedence; 1.10.0 > 1.2.0 numerically.
  CHECK(s.resolve("fcr", "latest").version == "2.0.0-rc.1");
  CHECK(s.resolve("fcr@1.2.0").digest == r2.digest);
  CHECK(s.resolve("fcr@1.10.0").digest == r10.digest);

  const auto only_fcr = s.list_templates(std::string("fcr"));
  CHECK(only_fcr.size() == 4);

  try {
    s.publish(fcr_version(tmp, "1.0.0"));
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConflict);
  }
  CHECK(s.pull(r1).digest == r1.digest);
}

TEST_CASE("unknown refs are not found") {
  TempDir tmp;
  VirtualClock clock;
  Store s(tmp / "store", clock);
  try {
    s.resolve("nope", "latest");
    FAIL("expected not-found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
  CHECK_THROWS_AS(s.pull({"nope", "1.0.0", ""}), Error);
}

TEST_CASE("corrupted template blob fails integrity on pull") {
  TempDir tmp;
  VirtualClock clock;
  Store s(tmp / "store", clock);
  const auto ref = s.publish(mftest::shipped_template("similarity"));
  flip_byte(tmp / "store" / "templates" / "similarity" / "1.0.0" / "archive.tmpl.tgz");
  try {
    s.pull(ref);
    FAIL("expected integrity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIntegrity);
  }
}

TEST_CASE("artifacts are write-once and content-verified") {
  TempDir tmp;
  VirtualClock clock;
  Store s(tmp / "store", clock);
  const std::string bytes("\x00\x01model bytes\xff", 14);
  const auto key = s.put_artifact("runs", "m-1/model", bytes);
  CHECK(s.get_artifact(key) == bytes);
  try {
    s.put_artifact("runs", "m-1/model", "other");
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConflict);
  }
  try {
    s.get_artifact({"runs", "nope", ""});
    FAIL("expected not-found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }

  {
    Store reopened(tmp / "store", clock);
    CHECK(reopened.get_artifact(key) == bytes);
    CHECK(reopened.find_artifact("runs", "m-1/model") == key);
  }

  flip_byte(tmp / "store" / "artifacts" / "runs" / "m-1" / "model");
  try {
    s.get_artifact(key);
    FAIL("expected integrity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIntegrity);
  }
}

TEST_CASE("archived artifacts move under archive/ and the old key is retired") {
  TempDir tmp;
  VirtualClock clock;
  Store s(tmp / "store", clock);
  const auto key = s.put_artifact("runs", "m-1/model", "v1");
  const auto moved = s.move_to_archive(key);
  CHECK(moved.key.rfind("archive/", 0) == 0);
  CHECK(s.get_artifact(moved) == "v1");
  CHECK_FALSE(s.find_artifact("runs", "m-1/model"));
  CHECK_THROWS_AS(s.put_artifact("runs", "m-1/model", "again"), Error);
}

TEST_CASE("delete removes a version and latest falls back") {
  TempDir tmp;
  VirtualClock clock;
  Store s(tmp / "store", clock);
  s.publish(fcr_version(tmp, "1.0.0"));
  s.publish(fcr_version(tmp, "1.1.0"));
  CHECK(s.resolve("fcr", "latest").version == "1.1.0");
  s.delete_template("fcr", "1.1.0");
  CHECK(s.resolve("fcr", "latest").version == "1.0.0");
  CHECK_THROWS_AS(s.delete_template("fcr", "1.1.0"), Error);
}
