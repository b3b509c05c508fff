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

#include "modelforge/connectors/snapshot.h"

#include <charconv>
#include <cmath>

#include "modelforge/common/csv.h"
#include "modelforge/common/digest.h"
#include "modelforge/common/error.h"
#include "modelforge/store/store.h"

namespace modelforge::connectors {
namespace {

std::string row_line(const std::vector<std::string>& row) {
  // A lone empty cell would otherwise serialize as a blank line.
  if (row.size() == 1 && row[0].empty()) return "\"\"";
  return csv::format_row(row);
}

}  // namespace

int DatasetSnapshot::column(std::string_view name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

json DatasetSnapshot::schema_json() const {
  json fields = json::array();
  for (const auto& f : schema) {
    fields.push_back({{"name", f.name}, {"kind", tmpl::to_string(f.kind)}, {"required", f.required}});
  }
  return {{"fields", fields},
          {"digest", digest},
          {"row_count", rows.size()},
          {"rows_rejected", rows_rejected},
          {"fetched_at", format_rfc3339(fetched_at)}};
}

std::string canonical_bytes(const DatasetSnapshot& s) {
  std::vector<std::string> header;
  for (const auto& f : s.schema) {
    header.push_back(f.name + ":" + std::string(tmpl::to_string(f.kind)) + (f.required ? "!" : ""));
  }
  std::string out = row_line(header) + "\n";
  for (const auto& row : s.rows) out += row_line(row) + "\n";
  return out;
}

std::string snapshot_digest(const DatasetSnapshot& s) { return sha256_hex(canonical_bytes(s)); }

DatasetSnapshot parse_canonical(std::string_view bytes) {
  auto rows = csv::parse(bytes);
  if (rows.empty()) fail(ErrorCode::kIntegrity, "snapshot", "snapshot has no schema line");
  DatasetSnapshot s;
  for (auto cell : rows[0]) {
    Field f;
    if (!cell.empty() && cell.back() == '!') {
      f.required = true;
      cell.pop_back();
    }
    auto colon = cell.rfind(':');
    if (colon == std::string::npos) fail(ErrorCode::kIntegrity, "snapshot", "bad schema cell " + cell);
    auto kind = tmpl::field_kind_from(cell.substr(colon + 1));
    if (!kind) fail(ErrorCode::kIntegrity, "snapshot", "bad field kind in " + cell);
    f.name = cell.substr(0, colon);
    f.kind = *kind;
    s.schema.push_back(std::move(f));
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != s.schema.size()) {
      fail(ErrorCode::kIntegrity, "snapshot", "row " + std::to_string(i) + " has wrong arity");
    }
    s.rows.push_back(std::move(rows[i]));
  }
  s.digest = snapshot_digest(s);
  return s;
}

std::optional<double> parse_number(std::string_view v) {
  if (v.empty()) return std::nullopt;
  if (v.front() == '+') v.remove_prefix(1);
  double d = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(d)) return std::nullopt;
  // from_chars accepts "inf"/"nan" spellings; isfinite rejects them above.
  return d;
}

bool cell_parses(tmpl::FieldKind kind, std::string_view value) {
  switch (kind) {
    case tmpl::FieldKind::kNumeric: return parse_number(value).has_value();
    case tmpl::FieldKind::kTimestamp: return parse_rfc3339(value).has_value();
    default: return true;
  }
}

store::ArtifactKey persist_snapshot(store::Store& store, const std::string& model_id, const DatasetSnapshot& s) {
  const std::string prefix = model_id + "/" + s.digest + "/";
  if (auto existing = store.find_artifact("datasets", prefix + "data.csv")) return *existing;
  std::vector<std::string> header;
  for (const auto& f : s.schema) header.push_back(f.name);
  std::string data = row_line(header) + "\n";
  for (const auto& row : s.rows) data += row_line(row) + "\n";
  if (!store.find_artifact("datasets", prefix + "schema.json")) {
    store.put_artifact("datasets", prefix + "schema.json", s.schema_json().dump(2));
  }
  return store.put_artifact("datasets", prefix + "data.csv", data);
}

DatasetSnapshot load_snapshot(const store::Store& store, const std::string& model_id, const std::string& digest) {
  const std::string prefix = model_id + "/" + digest + "/";
  auto schema_key = store.find_artifact("datasets", prefix + "schema.json");
  auto data_key = store.find_artifact("datasets", prefix + "data.csv");
  if (!schema_key || !data_key) {
    fail(ErrorCode::kNotFound, "snapshot-not-found", "dataset snapshot " + digest + " not found for " + model_id);
  }
  const auto meta = json::parse(store.get_artifact(*schema_key));
  auto rows = csv::parse(store.get_artifact(*data_key));
  DatasetSnapshot s;
  for (const auto& f : meta.at("fields")) {
    s.schema.push_back({f.at("name"), *tmpl::field_kind_from(f.at("kind").get<std::string>()),
                        f.value("required", false)});
  }
  for (std::size_t i = 1; i < rows.size(); ++i) s.rows.push_back(std::move(rows[i]));
  s.fetched_at = parse_rfc3339(meta.value("fetched_at", "")).value_or(0);
  s.rows_rejected = meta.value("rows_rejected", std::size_t{0});
  s.digest = snapshot_digest(s);
  if (s.digest != digest) fail(ErrorCode::kIntegrity, "digest-mismatch", "snapshot " + digest + " is corrupt");
  return s;
}

}  // namespace modelforge::connectors
