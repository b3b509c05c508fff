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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modelforge/common/time.h"
#include "modelforge/template/manifest.h"

namespace modelforge::store {
class Store;
struct ArtifactKey;
}  // namespace modelforge::store

namespace modelforge::connectors {

using nlohmann::json;

struct Field {
  std::string name;
  tmpl::FieldKind kind = tmpl::FieldKind::kCategorical;
  bool required = false;  // empty cells are rejected
  bool operator==(const Field&) const = default;
};

// Tabular client data in the platform's standard format. Cell values are
// kept as their source text after validation against the declared kind.
struct DatasetSnapshot {
  std::vector<Field> schema;
  std::vector<std::vector<std::string>> rows;
  std::string digest;
  Timestamp fetched_at = 0;
  std::size_t rows_rejected = 0;

  std::size_t row_count() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  // -1 when absent.
  int column(std::string_view name) const;
  json schema_json() const;
};

// Schema line (`name:kind` cells) followed by RFC 4180 rows, LF-terminated,
// UTF-8.
std::string canonical_bytes(const DatasetSnapshot& snapshot);
std::string snapshot_digest(const DatasetSnapshot& snapshot);
// Inverse of canonical_bytes; the digest is recomputed.
DatasetSnapshot parse_canonical(std::string_view bytes);

// True when `value` parses under `kind` (finite decimal for numeric,
// RFC 3339 for timestamps; any text otherwise).
bool cell_parses(tmpl::FieldKind kind, std::string_view value);
std::optional<double> parse_number(std::string_view value);

// Persists to bucket "datasets" as <model_id>/<digest>/{schema.json,data.csv}
// unless already present. Returns the key of data.csv.
store::ArtifactKey persist_snapshot(store::Store& store, const std::string& model_id,
                                    const DatasetSnapshot& snapshot);
DatasetSnapshot load_snapshot(const store::Store& store, const std::string& model_id, const std::string& digest);

}  // namespace modelforge::connectors
