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

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "modelforge/common/scheduler.h"
#include "modelforge/connectors/snapshot.h"

namespace modelforge::connectors {

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };

struct Condition {
  std::string field;
  CompareOp op = CompareOp::kEq;
  std::string literal;
  bool numeric = false;  // literal was written as a number
};

// Conjunction of `field op literal` terms, e.g. `site = "A" AND cost <= 500`.
// Operators: = != ≠ < <= ≤ > >= ≥; conjunctions: AND, and, &&.
struct RowFilter {
  std::vector<Condition> conditions;
  std::string text;

  static RowFilter parse(std::string_view text);
  // `get` returns the cell for a field name.
  template <typename Getter>
  bool matches(Getter&& get) const {
    for (const auto& c : conditions) {
      if (!evaluate(c, get(c.field))) return false;
    }
    return true;
  }
  static bool evaluate(const Condition& c, std::string_view cell);
};

struct TimeWindow {
  std::string field;
  std::int64_t days = 0;
};

enum class ConnectorKind { kCsvFile, kJsonlFile, kHttpCsv };

struct ConnectorSpec {
  ConnectorKind kind = ConnectorKind::kCsvFile;
  std::string location;
  std::vector<std::pair<std::string, std::string>> select;  // source field -> dataset field
  std::optional<RowFilter> row_filter;
  std::optional<TimeWindow> time_window;
  std::map<std::string, std::string> headers;  // http-csv pass-through

  // Throws Error(kValidation, "connector") listing offending fields.
  static ConnectorSpec from_json(const json& doc);
  json to_json() const;
};

// Reads the source, keeps rows passing the filter and window, projects the
// selected columns into `schema` order and validates cells. A row with an
// unparseable cell is dropped and counted; the fetch fails when more than
// half of the source rows are rejected.
DatasetSnapshot fetch(const ConnectorSpec& spec, const std::vector<Field>& schema, Timestamp as_of);

// Per-model periodic fetch registrations on a shared Scheduler.
class FetchSchedule {
 public:
  explicit FetchSchedule(Scheduler& scheduler) : scheduler_(scheduler) {}
  ~FetchSchedule();

  void schedule(const std::string& model_id, Timestamp start, Duration interval, Scheduler::Task on_tick);
  void cancel(const std::string& model_id);
  bool scheduled(const std::string& model_id) const;

 private:
  Scheduler& scheduler_;
  mutable std::mutex mu_;
  std::map<std::string, Scheduler::Handle> handles_;
};

}  // namespace modelforge::connectors
