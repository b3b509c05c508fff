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

#include "modelforge/connectors/connector.h"

#include <cmath>
#include <set>

#include "httplib.h"
#include "modelforge/common/csv.h"
#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"

namespace modelforge::connectors {
namespace {

struct SourceTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

SourceTable read_csv_text(const std::string& text) {
  auto rows = csv::parse(text);
  SourceTable t;
  if (rows.empty()) return t;
  t.header = std::move(rows[0]);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() == 1 && rows[i][0].empty() && t.header.size() != 1) continue;
    t.rows.push_back(std::move(rows[i]));
  }
  return t;
}

std::string json_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

SourceTable read_jsonl_text(const std::string& text, const std::vector<std::string>& wanted) {
  SourceTable t;
  t.header = wanted;
  std::set<std::string> seen;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::kValidation, "jsonl-parse", "line " + std::to_string(line_no) + ": " + e.what(),
           {{{"line", line_no}}});
    }
    if (!obj.is_object()) {
      fail(ErrorCode::kValidation, "jsonl-parse", "line " + std::to_string(line_no) + " is not an object",
           {{{"line", line_no}}});
    }
    std::vector<std::string> row;
    for (const auto& f : wanted) {
      if (obj.contains(f)) {
        seen.insert(f);
        row.push_back(json_cell(obj[f]));
      } else {
        row.emplace_back();
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (!t.rows.empty()) {
    // Columns that never appear are reported like a missing CSV column.
    std::vector<std::string> present;
    for (const auto& f : wanted) {
      if (seen.count(f)) present.push_back(f);
    }
    if (present.size() != wanted.size()) {
      for (const auto& f : wanted) {
        if (!seen.count(f)) {
          fail(ErrorCode::kValidation, "missing-column", "source has no field '" + f + "'", {{{"field", f}}});
        }
      }
    }
  }
  return t;
}

std::string http_get(const std::string& url, const std::map<std::string, std::string>& headers) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    fail(ErrorCode::kValidation, "connector", "http-csv supports http:// URLs only: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string host = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(host);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Get(path, h);
  if (!res) {
    fail(ErrorCode::kValidation, "unreachable",
         "source " + url + " is unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail(ErrorCode::kValidation, "unreachable", "source " + url + " answered HTTP " + std::to_string(res->status));
  }
  return res->body;
}

int index_of(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

RowFilter RowFilter::parse(std::string_view text) {
  RowFilter f;
  f.text = std::string(text);
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  auto bad = [&](const std::string& msg) -> void {
    fail(ErrorCode::kValidation, "row-filter", "invalid row filter '" + f.text + "': " + msg,
         {{{"field", "connector.row_filter"}, {"message", msg}}});
  };
  while (true) {
    skip_ws();
    Condition c;
    std::size_t start = i;
    while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' || text[i] == '-' ||
                               text[i] == '.')) {
      ++i;
    }
    if (i == start) bad("expected a field name at offset " + std::to_string(start));
    c.field = std::string(text.substr(start, i - start));
    skip_ws();
    static const std::pair<std::string_view, CompareOp> kOps[] = {
        {"<=", CompareOp::kLe}, {">=", CompareOp::kGe}, {"!=", CompareOp::kNe}, {"==", CompareOp::kEq},
        {"≤", CompareOp::kLe},  {"≥", CompareOp::kGe},  {"≠", CompareOp::kNe},  {"=", CompareOp::kEq},
        {"<", CompareOp::kLt},  {">", CompareOp::kGt},
    };
    bool found = false;
    for (const auto& [tok, op] : kOps) {
      if (text.substr(i, tok.size()) == tok) {
        c.op = op;
        i += tok.size();
        found = true;
        break;
      }
    }
    if (!found) bad("expected a comparison operator after '" + c.field + "'");
    skip_ws();
    if (i < text.size() && (text[i] == '"' || text[i] == '\'')) {
      const char q = text[i++];
      std::string lit;
      while (i < text.size() && text[i] != q) lit.push_back(text[i++]);
      if (i >= text.size()) bad("unterminated string literal");
      ++i;
      c.literal = lit;
    } else {
      start = i;
      while (i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != '&') ++i;
      c.literal = std::string(text.substr(start, i - start));
      if (c.literal.empty()) bad("expected a literal after the operator");
      c.numeric = parse_number(c.literal).has_value();
    }
    f.conditions.push_back(std::move(c));
    skip_ws();
    if (i >= text.size()) break;
    if (text.substr(i, 3) == "AND" || text.substr(i, 3) == "and") {
      i += 3;
    } else if (text.substr(i, 2) == "&&") {
      i += 2;
    } else {
      bad("only conjunctions (AND) are supported");
    }
  }
  return f;
}

bool RowFilter::evaluate(const Condition& c, std::string_view cell) {
  int cmp;
  if (c.numeric) {
    auto v = parse_number(cell);
    auto lit = parse_number(c.literal);
    if (!v) return c.op == CompareOp::kNe;
    cmp = *v < *lit ? -1 : (*v > *lit ? 1 : 0);
  } else {
    auto r = cell.compare(c.literal);
    cmp = r < 0 ? -1 : (r > 0 ? 1 : 0);
  }
  switch (c.op) {
    case CompareOp::kEq: return cmp == 0;
    case CompareOp::kNe: return cmp != 0;
    case CompareOp::kLt: return cmp < 0;
    case CompareOp::kLe: return cmp <= 0;
    case CompareOp::kGt: return cmp > 0;
    case CompareOp::kGe: return cmp >= 0;
  }
  return false;
}

ConnectorSpec ConnectorSpec::from_json(const json& doc) {
  json issues = json::array();
  auto bad = [&](const std::string& field, const std::string& msg) {
    issues.push_back({{"field", "connector." + field}, {"message", msg}});
  };
  ConnectorSpec s;
  if (!doc.is_object()) fail(ErrorCode::kValidation, "connector", "connector must be an object");
  const std::string kind = doc.value("kind", "");
  if (kind == "csv-file") {
    s.kind = ConnectorKind::kCsvFile;
  } else if (kind == "jsonl-file") {
    s.kind = ConnectorKind::kJsonlFile;
  } else if (kind == "http-csv") {
    s.kind = ConnectorKind::kHttpCsv;
  } else {
    bad("kind", "must be one of csv-file, jsonl-file, http-csv");
  }
  if (doc.contains("location") && doc["location"].is_string() && !doc["location"].get<std::string>().empty()) {
    s.location = doc["location"].get<std::string>();
  } else {
    bad("location", "must be a non-empty path or URL");
  }
  if (doc.contains("select")) {
    std::set<std::string> targets;
    if (!doc["select"].is_array()) {
      bad("select", "must be a list of {source, field}");
    } else {
      for (const auto& m : doc["select"]) {
        if (!m.is_object() || !m.contains("source") || !m.contains("field") || !m["source"].is_string() ||
            !m["field"].is_string()) {
          bad("select", "entries need string 'source' and 'field'");
          continue;
        }
        if (!targets.insert(m["field"].get<std::string>()).second) {
          bad("select", "input field '" + m["field"].get<std::string>() + "' mapped twice");
        }
        s.select.emplace_back(m["source"].get<std::string>(), m["field"].get<std::string>());
      }
    }
  }
  if (doc.contains("row_filter") && !doc["row_filter"].is_null()) {
    if (!doc["row_filter"].is_string()) {
      bad("row_filter", "must be a string expression");
    } else {
      try {
        s.row_filter = RowFilter::parse(doc["row_filter"].get<std::string>());
      } catch (const Error& e) {
        bad("row_filter", e.what());
      }
    }
  }
  if (doc.contains("time_window") && !doc["time_window"].is_null()) {
    const auto& w = doc["time_window"];
    if (!w.is_object() || !w.contains("field") || !w["field"].is_string()) {
      bad("time_window", "needs a timestamp 'field'");
    } else if (!w.contains("days") || !w["days"].is_number_integer() || w["days"].get<std::int64_t>() <= 0) {
      bad("time_window.days", "window_days must be a positive integer");
    } else {
      s.time_window = TimeWindow{w["field"].get<std::string>(), w["days"].get<std::int64_t>()};
    }
  }
  if (doc.contains("headers") && doc["headers"].is_object()) {
    for (auto it = doc["headers"].begin(); it != doc["headers"].end(); ++it) {
      if (it->is_string()) s.headers[it.key()] = it->get<std::string>();
    }
  }
  if (!issues.empty()) {
    fail(ErrorCode::kValidation, "connector",
         "invalid connector: " + issues[0]["field"].get<std::string>() + " " + issues[0]["message"].get<std::string>(),
         issues);
  }
  return s;
}

json ConnectorSpec::to_json() const {
  static const char* kKinds[] = {"csv-file", "jsonl-file", "http-csv"};
  json j = {{"kind", kKinds[static_cast<int>(kind)]}, {"location", location}, {"select", json::array()}};
  for (const auto& [src, field] : select) j["select"].push_back({{"source", src}, {"field", field}});
  if (row_filter) j["row_filter"] = row_filter->text;
  if (time_window) j["time_window"] = {{"field", time_window->field}, {"days", time_window->days}};
  if (!headers.empty()) j["headers"] = headers;
  return j;
}

DatasetSnapshot fetch(const ConnectorSpec& spec, const std::vector<Field>& schema, Timestamp as_of) {
  std::vector<std::string> wanted;
  for (const auto& [src, field] : spec.select) wanted.push_back(src);
  if (spec.row_filter) {
    for (const auto& c : spec.row_filter->conditions) wanted.push_back(c.field);
  }
  if (spec.time_window) wanted.push_back(spec.time_window->field);

  SourceTable table;
  switch (spec.kind) {
    case ConnectorKind::kCsvFile: {
      if (!fs::exists(spec.location)) {
        fail(ErrorCode::kValidation, "unreachable", "source file " + spec.location + " does not exist");
      }
      table = read_csv_text(read_file(spec.location));
      break;
    }
    case ConnectorKind::kJsonlFile: {
      if (!fs::exists(spec.location)) {
        fail(ErrorCode::kValidation, "unreachable", "source file " + spec.location + " does not exist");
      }
      table = read_jsonl_text(read_file(spec.location), wanted);
      break;
    }
    case ConnectorKind::kHttpCsv:
      table = read_csv_text(http_get(spec.location, spec.headers));
      break;
  }

  for (const auto& name : wanted) {
    if (index_of(table.header, name) < 0) {
      fail(ErrorCode::kValidation, "missing-column", "source has no column '" + name + "'", {{{"field", name}}});
    }
  }

  // Project: schema order, each field fed by its select mapping.
  std::vector<int> source_index(schema.size(), -1);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    for (const auto& [src, field] : spec.select) {
      if (field == schema[i].name) source_index[i] = index_of(table.header, src);
    }
    if (source_index[i] < 0) {
      fail(ErrorCode::kValidation, "missing-column", "no source mapped to field '" + schema[i].name + "'",
           {{{"field", schema[i].name}}});
    }
  }

  DatasetSnapshot snap;
  snap.schema = schema;
  snap.fetched_at = as_of;
  const int window_col = spec.time_window ? index_of(table.header, spec.time_window->field) : -1;
  const Timestamp window_start = spec.time_window ? as_of - spec.time_window->days * kDay : 0;
  std::size_t rejected = 0;
  for (const auto& row : table.rows) {
    auto cell = [&](int idx) -> std::string_view {
      return idx >= 0 && static_cast<std::size_t>(idx) < row.size() ? std::string_view(row[idx]) : std::string_view();
    };
    if (row.size() != table.header.size()) {
      ++rejected;
      continue;
    }
    if (spec.row_filter &&
        !spec.row_filter->matches([&](const std::string& f) { return cell(index_of(table.header, f)); })) {
      continue;
    }
    if (window_col >= 0) {
      auto ts = parse_rfc3339(cell(window_col));
      if (!ts) {
        ++rejected;
        continue;
      }
      if (*ts < window_start || *ts > as_of) continue;
    }
    std::vector<std::string> out;
    bool ok = true;
    for (std::size_t i = 0; i < schema.size() && ok; ++i) {
      auto v = cell(source_index[i]);
      if ((schema[i].required && v.empty()) || (!v.empty() && !cell_parses(schema[i].kind, v)) ||
          (v.empty() && (schema[i].kind == tmpl::FieldKind::kNumeric ||
                         schema[i].kind == tmpl::FieldKind::kTimestamp))) {
        ok = false;
        break;
      }
      out.emplace_back(v);
    }
    if (!ok) {
      ++rejected;
      continue;
    }
    snap.rows.push_back(std::move(out));
  }
  snap.rows_rejected = rejected;
  if (!table.rows.empty() && rejected * 2 > table.rows.size()) {
    fail(ErrorCode::kValidation, "bad-data",
         std::to_string(rejected) + " of " + std::to_string(table.rows.size()) +
             " source rows failed to parse (limit is half)",
         {{{"rows_rejected", rejected}, {"rows_total", table.rows.size()}}});
  }
  snap.digest = snapshot_digest(snap);
  return snap;
}

FetchSchedule::~FetchSchedule() {
  std::lock_guard lock(mu_);
  for (const auto& [id, h] : handles_) scheduler_.cancel(h);
}

void FetchSchedule::schedule(const std::string& model_id, Timestamp start, Duration interval,
                             Scheduler::Task on_tick) {
  std::lock_guard lock(mu_);
  if (auto it = handles_.find(model_id); it != handles_.end()) scheduler_.cancel(it->second);
  handles_[model_id] = scheduler_.every(start, interval, std::move(on_tick));
}

void FetchSchedule::cancel(const std::string& model_id) {
  std::lock_guard lock(mu_);
  if (auto it = handles_.find(model_id); it != handles_.end()) {
    scheduler_.cancel(it->second);
    handles_.erase(it);
  }
}

bool FetchSchedule::scheduled(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  return handles_.count(model_id) > 0;
}

}  // namespace modelforge::connectors
