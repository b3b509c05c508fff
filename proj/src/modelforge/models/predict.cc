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

#include "modelforge/models/predict.h"

#include <cmath>

#include "modelforge/common/error.h"
#include "modelforge/connectors/snapshot.h"

namespace modelforge::models {
namespace {

std::string required_field(const FieldGetter& get, const std::string& field) {
  auto v = get(field);
  if (!v) {
    fail(ErrorCode::kValidation, "missing-field", "request is missing field '" + field + "'",
         {{{"field", field}, {"message", "required"}}});
  }
  return *v;
}

std::string binding_string(const json& b, const char* key, const std::string& fallback = "") {
  return b.contains(key) && b[key].is_string() ? b[key].get<std::string>() : fallback;
}

std::int64_t binding_int(const json& b, const char* key, std::int64_t fallback) {
  return b.contains(key) && b[key].is_number_integer() ? b[key].get<std::int64_t>() : fallback;
}

}  // namespace

Output predict(const Model& model, const FieldGetter& get) {
  Output out;
  const auto& b = model.binding;
  switch (model.family) {
    case Family::kMajority: {
      out.label = majority_predict(model.majority());
      out.body = {{"label", *out.label}};
      break;
    }
    case Family::kNaiveBayes: {
      const auto text = required_field(get, binding_string(b, "text_field", "text"));
      const auto p = nb_predict(model.nb(), text);
      json scores = json::object();
      for (std::size_t c = 0; c < p.log_posteriors.size(); ++c) {
        scores[model.nb().classes[c]] = std::exp(p.log_posteriors[c]);
      }
      out.label = p.label;
      out.body = {{"label", p.label}, {"scores", scores}};
      break;
    }
    case Family::kLogReg: {
      const auto enc = TabularEncoder::from_json(b.at("encoder"));
      json bad = json::array();
      for (const auto& c : enc.columns) {
        auto v = get(c.field);
        if (!v) {
          bad.push_back({{"field", c.field}, {"message", "required"}});
        } else if (!c.categorical && !connectors::parse_number(*v)) {
          bad.push_back({{"field", c.field}, {"message", "must be a finite number"}});
        }
      }
      if (!bad.empty()) {
        fail(ErrorCode::kValidation, "invalid-request",
             "invalid field '" + bad[0]["field"].get<std::string>() + "': " + bad[0]["message"].get<std::string>(),
             bad);
      }
      std::map<std::string, std::string> cells;
      for (const auto& c : enc.columns) cells[c.field] = *get(c.field);
      const auto x = enc.encode([&](const std::string& f) -> std::string_view { return cells[f]; });
      const auto p = logreg_predict(model.logreg(), x);
      out.label = p.decision ? binding_string(b, "positive_label", "1") : binding_string(b, "negative_label", "0");
      out.body = {{"label", *out.label}, {"decision", p.decision}, {"score", p.score}};
      break;
    }
    case Family::kTfidf: {
      const auto& ix = model.tfidf();
      const auto text = required_field(get, binding_string(b, "text_field", "text"));
      std::optional<std::string> status = binding_string(b, "compare_to");
      if (auto v = get("compare_to")) status = *v;
      if (status && (status->empty() || *status == "any")) status.reset();
      std::int64_t days = binding_int(b, "time_window_days", 0);
      if (auto v = get("time_window_days")) {
        auto n = connectors::parse_number(*v);
        if (!n || *n < 0 || std::floor(*n) != *n) {
          fail(ErrorCode::kValidation, "invalid-request", "time_window_days must be a non-negative integer",
               {{{"field", "time_window_days"}, {"message", "must be a non-negative integer"}}});
        }
        days = static_cast<std::int64_t>(*n);
      }
      std::int64_t k = binding_int(b, "top_k", 5);
      if (auto v = get("top_k")) {
        auto n = connectors::parse_number(*v);
        if (!n || *n < 1 || std::floor(*n) != *n) {
          fail(ErrorCode::kValidation, "invalid-request", "top_k must be a positive integer",
               {{{"field", "top_k"}, {"message", "must be a positive integer"}}});
        }
        k = static_cast<std::int64_t>(*n);
      }
      std::optional<TimeFilter> window;
      if (days > 0) {
        Timestamp as_of = 0;
        for (const auto& d : ix.docs) as_of = std::max(as_of, d.timestamp);
        const auto ts_field = binding_string(b, "timestamp_field");
        if (auto v = ts_field.empty() ? std::nullopt : get(ts_field)) {
          auto t = parse_rfc3339(*v);
          if (!t) {
            fail(ErrorCode::kValidation, "invalid-request", "field '" + ts_field + "' must be an RFC 3339 timestamp",
                 {{{"field", ts_field}, {"message", "must be an RFC 3339 timestamp"}}});
          }
          as_of = *t;
        }
        window = TimeFilter{as_of, days};
      }
      json matches = json::array();
      for (const auto& m : tfidf_query(ix, text, static_cast<std::size_t>(k), status, window)) {
        matches.push_back({{"id", m.id}, {"score", m.score}});
      }
      out.body = {{"matches", matches}};
      break;
    }
  }
  return out;
}

std::vector<std::string> model_input_fields(const Model& model) {
  const auto& b = model.binding;
  switch (model.family) {
    case Family::kMajority: return {};
    case Family::kNaiveBayes:
    case Family::kTfidf: return {binding_string(b, "text_field", "text")};
    case Family::kLogReg: {
      std::vector<std::string> f;
      for (const auto& c : TabularEncoder::from_json(b.at("encoder")).columns) f.push_back(c.field);
      return f;
    }
  }
  return {};
}

}  // namespace modelforge::models
