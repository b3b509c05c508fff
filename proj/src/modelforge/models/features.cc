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

#include "modelforge/models/features.h"

#include <algorithm>
#include <set>

#include "modelforge/common/error.h"
#include "modelforge/connectors/snapshot.h"

namespace modelforge::models {

TabularEncoder TabularEncoder::fit(const std::vector<std::pair<std::string, bool>>& fields,
                                   const std::vector<CellGetter>& rows) {
  TabularEncoder enc;
  for (const auto& [field, categorical] : fields) {
    Column c{field, categorical, {}};
    if (categorical) {
      std::set<std::string> seen;
      for (const auto& row : rows) seen.emplace(row(field));
      c.categories.assign(seen.begin(), seen.end());
    }
    enc.columns.push_back(std::move(c));
  }
  return enc;
}

std::vector<std::string> TabularEncoder::feature_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns) {
    if (!c.categorical) {
      names.push_back(c.field);
    } else {
      for (const auto& cat : c.categories) names.push_back(c.field + "=" + cat);
    }
  }
  return names;
}

std::vector<double> TabularEncoder::encode(const CellGetter& row) const {
  std::vector<double> out;
  for (const auto& c : columns) {
    const auto cell = row(c.field);
    if (!c.categorical) {
      auto v = connectors::parse_number(cell);
      if (!v) {
        fail(ErrorCode::kValidation, "type-mismatch", "field '" + c.field + "' must be numeric",
             {{{"field", c.field}, {"message", "not a finite number"}}});
      }
      out.push_back(*v);
    } else {
      for (const auto& cat : c.categories) out.push_back(cell == cat ? 1.0 : 0.0);
    }
  }
  return out;
}

nlohmann::json TabularEncoder::to_json() const {
  auto j = nlohmann::json::array();
  for (const auto& c : columns) {
    nlohmann::json cj = {{"field", c.field}, {"kind", c.categorical ? "categorical" : "numeric"}};
    if (c.categorical) cj["categories"] = c.categories;
    j.push_back(std::move(cj));
  }
  return j;
}

TabularEncoder TabularEncoder::from_json(const nlohmann::json& j) {
  TabularEncoder enc;
  for (const auto& cj : j) {
    Column c;
    c.field = cj.at("field").get<std::string>();
    c.categorical = cj.at("kind").get<std::string>() == "categorical";
    if (c.categorical) c.categories = cj.at("categories").get<std::vector<std::string>>();
    enc.columns.push_back(std::move(c));
  }
  return enc;
}

}  // namespace modelforge::models
