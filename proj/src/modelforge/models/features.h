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

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace modelforge::models {

// Turns tabular records into numeric feature vectors: numeric fields pass
// through, categorical fields are one-hot encoded over the categories seen at
// fit time (unseen categories encode as all zeros).
struct TabularEncoder {
  struct Column {
    std::string field;
    bool categorical = false;
    std::vector<std::string> categories;  // sorted
  };
  std::vector<Column> columns;

  using CellGetter = std::function<std::string_view(const std::string& field)>;

  static TabularEncoder fit(const std::vector<std::pair<std::string, bool>>& fields,
                            const std::vector<CellGetter>& rows);
  std::vector<std::string> feature_names() const;
  // Throws Error(kValidation, "type-mismatch") for a non-numeric numeric cell.
  std::vector<double> encode(const CellGetter& row) const;

  nlohmann::json to_json() const;
  static TabularEncoder from_json(const nlohmann::json& j);
};

}  // namespace modelforge::models
