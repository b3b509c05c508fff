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
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "modelforge/models/artifact.h"

namespace modelforge::models {

// Looks up a request/record field; nullopt when absent.
using FieldGetter = std::function<std::optional<std::string>(const std::string& field)>;

struct Output {
  std::optional<std::string> label;  // class-label / decision families
  json body;                         // family-specific response document
};

// Runs `model` on one record using its binding:
//   majority        {label}
//   nb-multinomial  {label, scores: {class: posterior}}
//   logreg-binary   {label, decision: bool, score}
//   tfidf-knn       {matches: [{id, score}]}; the query honours the optional
//                   request fields compare_to, time_window_days, top_k and
//                   the binding's timestamp field as as-of (default: newest
//                   indexed document).
// Throws Error(kValidation) listing offending fields.
Output predict(const Model& model, const FieldGetter& get);

// Request fields a model reads, for validation and drift features.
std::vector<std::string> model_input_fields(const Model& model);

}  // namespace modelforge::models
