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

#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "modelforge/models/features.h"
#include "modelforge/models/logreg.h"
#include "modelforge/models/majority.h"
#include "modelforge/models/naive_bayes.h"
#include "modelforge/models/tfidf.h"

namespace modelforge::models {

using nlohmann::json;

// Family names double as serving model kinds.
enum class Family { kMajority, kNaiveBayes, kLogReg, kTfidf };
std::string_view family_name(Family f);
Family family_from(std::string_view name);

// A trained model plus how it binds to request fields. `binding` is free-form
// JSON written by the training op; it holds no floating-point values so that
// all numbers travel in the binary payload:
//   majority:        {}
//   nb-multinomial:  {text_field}
//   logreg-binary:   {encoder, positive_label, negative_label}
//   tfidf-knn:       {text_field, id_field, timestamp_field, status_field,
//                     compare_to, time_window_days, top_k}
struct Model {
  Family family = Family::kMajority;
  json binding = json::object();
  std::variant<MajorityModel, NBModel, LRModel, TfidfIndex> body;

  const MajorityModel& majority() const { return std::get<MajorityModel>(body); }
  const NBModel& nb() const { return std::get<NBModel>(body); }
  const LRModel& logreg() const { return std::get<LRModel>(body); }
  const TfidfIndex& tfidf() const { return std::get<TfidfIndex>(body); }
};

// Byte layout (all integers little-endian):
//   "MFMD" | u32 format version | u32 header length | header JSON (UTF-8)
//   | u64 value count | value count x IEEE-754 float64
constexpr std::uint32_t kArtifactFormatVersion = 1;

std::string serialize_model(const Model& model);
// Throws Error(kIntegrity, "artifact-parse") on malformed or truncated input
// and Error(kIntegrity, "artifact-version") on an unknown format version.
Model deserialize_model(std::string_view bytes);

}  // namespace modelforge::models
