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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelforge/common/time.h"

namespace modelforge::models {

struct TfidfDocument {
  std::string id;
  std::string text;
  Timestamp timestamp = 0;
  std::string status;  // open | closed | completed
};

// Raw term counts weighted by idf(t) = ln((1 + N) / (1 + df(t))) + 1 and
// scaled to unit L2 norm.
struct TfidfIndex {
  struct Doc {
    std::string id;
    Timestamp timestamp = 0;
    std::string status;
    std::vector<std::uint32_t> terms;  // ascending vocabulary indices
    std::vector<double> weights;       // unit-norm weights aligned with terms
    double norm = 0.0;                 // L2 norm before scaling
  };
  std::vector<std::string> vocabulary;  // sorted
  std::vector<double> idf;
  std::vector<Doc> docs;  // ascending id

  long term_index(std::string_view token) const;
  std::size_t size() const { return docs.size(); }
};

struct TfidfMatch {
  std::string id;
  double score = 0.0;
  bool operator==(const TfidfMatch&) const = default;
};

struct TimeFilter {
  Timestamp as_of = 0;
  std::int64_t days = 0;  // keeps timestamps in [as_of - days, as_of]
};

// Throws Error(kValidation, "duplicate-id") on repeated ids.
TfidfIndex tfidf_index(const std::vector<TfidfDocument>& docs);

// Candidates pass the status and window filters; zero scores are omitted.
// Descending score, ties by ascending id, at most k results.
std::vector<TfidfMatch> tfidf_query(const TfidfIndex& index, std::string_view query, std::size_t k,
                                    const std::optional<std::string>& status = std::nullopt,
                                    const std::optional<TimeFilter>& window = std::nullopt);

// Cosine between stored documents i and j.
double tfidf_doc_similarity(const TfidfIndex& index, std::size_t i, std::size_t j);

}  // namespace modelforge::models
