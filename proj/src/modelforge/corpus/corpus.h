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
#include <vector>

#include "modelforge/common/time.h"

namespace modelforge::corpus {

struct WorkOrderRecord {
  std::string id;
  std::string description;
  std::string site;
  Timestamp opened_at = 0;
  std::optional<Timestamp> closed_at;
  std::string status;  // open | closed | completed
  std::int64_t cost = 0;
  std::string priority;  // low | medium | high | critical
  std::optional<std::string> failure_code;
  std::optional<bool> approved;
};

struct CorpusOptions {
  std::uint64_t seed = 17;
  std::size_t n_rows = 500;
  std::size_t n_codes = 40;
  double approval_noise = 0.0;
  Timestamp base_time = 1767225600000;  // 2026-01-01T00:00:00Z; newest possible opened_at
  std::vector<std::string> sites = {"A", "B", "C", "D"};
};

// Synthetic work orders. Every failure code owns a disjoint keyword
// vocabulary and approvals follow a linear rule on cost and priority with a
// guaranteed margin, flipped with probability approval_noise. Sampling uses
// integer arithmetic only, so a seed gives the same corpus everywhere.
std::vector<WorkOrderRecord> generate_corpus(const CorpusOptions& options);

// The label set used for `n_codes` codes, in code order.
std::vector<std::string> failure_codes(std::size_t n_codes);

// Approval rule without noise.
bool approval_rule(std::int64_t cost, const std::string& priority);

constexpr const char* kCorpusHeader = "id,description,site,opened_at,closed_at,status,cost,priority,failure_code,approved";
std::string to_csv(const std::vector<WorkOrderRecord>& records);

}  // namespace modelforge::corpus
