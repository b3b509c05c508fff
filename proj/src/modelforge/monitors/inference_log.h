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
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "modelforge/common/time.h"

namespace modelforge::monitors {

struct InferenceRecord {
  std::string inference_id;
  std::uint64_t seq = 0;  // per-model arrival order
  int model_version = 0;
  Timestamp at = 0;
  std::map<std::string, std::string> inputs;
  std::string prediction;  // label or decision; empty for ranked lists

  nlohmann::json to_json() const;
};

// Bounded per-model ring of served requests.
class InferenceLog {
 public:
  explicit InferenceLog(std::size_t capacity = 10000) : capacity_(capacity) {}

  // Assigns `seq` and returns the stored record.
  InferenceRecord append(InferenceRecord record);
  std::optional<InferenceRecord> find(const std::string& inference_id) const;
  // Newest `limit` records, oldest first; only `version` when given.
  std::vector<InferenceRecord> recent(std::size_t limit, std::optional<int> version = std::nullopt) const;
  std::size_t size() const;
  std::uint64_t total() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<InferenceRecord> ring_;
  std::map<std::string, std::uint64_t> by_id_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace modelforge::monitors
