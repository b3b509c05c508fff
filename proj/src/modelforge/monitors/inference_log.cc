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

#include "modelforge/monitors/inference_log.h"

namespace modelforge::monitors {

nlohmann::json InferenceRecord::to_json() const {
  return {{"inference_id", inference_id}, {"seq", seq},      {"model_version", model_version},
          {"at", format_rfc3339(at)},     {"inputs", inputs}, {"prediction", prediction}};
}

InferenceRecord InferenceLog::append(InferenceRecord record) {
  std::lock_guard lock(mu_);
  record.seq = next_seq_++;
  by_id_[record.inference_id] = record.seq;
  ring_.push_back(record);
  while (ring_.size() > capacity_) {
    by_id_.erase(ring_.front().inference_id);
    ring_.pop_front();
  }
  return record;
}

std::optional<InferenceRecord> InferenceLog::find(const std::string& inference_id) const {
  std::lock_guard lock(mu_);
  auto it = by_id_.find(inference_id);
  if (it == by_id_.end()) return std::nullopt;
  const std::uint64_t first = ring_.front().seq;
  return ring_[it->second - first];
}

std::vector<InferenceRecord> InferenceLog::recent(std::size_t limit, std::optional<int> version) const {
  std::lock_guard lock(mu_);
  std::vector<InferenceRecord> out;
  for (auto it = ring_.rbegin(); it != ring_.rend() && out.size() < limit; ++it) {
    if (!version || it->model_version == *version) out.push_back(*it);
  }
  return {out.rbegin(), out.rend()};
}

std::size_t InferenceLog::size() const {
  std::lock_guard lock(mu_);
  return ring_.size();
}

std::uint64_t InferenceLog::total() const {
  std::lock_guard lock(mu_);
  return next_seq_ - 1;
}

}  // namespace modelforge::monitors
