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

#include "modelforge/models/majority.h"

#include "modelforge/common/error.h"

namespace modelforge::models {

MajorityModel majority_train(const std::vector<std::string>& labels) {
  if (labels.empty()) fail(ErrorCode::kValidation, "empty-labels", "majority model needs at least one label");
  MajorityModel m;
  for (const auto& l : labels) ++m.counts[l];
  std::size_t best = 0;
  for (const auto& [label, n] : m.counts) {  // ascending, so strict > keeps the smallest on ties
    if (n > best) {
      best = n;
      m.label = label;
    }
  }
  return m;
}

const std::string& majority_predict(const MajorityModel& model) { return model.label; }

}  // namespace modelforge::models
