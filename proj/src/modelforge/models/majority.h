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

#include <map>
#include <string>
#include <vector>

namespace modelforge::models {

struct MajorityModel {
  std::string label;
  std::map<std::string, std::size_t> counts;
};

// Most frequent label; ties go to the lexicographically smallest. Throws
// Error(kValidation, "empty-labels") on an empty input.
MajorityModel majority_train(const std::vector<std::string>& labels);
const std::string& majority_predict(const MajorityModel& model);

}  // namespace modelforge::models
