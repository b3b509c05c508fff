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

#include <vector>

namespace modelforge::monitors {

constexpr double kPsiEpsilon = 1e-4;

// Bin proportions with every empty bin raised to kPsiEpsilon, renormalized
// to sum to one. Throws Error(kValidation, "empty-histogram") on a zero total
// or negative counts.
std::vector<double> smoothed_proportions(const std::vector<double>& counts);

// Population stability index sum_b (p_b - q_b) ln(p_b / q_b) over smoothed
// proportions. Throws Error(kValidation, "bin-mismatch") when the histograms
// have different bin counts.
double compute_psi(const std::vector<double>& reference, const std::vector<double>& current);

}  // namespace modelforge::monitors
