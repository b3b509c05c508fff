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

#include "modelforge/monitors/psi.h"

#include <cmath>

#include "modelforge/common/error.h"

namespace modelforge::monitors {

std::vector<double> smoothed_proportions(const std::vector<double>& counts) {
  double total = 0;
  for (double c : counts) {
    if (!(c >= 0) || !std::isfinite(c)) {
      fail(ErrorCode::kValidation, "empty-histogram", "histogram counts must be finite and non-negative");
    }
    total += c;
  }
  if (total <= 0) fail(ErrorCode::kValidation, "empty-histogram", "histogram total must be positive");
  std::vector<double> p(counts.size());
  double sum = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = counts[i] > 0 ? counts[i] / total : kPsiEpsilon;
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

double compute_psi(const std::vector<double>& reference, const std::vector<double>& current) {
  if (reference.size() != current.size() || reference.empty()) {
    fail(ErrorCode::kValidation, "bin-mismatch",
         "histograms have " + std::to_string(reference.size()) + " and " + std::to_string(current.size()) + " bins");
  }
  const auto p = smoothed_proportions(reference);
  const auto q = smoothed_proportions(current);
  double psi = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != q[i]) psi += (p[i] - q[i]) * std::log(p[i] / q[i]);
  }
  return psi;
}

}  // namespace modelforge::monitors
