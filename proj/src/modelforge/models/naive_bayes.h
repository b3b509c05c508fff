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
#include <utility>
#include <vector>

namespace modelforge::models {

// Multinomial naive Bayes over tokenize() output with additive smoothing.
//
// The smoothing denominator reserves one extra vocabulary slot for tokens
// never seen in training, so for each class
//   P(t|c)   = (count(t,c) + alpha) / (N_c + alpha * (|V| + 1))
//   P(unk|c) = alpha / (N_c + alpha * (|V| + 1))
// and the known-token probabilities plus the unseen mass sum to one.
struct NBModel {
  std::vector<std::string> classes;     // sorted
  std::vector<double> log_priors;       // per class
  std::vector<std::string> vocabulary;  // sorted
  // [class][vocabulary index]
  std::vector<std::vector<double>> token_log_likelihoods;
  std::vector<double> unseen_log_likelihoods;  // per class
  double alpha = 1.0;

  // Index into vocabulary, or -1.
  long token_index(std::string_view token) const;
};

struct NBPrediction {
  std::string label;
  // Normalized log P(c|text), aligned with NBModel::classes.
  std::vector<double> log_posteriors;
};

// Throws Error(kValidation, "degenerate-labels") with fewer than two distinct
// labels and Error(kValidation, "invalid-hyperparameter") when alpha <= 0.
NBModel nb_train(const std::vector<std::pair<std::string, std::string>>& docs, double alpha);

NBPrediction nb_predict(const NBModel& model, std::string_view text);

// Unnormalized joint scores log P(c) + sum log P(t|c); the argmax of
// nb_predict is taken over these.
std::vector<double> nb_joint_scores(const NBModel& model, std::string_view text);

}  // namespace modelforge::models
