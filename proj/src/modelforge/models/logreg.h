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
#include <vector>

namespace modelforge::models {

using Matrix = std::vector<std::vector<double>>;

// Binary logistic regression on standardized features.
//
// Every input feature keeps a slot. A feature with zero variance in the
// training data is dropped: its weight is pinned to 0, its std recorded as 1
// and its name listed in `dropped`.
struct LRModel {
  std::vector<std::string> feature_names;
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<std::string> dropped;
};

struct LRPrediction {
  double score = 0.5;  // P(y = 1)
  bool decision = true;  // score >= 0.5
};

// Full-batch gradient descent on the mean log-loss, starting from zero.
// Throws Error(kValidation) on fewer than two rows, single-class labels,
// non-finite inputs or an invalid lr/iters.
LRModel logreg_train(const Matrix& x, const std::vector<int>& y, const std::vector<std::string>& feature_names,
                     double lr, int iters);

// Throws Error(kValidation, "arity-mismatch") when |x| != |feature_names|.
LRPrediction logreg_predict(const LRModel& model, const std::vector<double>& x);

double sigmoid(double z);

// Mean log-loss of (w, b) on x and its analytic gradient. These work on
// whatever features they are given; logreg_train passes standardized ones.
double mean_log_loss(const Matrix& x, const std::vector<int>& y, const std::vector<double>& w, double b);
void log_loss_gradient(const Matrix& x, const std::vector<int>& y, const std::vector<double>& w, double b,
                       std::vector<double>& grad_w, double& grad_b);

}  // namespace modelforge::models
