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

#include "modelforge/models/logreg.h"

#include <cmath>

#include "modelforge/common/error.h"

namespace modelforge::models {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double mean_log_loss(const Matrix& x, const std::vector<int>& y, const std::vector<double>& w, double b) {
  double total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = dot(w, x[i]) + b;
    // log(1 + e^z) - y z, computed without overflow.
    total += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - (y[i] ? z : 0.0);
  }
  return total / static_cast<double>(x.size());
}

void log_loss_gradient(const Matrix& x, const std::vector<int>& y, const std::vector<double>& w, double b,
                       std::vector<double>& grad_w, double& grad_b) {
  grad_w.assign(w.size(), 0.0);
  grad_b = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = sigmoid(dot(w, x[i]) + b) - y[i];
    for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] += r * x[i][j];
    grad_b += r;
  }
  const double n = static_cast<double>(x.size());
  for (auto& g : grad_w) g /= n;
  grad_b /= n;
}

LRModel logreg_train(const Matrix& x, const std::vector<int>& y, const std::vector<std::string>& feature_names,
                     double lr, int iters) {
  if (!(lr > 0) || !std::isfinite(lr)) {
    fail(ErrorCode::kValidation, "invalid-hyperparameter", "lr must be a positive finite number",
         {{{"param", "lr"}, {"value", lr}}});
  }
  if (iters < 1) {
    fail(ErrorCode::kValidation, "invalid-hyperparameter", "iters must be at least 1",
         {{{"param", "iters"}, {"value", iters}}});
  }
  if (x.size() != y.size() || x.size() < 2) {
    fail(ErrorCode::kValidation, "insufficient-data", "logistic regression needs at least two labeled rows");
  }
  bool has0 = false, has1 = false;
  for (int v : y) (v ? has1 : has0) = true;
  if (!has0 || !has1) fail(ErrorCode::kValidation, "degenerate-labels", "training labels contain a single class");
  const std::size_t d = feature_names.size();
  for (const auto& row : x) {
    if (row.size() != d) fail(ErrorCode::kValidation, "arity-mismatch", "feature row has the wrong arity");
    for (double v : row) {
      if (!std::isfinite(v)) fail(ErrorCode::kValidation, "non-finite", "feature matrix contains a non-finite value");
    }
  }

  LRModel m;
  m.feature_names = feature_names;
  m.means.assign(d, 0.0);
  m.stds.assign(d, 1.0);
  std::vector<bool> keep(d, true);
  const double n = static_cast<double>(x.size());
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0;
    for (const auto& row : x) s += row[j];
    m.means[j] = s / n;
    double v = 0;
    for (const auto& row : x) v += (row[j] - m.means[j]) * (row[j] - m.means[j]);
    const double sd = std::sqrt(v / n);
    if (sd > 0) {
      m.stds[j] = sd;
    } else {
      keep[j] = false;
      m.dropped.push_back(feature_names[j]);
    }
  }

  Matrix z(x.size(), std::vector<double>(d));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) z[i][j] = keep[j] ? (x[i][j] - m.means[j]) / m.stds[j] : 0.0;
  }
  m.weights.assign(d, 0.0);
  std::vector<double> gw;
  double gb = 0;
  for (int it = 0; it < iters; ++it) {
    log_loss_gradient(z, y, m.weights, m.bias, gw, gb);
    for (std::size_t j = 0; j < d; ++j) m.weights[j] -= lr * gw[j];
    m.bias -= lr * gb;
  }
  return m;
}

LRPrediction logreg_predict(const LRModel& model, const std::vector<double>& x) {
  if (x.size() != model.feature_names.size()) {
    fail(ErrorCode::kValidation, "arity-mismatch",
         "expected " + std::to_string(model.feature_names.size()) + " features, got " + std::to_string(x.size()));
  }
  double z = model.bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += model.weights[j] * ((x[j] - model.means[j]) / model.stds[j]);
  LRPrediction p;
  p.score = sigmoid(z);
  p.decision = p.score >= 0.5;
  return p;
}

}  // namespace modelforge::models
