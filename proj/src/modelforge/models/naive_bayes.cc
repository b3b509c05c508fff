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

#include "modelforge/models/naive_bayes.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "modelforge/common/error.h"
#include "modelforge/models/tokenize.h"

namespace modelforge::models {

long NBModel::token_index(std::string_view token) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token);
  if (it == vocabulary.end() || *it != token) return -1;
  return static_cast<long>(it - vocabulary.begin());
}

NBModel nb_train(const std::vector<std::pair<std::string, std::string>>& docs, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    fail(ErrorCode::kValidation, "invalid-hyperparameter", "alpha must be a positive finite number",
         {{{"param", "alpha"}, {"value", alpha}}});
  }
  std::map<std::string, std::size_t> class_docs;
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  std::map<std::string, bool> vocab;
  for (const auto& [text, label] : docs) {
    ++class_docs[label];
    auto& c = counts[label];
    for (auto& t : tokenize(text)) {
      vocab.emplace(t, true);
      ++c[t];
    }
  }
  if (class_docs.size() < 2) {
    fail(ErrorCode::kValidation, "degenerate-labels", "naive Bayes needs at least two distinct labels");
  }

  NBModel m;
  m.alpha = alpha;
  for (const auto& [t, _] : vocab) m.vocabulary.push_back(t);
  const double v_slots = static_cast<double>(m.vocabulary.size() + 1);
  const double n_docs = static_cast<double>(docs.size());
  for (const auto& [label, n] : class_docs) {
    m.classes.push_back(label);
    m.log_priors.push_back(std::log(static_cast<double>(n) / n_docs));
    const auto& c = counts[label];
    double total = 0;
    for (const auto& [t, k] : c) total += static_cast<double>(k);
    const double log_denom = std::log(total + alpha * v_slots);
    std::vector<double> ll(m.vocabulary.size());
    for (std::size_t i = 0; i < m.vocabulary.size(); ++i) {
      auto it = c.find(m.vocabulary[i]);
      const double k = it == c.end() ? 0.0 : static_cast<double>(it->second);
      ll[i] = std::log(k + alpha) - log_denom;
    }
    m.token_log_likelihoods.push_back(std::move(ll));
    m.unseen_log_likelihoods.push_back(std::log(alpha) - log_denom);
  }
  return m;
}

std::vector<double> nb_joint_scores(const NBModel& model, std::string_view text) {
  std::vector<double> scores = model.log_priors;
  for (const auto& t : tokenize(text)) {
    const long idx = model.token_index(t);
    for (std::size_t c = 0; c < scores.size(); ++c) {
      scores[c] += idx < 0 ? model.unseen_log_likelihoods[c] : model.token_log_likelihoods[c][idx];
    }
  }
  return scores;
}

NBPrediction nb_predict(const NBModel& model, std::string_view text) {
  const auto scores = nb_joint_scores(model, text);
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;  // classes are sorted: ties keep the smaller label
  }
  const double mx = scores[best];
  double sum = 0;
  for (double s : scores) sum += std::exp(s - mx);
  const double log_z = mx + std::log(sum);
  NBPrediction p;
  p.label = model.classes[best];
  p.log_posteriors.reserve(scores.size());
  for (double s : scores) p.log_posteriors.push_back(s - log_z);
  return p;
}

}  // namespace modelforge::models
