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

#include "modelforge/models/tfidf.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "modelforge/common/error.h"
#include "modelforge/models/tokenize.h"

namespace modelforge::models {
namespace {

double sparse_dot(const std::vector<std::uint32_t>& ta, const std::vector<double>& wa,
                  const std::vector<std::uint32_t>& tb, const std::vector<double>& wb) {
  double s = 0;
  std::size_t i = 0, j = 0;
  while (i < ta.size() && j < tb.size()) {
    if (ta[i] == tb[j]) {
      s += wa[i++] * wb[j++];
    } else if (ta[i] < tb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

double clamp_unit(double s) { return std::min(1.0, std::max(0.0, s)); }

}  // namespace

long TfidfIndex::term_index(std::string_view token) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token);
  if (it == vocabulary.end() || *it != token) return -1;
  return static_cast<long>(it - vocabulary.begin());
}

TfidfIndex tfidf_index(const std::vector<TfidfDocument>& input) {
  std::vector<const TfidfDocument*> sorted;
  for (const auto& d : input) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->id == sorted[i - 1]->id) {
      fail(ErrorCode::kValidation, "duplicate-id", "document id '" + sorted[i]->id + "' occurs twice");
    }
  }

  std::vector<std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> df;
  for (const auto* d : sorted) {
    std::map<std::string, std::size_t> c;
    for (auto& t : tokenize(d->text)) ++c[t];
    for (const auto& [t, _] : c) ++df[t];
    counts.push_back(std::move(c));
  }

  TfidfIndex index;
  const double n = static_cast<double>(sorted.size());
  for (const auto& [t, f] : df) {
    index.vocabulary.push_back(t);
    index.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(f))) + 1.0);
  }
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    TfidfIndex::Doc doc{sorted[i]->id, sorted[i]->timestamp, sorted[i]->status, {}, {}, 0.0};
    double sq = 0;
    for (const auto& [t, k] : counts[i]) {  // map order = vocabulary order
      const auto idx = static_cast<std::uint32_t>(index.term_index(t));
      const double w = static_cast<double>(k) * index.idf[idx];
      doc.terms.push_back(idx);
      doc.weights.push_back(w);
      sq += w * w;
    }
    doc.norm = std::sqrt(sq);
    if (doc.norm > 0) {
      for (auto& w : doc.weights) w /= doc.norm;
    }
    index.docs.push_back(std::move(doc));
  }
  return index;
}

std::vector<TfidfMatch> tfidf_query(const TfidfIndex& index, std::string_view query, std::size_t k,
                                    const std::optional<std::string>& status,
                                    const std::optional<TimeFilter>& window) {
  if (k == 0) fail(ErrorCode::kValidation, "invalid-argument", "k must be at least 1");
  std::vector<TfidfMatch> out;
  if (index.docs.empty()) return out;

  // Unknown query tokens still count toward the query norm, weighted with
  // the idf of a term that occurs in no document.
  std::map<std::uint32_t, double> known;
  std::map<std::string, double> unknown;
  for (auto& t : tokenize(query)) {
    const long idx = index.term_index(t);
    if (idx >= 0) {
      known[static_cast<std::uint32_t>(idx)] += 1.0;
    } else {
      unknown[t] += 1.0;
    }
  }
  const double unseen_idf = std::log(1.0 + static_cast<double>(index.docs.size())) + 1.0;
  std::vector<std::uint32_t> terms;
  std::vector<double> weights;
  double sq = 0;
  for (const auto& [idx, c] : known) {
    terms.push_back(idx);
    weights.push_back(c * index.idf[idx]);
    sq += weights.back() * weights.back();
  }
  for (const auto& [t, c] : unknown) sq += (c * unseen_idf) * (c * unseen_idf);
  if (sq == 0) return out;
  const double qnorm = std::sqrt(sq);
  for (auto& w : weights) w /= qnorm;

  for (const auto& d : index.docs) {
    if (status && d.status != *status) continue;
    if (window && (d.timestamp < window->as_of - window->days * kDay || d.timestamp > window->as_of)) continue;
    const double s = clamp_unit(sparse_dot(terms, weights, d.terms, d.weights));
    if (s > 0) out.push_back({d.id, s});
  }
  std::stable_sort(out.begin(), out.end(), [](const TfidfMatch& a, const TfidfMatch& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

double tfidf_doc_similarity(const TfidfIndex& index, std::size_t i, std::size_t j) {
  const auto& a = index.docs.at(i);
  const auto& b = index.docs.at(j);
  return clamp_unit(sparse_dot(a.terms, a.weights, b.terms, b.weights));
}

}  // namespace modelforge::models
