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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "doctest.h"
#include "modelforge/common/error.h"
#include "modelforge/common/random.h"
#include "modelforge/common/time.h"
#include "modelforge/models/artifact.h"
#include "modelforge/models/features.h"
#include "modelforge/models/logreg.h"
#include "modelforge/models/majority.h"
#include "modelforge/models/naive_bayes.h"
#include "modelforge/models/predict.h"
#include "modelforge/models/tfidf.h"
#include "modelforge/models/tokenize.h"

using namespace modelforge;
using namespace modelforge::models;

namespace {

const std::vector<std::pair<std::string, std::string>> kThreeDocs = {
    {"leak in pipe", "PLUMB"}, {"light broken", "ELEC"}, {"pipe burst water", "PLUMB"}};

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Brute-force posterior: enumerate classes, sum log-probabilities term by
// term, normalize with log-sum-exp. The smoothing keeps one extra slot for
// unseen tokens.
std::map<std::string, double> nb_oracle(const std::vector<std::pair<std::string, std::string>>& docs, double alpha,
                                        const std::string& query) {
  std::map<std::string, std::map<std::string, double>> counts;
  std::map<std::string, double> totals, class_docs;
  std::set<std::string> vocab;
  for (const auto& [text, label] : docs) {
    class_docs[label] += 1;
    for (const auto& w : words(text)) {
      counts[label][w] += 1;
      totals[label] += 1;
      vocab.insert(w);
    }
  }
  std::map<std::string, double> joint;
  for (const auto& [label, n] : class_docs) {
    double s = std::log(n / static_cast<double>(docs.size()));
    const double denom = totals[label] + alpha * (static_cast<double>(vocab.size()) + 1.0);
    for (const auto& w : words(query)) {
      const double c = vocab.count(w) ? counts[label][w] : 0.0;
      s += std::log((c + alpha) / denom);
    }
    joint[label] = s;
  }
  double mx = -INFINITY;
  for (const auto& [_, v] : joint) mx = std::max(mx, v);
  double z = 0;
  for (const auto& [_, v] : joint) z += std::exp(v - mx);
  for (auto& [_, v] : joint) v = v - mx - std::log(z);
  return joint;
}

NBModel three_doc_model() { return nb_train(kThreeDocs, 1.0); }

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize("Pipe LEAK, 2nd floor") == std::vector<std::string>{"pipe", "leak", "2nd", "floor"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("a--b") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("caf\xc3\xa9 ok") == std::vector<std::string>{"caf", "ok"});
}

TEST_CASE("naive bayes matches the brute-force posterior oracle") {
  const auto m = three_doc_model();
  for (const std::string q : {"water pipe", "light", "pipe pipe leak", "unknown words only", "", "broken pipe"}) {
    CAPTURE(q);
    const auto pred = nb_predict(m, q);
    const auto oracle = nb_oracle(kThreeDocs, 1.0, q);
    REQUIRE(pred.log_posteriors.size() == oracle.size());
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
      CHECK(std::abs(pred.log_posteriors[i] - oracle.at(m.classes[i])) < 1e-9);
    }
  }
  CHECK(nb_predict(m, "water pipe").label == "PLUMB");
}

TEST_CASE("training docs replay to their own labels") {
  const auto m = three_doc_model();
  for (const auto& [text, label] : kThreeDocs) CHECK(nb_predict(m, text).label == label);
}

TEST_CASE("naive bayes tie-break, empty text and normalization identity") {
  const auto sym = nb_train({{"a", "Y"}, {"a", "X"}}, 1.0);
  CHECK(nb_predict(sym, "a").label == "X");
  const auto m = three_doc_model();
  CHECK(nb_predict(m, "").label == "PLUMB");  // larger prior
  for (std::size_t c = 0; c < m.classes.size(); ++c) {
    double mass = std::exp(m.unseen_log_likelihoods[c]);
    for (double ll : m.token_log_likelihoods[c]) mass += std::exp(ll);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(nb_train({{"a", "X"}, {"b", "X"}}, 1.0), Error);
  CHECK_THROWS_AS(nb_train(kThreeDocs, 0.0), Error);
}

TEST_CASE("argmax is invariant under additive constants") {
  const auto m = three_doc_model();
  const auto joint = nb_joint_scores(m, "pipe light");
  auto shifted = joint;
  for (auto& v : shifted) v += 123.456;
  const auto argmax = [](const std::vector<double>& v) { return std::max_element(v.begin(), v.end()) - v.begin(); };
  CHECK(argmax(joint) == argmax(shifted));
  CHECK(m.classes[argmax(joint)] == nb_predict(m, "pipe light").label);
}

TEST_CASE("logistic regression separates a 1-D fixture") {
  const Matrix x = {{-1.0}, {1.0}};
  const std::vector<int> y = {0, 1};
  const auto m = logreg_train(x, y, {"x"}, 0.5, 2000);
  CHECK(m.weights[0] > 0);
  CHECK_FALSE(logreg_predict(m, {-1.0}).decision);
  CHECK(logreg_predict(m, {1.0}).decision);
  CHECK(logreg_predict(m, {1.0}).score > 0.9);
  CHECK_THROWS_AS(logreg_train(x, {1, 1}, {"x"}, 0.5, 10), Error);
  CHECK_THROWS_AS(logreg_train({{NAN}, {1.0}}, y, {"x"}, 0.5, 10), Error);
  CHECK_THROWS_AS(logreg_predict(m, {1.0, 2.0}), Error);
}

TEST_CASE("gradient at zero weights has the closed form") {
  Rng rng(5);
  Matrix x(8, std::vector<double>(3));
  std::vector<int> y(8);
  for (std::size_t i = 0; i < 8; ++i) {
    for (auto& v : x[i]) v = rng.unit() * 4 - 2;
    y[i] = static_cast<int>(rng.below(2));
  }
  std::vector<double> gw;
  double gb = 0;
  log_loss_gradient(x, y, {0, 0, 0}, 0, gw, gb);
  for (std::size_t j = 0; j < 3; ++j) {
    double expect = 0;
    for (std::size_t i = 0; i < 8; ++i) expect += (0.5 - y[i]) * x[i][j];
    CHECK(gw[j] == doctest::Approx(expect / 8).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(2024);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix x(12, std::vector<double>(5));
    std::vector<int> y(12);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (auto& v : x[i]) v = rng.unit() * 6 - 3;
      y[i] = static_cast<int>(rng.below(2));
    }
    std::vector<double> w(5);
    for (auto& v : w) v = rng.unit() * 2 - 1;
    const double b = rng.unit() - 0.5;
    std::vector<double> gw;
    double gb = 0;
    log_loss_gradient(x, y, w, b, gw, gb);
    for (std::size_t j = 0; j < 5; ++j) {
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double num = (mean_log_loss(x, y, wp, b) - mean_log_loss(x, y, wm, b)) / (2 * h);
      CHECK(std::abs(num - gw[j]) <= 1e-5 * std::max({std::abs(num), std::abs(gw[j]), 1e-3}));
    }
  }
}

TEST_CASE("loss does not increase for a small learning rate") {
  Rng rng(9);
  Matrix x(30, std::vector<double>(2));
  std::vector<int> y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x[i] = {rng.unit() * 2 - 1, rng.unit() * 2 - 1};
    y[i] = x[i][0] + 0.3 * x[i][1] + (rng.unit() - 0.5) * 0.5 > 0 ? 1 : 0;
  }
  double prev = INFINITY;
  for (int iters = 1; iters <= 200; iters += 20) {
    const auto m = logreg_train(x, y, {"a", "b"}, 0.01, iters);
    Matrix xs = x;
    for (auto& r : xs) {
      for (std::size_t j = 0; j < 2; ++j) r[j] = (r[j] - m.means[j]) / m.stds[j];
    }
    const double loss = mean_log_loss(xs, y, m.weights, m.bias);
    CHECK(loss <= prev + 1e-15);
    prev = loss;
  }
}

TEST_CASE("zero model scores exactly one half and predictions are monotone") {
  LRModel z;
  z.feature_names = {"a"};
  z.means = {0};
  z.stds = {1};
  z.weights = {0};
  const auto p = logreg_predict(z, {3.0});
  CHECK(p.score == 0.5);
  CHECK(p.decision);
  z.weights = {0.7};
  double prev = 0;
  for (double v = -5; v <= 5; v += 0.25) {
    const double s = logreg_predict(z, {v}).score;
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("tf-idf self similarity, symmetry and orthogonality") {
  const std::vector<TfidfDocument> docs = {{"a", "water pipe leak", 100, "open"},
                                           {"b", "pipe burst in basement", 200, "closed"},
                                           {"c", "light bulb broken", 300, "completed"}};
  const auto ix = tfidf_index(docs);
  const auto self = tfidf_query(ix, "pipe burst in basement", 3);
  REQUIRE_FALSE(self.empty());
  CHECK(self[0].id == "b");
  CHECK(std::abs(self[0].score - 1.0) < 1e-9);
  for (std::size_t i = 0; i < ix.size(); ++i) {
    CHECK(std::abs(tfidf_doc_similarity(ix, i, i) - 1.0) < 1e-9);
    for (std::size_t j = 0; j < ix.size(); ++j) CHECK(tfidf_doc_similarity(ix, i, j) == tfidf_doc_similarity(ix, j, i));
  }
  CHECK(tfidf_query(ix, "elevator stuck", 3).empty());
  CHECK(tfidf_query(tfidf_index({}), "x", 3).empty());
  CHECK_THROWS_AS(tfidf_index({{"a", "x", 0, "open"}, {"a", "y", 0, "open"}}), Error);
}

TEST_CASE("a window excluding the best match promotes the runner-up") {
  // Independent dot-product oracle over the raw idf-weighted vectors.
  const std::vector<TfidfDocument> docs = {{"d1", "pipe leak water", *parse_rfc3339("2026-01-01T00:00:00Z"), "closed"},
                                           {"d2", "pipe leak", *parse_rfc3339("2025-06-01T00:00:00Z"), "closed"},
                                           {"d3", "door hinge", *parse_rfc3339("2026-01-02T00:00:00Z"), "closed"}};
  const auto ix = tfidf_index(docs);
  const std::string query = "pipe leak";
  std::map<std::string, double> df;
  for (const auto& d : docs) {
    const auto toks = tokenize(d.text);
    for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) df[t] += 1;
  }
  const double n = docs.size();
  auto vec = [&](const std::string& text) {
    std::map<std::string, double> v;
    for (const auto& t : tokenize(text)) v[t] += 1;
    for (auto& [t, w] : v) w *= df.count(t) ? std::log((1 + n) / (1 + df[t])) + 1 : 0.0;
    return v;
  };
  auto cosine = [&](const std::string& a, const std::string& b) {
    auto va = vec(a), vb = vec(b);
    double dot = 0, na = 0, nb = 0;
    for (auto& [t, w] : va) {
      na += w * w;
      if (vb.count(t)) dot += w * vb[t];
    }
    for (auto& [t, w] : vb) nb += w * w;
    return dot / std::sqrt(na * nb);
  };
  const double c1 = cosine(query, docs[0].text), c2 = cosine(query, docs[1].text);
  REQUIRE(c2 > c1);  // d2 is the best match

  const auto unfiltered = tfidf_query(ix, query, 3);
  REQUIRE(unfiltered.size() == 2);
  CHECK(unfiltered[0].id == "d2");
  CHECK(unfiltered[0].score == doctest::Approx(c2).epsilon(1e-12));

  const auto windowed = tfidf_query(ix, query, 3, std::nullopt, TimeFilter{*parse_rfc3339("2026-01-10T00:00:00Z"), 30});
  REQUIRE(windowed.size() == 1);
  CHECK(windowed[0].id == "d1");
  CHECK(windowed[0].score == doctest::Approx(c1).epsilon(1e-12));
}

TEST_CASE("tf-idf filters are sound on random queries") {
  Rng rng(77);
  const std::vector<std::string> vocab = {"pipe", "leak", "door", "light", "roof", "water", "glass", "paint"};
  const std::vector<std::string> statuses = {"open", "closed", "completed"};
  std::vector<TfidfDocument> docs;
  for (int i = 0; i < 60; ++i) {
    std::string text;
    for (int w = 0; w < 3; ++w) text += vocab[rng.below(vocab.size())] + " ";
    char id[8];
    std::snprintf(id, sizeof id, "d%02d", i);
    docs.push_back({id, text, static_cast<Timestamp>(rng.below(100)) * kDay, statuses[rng.below(3)]});
  }
  const auto ix = tfidf_index(docs);
  std::map<std::string, const TfidfDocument*> by_id;
  for (const auto& d : docs) by_id[d.id] = &d;
  for (int q = 0; q < 100; ++q) {
    const std::string query = vocab[rng.below(vocab.size())] + " " + vocab[rng.below(vocab.size())];
    const std::string status = statuses[rng.below(3)];
    const TimeFilter window{static_cast<Timestamp>(rng.below(100)) * kDay, static_cast<std::int64_t>(rng.below(40))};
    const auto res = tfidf_query(ix, query, 5, status, window);
    CHECK(res.size() <= 5);
    for (std::size_t i = 0; i < res.size(); ++i) {
      const auto* d = by_id.at(res[i].id);
      CHECK(d->status == status);
      CHECK(d->timestamp >= window.as_of - window.days * kDay);
      CHECK(d->timestamp <= window.as_of);
      CHECK(res[i].score > 0);
      CHECK(res[i].score <= 1.0 + 1e-12);
      if (i > 0) {
        CHECK((res[i - 1].score > res[i].score || (res[i - 1].score == res[i].score && res[i - 1].id < res[i].id)));
      }
    }
  }
}

TEST_CASE("majority baseline") {
  CHECK(majority_train({"A", "A", "B"}).label == "A");
  CHECK(majority_train({"B", "A"}).label == "A");
  CHECK_THROWS_AS(majority_train({}), Error);
}

TEST_CASE("artifacts round-trip bit-exactly") {
  Model m;
  m.family = Family::kNaiveBayes;
  m.body = three_doc_model();
  m.binding = {{"text_field", "description"}};
  const auto bytes = serialize_model(m);
  const auto back = deserialize_model(bytes);
  CHECK(serialize_model(back) == bytes);
  for (const auto& [text, _] : kThreeDocs) {
    const auto a = nb_predict(m.nb(), text).log_posteriors;
    const auto b = nb_predict(back.nb(), text).log_posteriors;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::memcmp(&a[i], &b[i], sizeof(double)) == 0);
  }

  auto wrong_version = bytes;
  wrong_version[4] = 9;
  try {
    deserialize_model(wrong_version);
    FAIL("expected a version error");
  } catch (const Error& e) {
    CHECK(e.kind() == "artifact-version");
  }
  try {
    deserialize_model(bytes.substr(0, bytes.size() - 3));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == "artifact-parse");
  }
}

TEST_CASE("predict binds request fields") {
  Model m;
  m.family = Family::kNaiveBayes;
  m.body = three_doc_model();
  m.binding = {{"text_field", "description"}};
  const auto out = predict(m, [](const std::string& f) -> std::optional<std::string> {
    if (f == "description") return "water pipe";
    return std::nullopt;
  });
  CHECK(out.label == "PLUMB");
  CHECK(out.body["scores"].size() == 2);
  CHECK_THROWS_AS(predict(m, [](const std::string&) -> std::optional<std::string> { return std::nullopt; }), Error);
  CHECK(model_input_fields(m) == std::vector<std::string>{"description"});
}

TEST_CASE("tabular encoder one-hot encodes categoricals") {
  std::vector<std::map<std::string, std::string>> rows = {{{"cost", "10"}, {"prio", "low"}},
                                                          {{"cost", "20"}, {"prio", "high"}}};
  std::vector<TabularEncoder::CellGetter> getters;
  for (auto& r : rows) getters.push_back([&r](const std::string& f) -> std::string_view { return r.at(f); });
  const auto enc = TabularEncoder::fit({{"cost", false}, {"prio", true}}, getters);
  CHECK(enc.feature_names() == std::vector<std::string>{"cost", "prio=high", "prio=low"});
  CHECK(enc.encode(getters[0]) == std::vector<double>{10, 0, 1});
  std::map<std::string, std::string> unseen = {{"cost", "5"}, {"prio", "urgent"}};
  CHECK(enc.encode([&](const std::string& f) -> std::string_view { return unseen.at(f); }) ==
        std::vector<double>{5, 0, 0});
  CHECK(TabularEncoder::from_json(enc.to_json()).to_json() == enc.to_json());
}
