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

#include "modelforge/executor/ops.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/common/random.h"
#include "modelforge/connectors/snapshot.h"
#include "modelforge/models/artifact.h"
#include "modelforge/models/predict.h"

namespace modelforge::executor {
namespace {

using connectors::DatasetSnapshot;
using models::Family;
using models::Model;

[[noreturn]] void bad_param(const std::string& name, const std::string& msg) {
  fail(ErrorCode::kValidation, "invalid-hyperparameter", "parameter '" + name + "' " + msg,
       {{{"param", name}, {"message", msg}}});
}

DatasetSnapshot read_table(const OpContext& ctx, std::size_t i) {
  return connectors::parse_canonical(ctx.read_input(i));
}

void write_table(const OpContext& ctx, std::size_t i, const DatasetSnapshot& s) {
  ctx.write_output(i, connectors::canonical_bytes(s));
}

DatasetSnapshot subset(const DatasetSnapshot& s, const std::vector<std::size_t>& rows) {
  DatasetSnapshot out;
  out.schema = s.schema;
  out.fetched_at = s.fetched_at;
  for (auto r : rows) out.rows.push_back(s.rows[r]);
  out.digest = connectors::snapshot_digest(out);
  return out;
}

int require_column(const DatasetSnapshot& s, const std::string& name, const std::string& what) {
  const int c = s.column(name);
  if (c < 0) {
    fail(ErrorCode::kValidation, "missing-column", what + " column '" + name + "' is not in the data",
         {{{"field", name}}});
  }
  return c;
}

std::vector<std::string> labels_of(const DatasetSnapshot& s) {
  const int c = require_column(s, kLabelField, "label");
  std::vector<std::string> out;
  for (const auto& r : s.rows) out.push_back(r[c]);
  return out;
}

std::string default_text_field(const OpContext& ctx) {
  if (ctx.manifest) {
    for (const auto& in : ctx.manifest->inputs) {
      if (in.kind == tmpl::FieldKind::kText) return in.name;
    }
  }
  return "text";
}

models::FieldGetter row_getter(const DatasetSnapshot& s, const std::vector<std::string>& row) {
  return [&s, &row](const std::string& f) -> std::optional<std::string> {
    const int c = s.column(f);
    if (c < 0) return std::nullopt;
    return row[c];
  };
}

double accuracy_on(const Model& m, const DatasetSnapshot& holdout, const std::function<void()>& checkpoint) {
  const int lc = require_column(holdout, kLabelField, "label");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < holdout.rows.size(); ++i) {
    if (i % 256 == 0) checkpoint();
    const auto out = models::predict(m, row_getter(holdout, holdout.rows[i]));
    if (out.label && *out.label == holdout.rows[i][lc]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(holdout.rows.size());
}

std::vector<json> grid_points(const OpContext& ctx) {
  if (!ctx.params.contains("grid") || ctx.params["grid"].is_null()) return {json::object()};
  const auto& g = ctx.params["grid"];
  if (!g.is_array() || g.empty()) bad_param("grid", "must be a non-empty list of hyperparameter maps");
  std::vector<json> out;
  for (const auto& p : g) {
    if (!p.is_object()) bad_param("grid", "entries must be maps");
    out.push_back(p);
  }
  return out;
}

double point_number(const json& point, const std::string& name, double fallback) {
  if (!point.contains(name) || point[name].is_null()) return fallback;
  const auto& v = point[name];
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    if (auto n = connectors::parse_number(v.get<std::string>())) return *n;
  }
  bad_param(name, "must be a number");
}

Model train_majority_model(const DatasetSnapshot& train) {
  Model m;
  m.family = Family::kMajority;
  m.body = models::majority_train(labels_of(train));
  return m;
}

std::vector<std::pair<std::string, bool>> default_lr_features(const OpContext& ctx) {
  std::vector<std::pair<std::string, bool>> f;
  if (ctx.params.contains("features") && ctx.params["features"].is_array()) {
    for (const auto& name : ctx.params["features"]) {
      const auto n = name.get<std::string>();
      const auto* in = ctx.manifest ? ctx.manifest->find_input(n) : nullptr;
      f.emplace_back(n, !in || in->kind != tmpl::FieldKind::kNumeric);
    }
    return f;
  }
  if (ctx.manifest) {
    for (const auto& in : ctx.manifest->inputs) {
      if (in.kind == tmpl::FieldKind::kNumeric) f.emplace_back(in.name, false);
      if (in.kind == tmpl::FieldKind::kCategorical) f.emplace_back(in.name, true);
    }
  }
  return f;
}

// One candidate per grid point; the best holdout accuracy wins, ties go to
// the earliest point.
void train_select(OpContext& ctx, Family family) {
  const auto train = read_table(ctx, 0);
  const DatasetSnapshot holdout = ctx.inputs.size() > 1 ? read_table(ctx, 1) : DatasetSnapshot{};
  auto& metrics = *ctx.metrics;
  if (train.empty()) fail(ErrorCode::kValidation, "empty-data", "training set is empty");
  const auto labels = labels_of(train);
  const std::set<std::string> distinct(labels.begin(), labels.end());
  const auto grid = grid_points(ctx);

  Model best;
  if (distinct.size() < 2) {
    ctx.log("warning: training labels contain a single class; falling back to the majority model");
    metrics["degenerate_labels"] = 1;
    best = train_majority_model(train);
    if (!holdout.empty()) metrics["val_accuracy"] = accuracy_on(best, holdout, ctx.checkpoint);
  } else {
    if (family == Family::kLogReg && distinct.size() != 2) {
      fail(ErrorCode::kValidation, "label-arity",
           "logreg-binary needs exactly two labels, found " + std::to_string(distinct.size()));
    }
    const std::string text_field = ctx.param_string("text_field", default_text_field(ctx));
    models::TabularEncoder encoder;
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    std::string positive, negative;
    std::vector<std::pair<std::string, std::string>> docs;
    if (family == Family::kNaiveBayes) {
      const int tc = require_column(train, text_field, "text");
      const int lc = require_column(train, kLabelField, "label");
      for (const auto& r : train.rows) docs.emplace_back(r[tc], r[lc]);
    } else {
      negative = *distinct.begin();
      positive = *distinct.rbegin();
      positive = ctx.param_string("positive_label", positive);
      if (!distinct.count(positive)) bad_param("positive_label", "is not one of the training labels");
      negative = *distinct.begin() == positive ? *distinct.rbegin() : *distinct.begin();
      const auto features = default_lr_features(ctx);
      if (features.empty()) fail(ErrorCode::kValidation, "no-features", "logreg-binary needs at least one feature");
      for (const auto& [f, _] : features) require_column(train, f, "feature");
      std::vector<models::TabularEncoder::CellGetter> getters;
      for (const auto& r : train.rows) {
        getters.push_back([&train, &r](const std::string& f) -> std::string_view { return r[train.column(f)]; });
      }
      encoder = models::TabularEncoder::fit(features, getters);
      for (std::size_t i = 0; i < train.rows.size(); ++i) {
        x.push_back(encoder.encode(getters[i]));
        y.push_back(labels[i] == positive ? 1 : 0);
      }
    }

    double best_score = -1;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ctx.checkpoint();
      Model m;
      m.family = family;
      if (family == Family::kNaiveBayes) {
        const double alpha = point_number(grid[i], "alpha", 1.0);
        m.body = models::nb_train(docs, alpha);
        m.binding = {{"text_field", text_field}};
        ctx.log("candidate " + std::to_string(i) + ": alpha=" + json(alpha).dump());
      } else {
        const double lr = point_number(grid[i], "lr", 0.1);
        const double iters = point_number(grid[i], "iters", 1000);
        if (iters != std::floor(iters) || iters < 1 || iters > 1e7) bad_param("iters", "must be a positive integer");
        m.body = models::logreg_train(x, y, encoder.feature_names(), lr, static_cast<int>(iters));
        m.binding = {{"encoder", encoder.to_json()}, {"positive_label", positive}, {"negative_label", negative}};
        ctx.log("candidate " + std::to_string(i) + ": lr=" + json(lr).dump() + " iters=" + json(iters).dump());
      }
      const double score = holdout.empty() ? 0.0 : accuracy_on(m, holdout, ctx.checkpoint);
      if (!holdout.empty()) metrics["candidate." + std::to_string(i) + ".val_accuracy"] = score;
      if (i == 0 || score > best_score) {
        best_score = score;
        best_index = i;
        best = std::move(m);
      }
    }
    metrics["candidates"] = static_cast<double>(grid.size());
    metrics["selected_candidate"] = static_cast<double>(best_index);
    for (const auto& [k, v] : grid[best_index].items()) {
      if (v.is_number()) metrics["selected." + k] = v.get<double>();
    }
    if (!holdout.empty()) metrics["val_accuracy"] = best_score;
  }
  if (holdout.empty()) metrics["holdout_empty"] = 1;
  ctx.write_output(0, models::serialize_model(best));
}

void op_connector_load(OpContext& ctx) {
  const auto t = read_table(ctx, 0);
  (*ctx.metrics)["rows_loaded"] = static_cast<double>(t.row_count());
  ctx.log("loaded " + std::to_string(t.row_count()) + " rows, digest " + t.digest);
  write_table(ctx, 0, t);
}

void op_augment_none(OpContext& ctx) { ctx.write_output(0, ctx.read_input(0)); }

void op_split_holdout(OpContext& ctx) {
  const double ratio = ctx.param_number("ratio", 0.8);
  if (!(ratio > 0 && ratio < 1)) bad_param("ratio", "must lie strictly between 0 and 1");
  const auto seed = ctx.param_int("seed", 17);
  const auto t = read_table(ctx, 0);
  if (t.empty()) fail(ErrorCode::kValidation, "empty-data", "cannot split an empty dataset");
  std::vector<std::size_t> idx(t.row_count());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(static_cast<std::uint64_t>(seed));
  rng.shuffle(idx);
  const std::size_t n_train = split_train_size(idx.size(), ratio);
  const std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<long>(n_train));
  const std::vector<std::size_t> holdout(idx.begin() + static_cast<long>(n_train), idx.end());
  (*ctx.metrics)["train_rows"] = static_cast<double>(train.size());
  (*ctx.metrics)["holdout_rows"] = static_cast<double>(holdout.size());
  ctx.log("split " + std::to_string(t.row_count()) + " rows into " + std::to_string(train.size()) + "/" +
          std::to_string(holdout.size()));
  write_table(ctx, 0, subset(t, train));
  write_table(ctx, 1, subset(t, holdout));
}

void op_train_majority(OpContext& ctx) {
  const auto train = read_table(ctx, 0);
  if (train.empty()) fail(ErrorCode::kValidation, "empty-data", "training set is empty");
  const auto m = train_majority_model(train);
  if (ctx.inputs.size() > 1) {
    const auto holdout = read_table(ctx, 1);
    if (holdout.empty()) {
      (*ctx.metrics)["holdout_empty"] = 1;
    } else {
      (*ctx.metrics)["val_accuracy"] = accuracy_on(m, holdout, ctx.checkpoint);
    }
  }
  ctx.write_output(0, models::serialize_model(m));
}

void op_train_select(OpContext& ctx) {
  const auto family = ctx.param_string("family", "");
  if (family == "nb-multinomial") return train_select(ctx, Family::kNaiveBayes);
  if (family == "logreg-binary") return train_select(ctx, Family::kLogReg);
  bad_param("family", "must be nb-multinomial or logreg-binary");
}

void op_index_tfidf(OpContext& ctx) {
  const auto t = read_table(ctx, 0);
  const auto text_field = ctx.param_string("text_field", default_text_field(ctx));
  const auto id_field = ctx.param_string("id_field", "id");
  const auto ts_field = ctx.param_string("timestamp_field", "");
  const auto status_field = ctx.param_string("status_field", "status");
  const int tc = require_column(t, text_field, "text");
  const int ic = require_column(t, id_field, "id");
  const int sc = t.column(status_field);
  const int tsc = ts_field.empty() ? -1 : require_column(t, ts_field, "timestamp");
  std::vector<models::TfidfDocument> docs;
  for (const auto& r : t.rows) {
    models::TfidfDocument d{r[ic], r[tc], 0, sc >= 0 ? r[sc] : ""};
    if (tsc >= 0) d.timestamp = parse_rfc3339(r[tsc]).value_or(0);
    docs.push_back(std::move(d));
  }
  ctx.checkpoint();
  Model m;
  m.family = Family::kTfidf;
  m.body = models::tfidf_index(docs);
  const auto compare_to = ctx.param_string("compare_to", "");
  static const std::set<std::string> kStatuses = {"", "any", "open", "closed", "completed"};
  if (!kStatuses.count(compare_to)) bad_param("compare_to", "must be one of open, closed, completed");
  const auto window = ctx.param_int("time_window_days", 0);
  if (window < 0) bad_param("time_window_days", "must not be negative");
  const auto top_k = ctx.param_int("top_k", 5);
  if (top_k < 1) bad_param("top_k", "must be at least 1");
  m.binding = {{"text_field", text_field},     {"id_field", id_field},    {"timestamp_field", ts_field},
               {"status_field", status_field}, {"compare_to", compare_to}, {"time_window_days", window},
               {"top_k", top_k}};
  (*ctx.metrics)["indexed_docs"] = static_cast<double>(docs.size());
  (*ctx.metrics)["vocabulary_size"] = static_cast<double>(m.tfidf().vocabulary.size());
  ctx.write_output(0, models::serialize_model(m));
}

void op_eval_classification(OpContext& ctx) {
  const auto m = models::deserialize_model(ctx.read_input(0));
  if (m.family == Family::kTfidf) {
    fail(ErrorCode::kValidation, "model-kind", "eval.classification cannot score a tfidf-knn model");
  }
  const auto holdout = read_table(ctx, 1);
  auto& metrics = *ctx.metrics;
  json report = {{"holdout_rows", holdout.row_count()}};
  if (holdout.empty()) {
    metrics["holdout_empty"] = 1;
    ctx.write_output(0, report.dump(2));
    return;
  }
  const int lc = require_column(holdout, kLabelField, "label");
  std::map<std::string, std::map<std::string, std::size_t>> confusion;  // truth -> predicted -> n
  std::set<std::string> classes;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < holdout.rows.size(); ++i) {
    if (i % 256 == 0) ctx.checkpoint();
    const auto& truth = holdout.rows[i][lc];
    const auto pred = models::predict(m, row_getter(holdout, holdout.rows[i])).label.value_or("");
    ++confusion[truth][pred];
    classes.insert(truth);
    classes.insert(pred);
    if (pred == truth) ++correct;
  }
  const double n = static_cast<double>(holdout.rows.size());
  metrics["val_accuracy"] = static_cast<double>(correct) / n;
  metrics["holdout_rows"] = n;
  for (const auto& c : classes) {
    double tp = 0, predicted = 0, actual = 0;
    for (const auto& [truth, row] : confusion) {
      for (const auto& [pred, k] : row) {
        if (pred == c) predicted += static_cast<double>(k);
        if (truth == c) actual += static_cast<double>(k);
        if (pred == c && truth == c) tp += static_cast<double>(k);
      }
    }
    metrics["precision." + c] = predicted > 0 ? tp / predicted : 0.0;
    metrics["recall." + c] = actual > 0 ? tp / actual : 0.0;
  }
  report["classes"] = classes;
  report["confusion"] = confusion;
  report["accuracy"] = metrics["val_accuracy"];
  if (ctx.report) (*ctx.report)["confusion"] = confusion;
  ctx.write_output(0, report.dump(2));
}

// Mean over documents of the best cosine to any other document.
void op_eval_similarity(OpContext& ctx) {
  const auto m = models::deserialize_model(ctx.read_input(0));
  if (m.family != Family::kTfidf) {
    fail(ErrorCode::kValidation, "model-kind", "eval.similarity needs a tfidf-knn model");
  }
  const auto& ix = m.tfidf();
  auto& metrics = *ctx.metrics;
  json report = {{"documents", ix.size()}};
  if (ix.size() < 2) {
    metrics["holdout_empty"] = 1;
    ctx.write_output(0, report.dump(2));
    return;
  }
  double total = 0;
  for (std::size_t i = 0; i < ix.size(); ++i) {
    if (i % 64 == 0) ctx.checkpoint();
    double best = 0;
    for (std::size_t j = 0; j < ix.size(); ++j) {
      if (j != i) best = std::max(best, models::tfidf_doc_similarity(ix, i, j));
    }
    total += best;
  }
  metrics["val_score"] = total / static_cast<double>(ix.size());
  report["mean_top1_score"] = metrics["val_score"];
  ctx.write_output(0, report.dump(2));
}

struct Registered {
  const char* id;
  OpArity arity;
  OpFn fn;
};

const std::vector<Registered>& registry() {
  static const std::vector<Registered> r = {
      {"connector.load", {1, 1, 1}, op_connector_load},
      {"augment.none", {1, 1, 1}, op_augment_none},
      {"split.holdout", {1, 1, 2}, op_split_holdout},
      {"train.select", {1, 2, 1}, op_train_select},
      {"train.nb_grid", {1, 2, 1}, [](OpContext& c) { train_select(c, Family::kNaiveBayes); }},
      {"train.logreg", {1, 2, 1}, [](OpContext& c) { train_select(c, Family::kLogReg); }},
      {"train.majority", {1, 2, 1}, op_train_majority},
      {"index.tfidf", {1, 1, 1}, op_index_tfidf},
      {"eval.classification", {2, 2, 1}, op_eval_classification},
      {"eval.similarity", {1, 2, 1}, op_eval_similarity},
  };
  return r;
}

const Registered* find(std::string_view op) {
  for (const auto& r : registry()) {
    if (op == r.id) return &r;
  }
  return nullptr;
}

}  // namespace

std::string OpContext::read_input(std::size_t i) const { return read_file(in_dir / inputs.at(i)); }

void OpContext::write_output(std::size_t i, std::string_view bytes) const {
  write_file_atomic(out_dir / outputs.at(i), bytes);
}

double OpContext::param_number(const std::string& name, double fallback) const {
  return point_number(params, name, fallback);
}

std::int64_t OpContext::param_int(const std::string& name, std::int64_t fallback) const {
  if (!params.contains(name) || params[name].is_null()) return fallback;
  const auto& v = params[name];
  if (v.is_number_integer()) return v.get<std::int64_t>();
  double d = point_number(params, name, static_cast<double>(fallback));
  if (d != std::floor(d) || std::abs(d) > 9e15) bad_param(name, "must be an integer");
  return static_cast<std::int64_t>(d);
}

std::string OpContext::param_string(const std::string& name, const std::string& fallback) const {
  if (!params.contains(name) || params[name].is_null()) return fallback;
  const auto& v = params[name];
  return v.is_string() ? v.get<std::string>() : v.dump();
}

bool is_builtin_op(std::string_view op) { return find(op) != nullptr; }

const std::vector<std::string>& builtin_op_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& r : registry()) v.emplace_back(r.id);
    return v;
  }();
  return ids;
}

const OpFn& builtin_op(std::string_view op) {
  const auto* r = find(op);
  if (!r) fail(ErrorCode::kValidation, "unknown-op", "unknown builtin op '" + std::string(op) + "'");
  return r->fn;
}

OpArity op_arity(std::string_view op) {
  const auto* r = find(op);
  if (!r) fail(ErrorCode::kValidation, "unknown-op", "unknown builtin op '" + std::string(op) + "'");
  return r->arity;
}

std::size_t split_train_size(std::size_t n, double ratio) {
  // The epsilon absorbs products such as 0.7 * 10 = 7.000000000000001.
  const double t = std::ceil(ratio * static_cast<double>(n) - 1e-9);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, t)));
}

}  // namespace modelforge::executor
