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

// Acceptance runner. Prints one PASS/FAIL line per primary criterion and
// exits non-zero when any of them fails.

#include <modelforge/modelforge.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/common/random.h"
#include "modelforge/common/time.h"
#include "modelforge/common/yaml.h"
#include "modelforge/connectors/snapshot.h"
#include "modelforge/controller/controller.h"
#include "modelforge/controller/lifecycle.h"
#include "modelforge/gateway/gateway.h"
#include "modelforge/models/logreg.h"
#include "modelforge/models/naive_bayes.h"
#include "modelforge/monitors/psi.h"
#include "modelforge/template/config.h"
#include "support/support.h"

namespace {

using namespace modelforge;
namespace fs = std::filesystem;
using nlohmann::json;
using controller::Controller;
using controller::Event;
using controller::LifecycleState;
using K = controller::EventKind;
using S = controller::LifecycleState;
using mftest::TempDir;
using Clock_ = std::chrono::steady_clock;

const Timestamp kStart = *parse_rfc3339("2026-01-01T00:00:00Z");

struct Outcome {
  bool pass = false;
  std::string note;
};

Outcome verdict(bool pass, std::string note) { return {pass, std::move(note)}; }

double seconds_since(Clock_::time_point t0) {
  return std::chrono::duration<double>(Clock_::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

controller::PlatformOptions platform_options(const TempDir& tmp) {
  controller::PlatformOptions o;
  o.data_dir = tmp / "data";
  return o;
}

void publish_all(Controller& c) {
  for (const char* name : {"fcr", "similarity", "approval"}) c.publish_template(mftest::shipped_template(name));
}

std::vector<Event> read_journal(const fs::path& path) {
  std::vector<Event> events;
  std::istringstream lines(read_file(path));
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) events.push_back(Event::from_json(json::parse(line)));
  }
  return events;
}

std::size_t count_events(const Controller& c, const std::string& id, K kind, const std::string& reason = "") {
  std::size_t n = 0;
  for (const auto& e : c.journal()) {
    if (e.kind != kind || e.model_id != id) continue;
    if (!reason.empty() && e.payload.value("reason", "") != reason) continue;
    ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// 1. End-to-end lifecycle over REST.

class Http {
 public:
  explicit Http(mf_client* c) : c_(c) {}

  std::pair<int, json> call(const std::string& method, const std::string& path, const std::string& body = "",
                            const char* content_type = "application/json") {
    int status = 0;
    char* out = nullptr;
    std::size_t len = 0;
    const auto st = mf_client_request(c_, method.c_str(), path.c_str(), body.empty() ? nullptr : content_type,
                                      body.data(), body.size(), nullptr, &status, &out, &len);
    if (st != MF_OK) throw std::runtime_error(method + " " + path + ": " + mf_last_error());
    const std::string text(out ? out : "", len);
    mf_free(out);
    return {status, json::parse(text, nullptr, false)};
  }

 private:
  mf_client* c_;
};

std::string take(char* s) {
  std::string out = s ? s : "";
  mf_free(s);
  return out;
}

Outcome criterion_end_to_end() {
  TempDir tmp("acc-e2e");
  const auto t0 = Clock_::now();
  const json overrides = {{"data_dir", (tmp / "data").string()}, {"bind", "127.0.0.1:0"}, {"token", "acc"}};
  mf_platform* p = nullptr;
  if (mf_platform_open(nullptr, overrides.dump().c_str(), &p) != MF_OK) {
    return verdict(false, std::string("platform open: ") + mf_last_error());
  }
  mf_server* server = nullptr;
  int port = 0;
  mf_client* client = nullptr;
  std::string failure;
  std::vector<std::string> ids;
  try {
    if (mf_server_start(p, &server, &port) != MF_OK) throw std::runtime_error(mf_last_error());
    if (mf_client_new(("http://127.0.0.1:" + std::to_string(port)).c_str(), "acc", &client) != MF_OK) {
      throw std::runtime_error(mf_last_error());
    }
    Http http(client);

    char* out = nullptr;
    if (mf_corpus_generate(R"({"seed": 17, "n_rows": 500})", &out) != MF_OK) throw std::runtime_error(mf_last_error());
    const auto csv = tmp / "corpus.csv";
    write_file_atomic(csv, take(out));

    for (const char* name : {"fcr", "similarity", "approval"}) {
      const auto pkg = tmp / (std::string(name) + ".tmpl.tgz");
      if (mf_template_package(mftest::template_dir(name).c_str(), pkg.c_str(), &out) != MF_OK) {
        throw std::runtime_error(mf_last_error());
      }
      mf_free(out);
      const auto [st, body] = http.call("POST", "/v1/templates", read_file(pkg), "application/octet-stream");
      if (st != 201) throw std::runtime_error(std::string("publish ") + name + " -> " + std::to_string(st));
    }

    for (const auto& cfg : {mftest::fcr_config(csv), mftest::similarity_config(csv), mftest::approval_config(csv)}) {
      const auto [st, body] = http.call("POST", "/v1/models", cfg.dump());
      if (st != 201) throw std::runtime_error("create -> " + std::to_string(st) + " " + body.dump());
      ids.push_back(body["model_id"]);
    }

    auto state_of = [&](const std::string& id) { return http.call("GET", "/v1/models/" + id).second["state"]; };
    auto settle = [&](const std::string& id, const std::set<std::string>& targets) {
      std::string s;
      const bool ok = mftest::eventually(
          [&] {
            s = state_of(id).get<std::string>();
            return targets.count(s) > 0;
          },
          std::chrono::milliseconds(50000));
      if (!ok) throw std::runtime_error(id + " stuck in " + s);
      return s;
    };
    for (const auto& id : ids) {
      if (settle(id, {"PendingApproval", "Serving", "TrainingFailed"}) == "PendingApproval") {
        const auto [st, body] = http.call("POST", "/v1/models/" + id + "/approve");
        if (st != 200) throw std::runtime_error("approve -> " + std::to_string(st) + " " + body.dump());
      }
    }
    for (const auto& id : ids) {
      if (settle(id, {"Serving", "TrainingFailed"}) != "Serving") throw std::runtime_error(id + " failed to train");
    }

    const auto rows = corpus::generate_corpus({});
    const auto& row = rows.front();
    const std::vector<json> requests = {
        {{"description", row.description}},
        {{"id", row.id}, {"description", row.description}, {"status", row.status},
         {"opened_at", format_rfc3339(row.opened_at)}},
        {{"cost", row.cost}, {"priority", row.priority}}};
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto [st, inf] = http.call("POST", "/v1/models/" + ids[i] + "/infer", requests[i].dump());
      if (st != 200) throw std::runtime_error("infer -> " + std::to_string(st) + " " + inf.dump());
      if (!inf["output"].contains("label")) continue;  // ranked lists carry no label to confirm
      const json fb = {{"inference_id", inf["inference_id"]}, {"ground_truth", inf["output"]["label"]}};
      const auto [fst, fbody] = http.call("POST", "/v1/models/" + ids[i] + "/feedback", fb.dump());
      if (fst != 200) throw std::runtime_error("feedback -> " + std::to_string(fst) + " " + fbody.dump());
    }
    for (const auto& id : ids) {
      if (state_of(id) != "Serving") throw std::runtime_error(id + " is not serving at the end");
    }
  } catch (const std::exception& e) {
    failure = e.what();
  }
  const double elapsed = seconds_since(t0);
  if (client) mf_client_free(client);
  if (server) {
    mf_server_stop(server);
    mf_server_free(server);
  }
  mf_platform_close(p);
  if (!failure.empty()) return verdict(false, failure);

  const auto state_dir = tmp / "data" / "state";
  const auto replayed = controller::replay(read_journal(state_dir / "events.jsonl"));
  const bool bit_equal = replayed.to_json().dump() == read_file(state_dir / "snapshot.json");
  bool all_serving = replayed.models.size() == 3;
  for (const auto& [_, m] : replayed.models) all_serving = all_serving && m.state == S::kServing;
  return verdict(elapsed < 60 && bit_equal && all_serving,
                 "elapsed " + fmt(elapsed) + " s, replay bit-equal=" + (bit_equal ? "yes" : "no") +
                     ", all serving=" + (all_serving ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 2. Default-fill over every present/absent combination of five parameters.

Outcome criterion_merge_semantics() {
  std::vector<std::string> diags;
  const auto manifest = tmpl::manifest_from_json(parse_yaml(R"(name: merge-fixture
version: 1.0.0
description: five parameters
inputs:
  - {name: text, kind: text, required: true}
output: {kind: class-label, label_set: [a, b]}
params:
  - {name: alpha, type: float, default: 1.0}
  - {name: window_days, type: int, default: 30}
  - {name: target_column, type: string, required: true}
  - {name: mode, type: enum, enum_values: [fast, slow]}
  - {name: verbose, type: bool}
resources: {cpu_millis: 100, memory_mb: 64}
)",
                                                              "m.yaml"),
                                                   "m.yaml", diags);
  if (!diags.empty()) return verdict(false, "fixture manifest invalid: " + diags.front());

  // The oracle's own copy of the declarations.
  struct Decl {
    std::string name;
    json supplied;
    std::optional<json> fallback;
    bool required;
  };
  const std::vector<Decl> decls = {{"alpha", 0.25, json(1.0), false},
                                   {"window_days", 7, json(30), false},
                                   {"target_column", "wo_code", std::nullopt, true},
                                   {"mode", "slow", std::nullopt, false},
                                   {"verbose", true, std::nullopt, false}};

  int mismatches = 0;
  for (unsigned mask = 0; mask < 32; ++mask) {
    tmpl::ModelConfig cfg;
    cfg.template_ref = "merge-fixture@1.0.0";
    cfg.inputs = {{"text", "description"}};
    cfg.output = "label";
    cfg.args = json::object();
    std::map<std::string, json> expected;
    std::set<std::string> missing;
    for (std::size_t i = 0; i < decls.size(); ++i) {
      const auto& d = decls[i];
      if (mask & (1u << i)) {
        cfg.args[d.name] = d.supplied;
        expected[d.name] = d.supplied;
      } else if (d.fallback) {
        expected[d.name] = *d.fallback;
      } else if (d.required) {
        missing.insert(d.name);
      } else {
        expected[d.name] = nullptr;
      }
    }
    try {
      const auto resolved = tmpl::merge_config(manifest, cfg);
      if (!missing.empty() || resolved.values != expected) ++mismatches;
    } catch (const Error& e) {
      std::set<std::string> reported;
      for (const auto& d : e.detail()) {
        if (d.value("kind", "") == "missing-required") reported.insert(d.value("field", ""));
      }
      if (missing.empty() || e.kind() != "missing-required" || reported != missing) ++mismatches;
    }
  }
  return verdict(mismatches == 0, "32 combinations, mismatches=" + std::to_string(mismatches));
}

// ---------------------------------------------------------------------------
// 3. Classifier oracles.

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Enumerates classes, sums log-probabilities term by term and normalizes with
// log-sum-exp. One smoothing slot is reserved for unseen tokens.
std::map<std::string, double> nb_brute_force(const std::vector<std::pair<std::string, std::string>>& docs,
                                             double alpha, const std::string& query) {
  std::map<std::string, std::map<std::string, double>> counts;
  std::map<std::string, double> totals, class_docs;
  std::set<std::string> vocab;
  for (const auto& [text, label] : docs) {
    class_docs[label] += 1;
    for (const auto& w : split_words(text)) {
      counts[label][w] += 1;
      totals[label] += 1;
      vocab.insert(w);
    }
  }
  std::map<std::string, double> joint;
  for (const auto& [label, n] : class_docs) {
    double s = std::log(n / static_cast<double>(docs.size()));
    const double denom = totals[label] + alpha * (static_cast<double>(vocab.size()) + 1.0);
    for (const auto& w : split_words(query)) s += std::log(((vocab.count(w) ? counts[label][w] : 0.0) + alpha) / denom);
    joint[label] = s;
  }
  double mx = -INFINITY;
  for (const auto& [_, v] : joint) mx = std::max(mx, v);
  double z = 0;
  for (const auto& [_, v] : joint) z += std::exp(v - mx);
  for (auto& [_, v] : joint) v = v - mx - std::log(z);
  return joint;
}

Outcome criterion_classifier_oracles() {
  const std::vector<std::pair<std::string, std::string>> docs = {
      {"leak in pipe", "PLUMB"}, {"light broken", "ELEC"}, {"pipe burst water", "PLUMB"}};
  const auto model = models::nb_train(docs, 1.0);
  double nb_err = 0;
  for (const std::string q : {"water pipe", "", "leak in pipe", "light broken", "pipe burst water", "zzz unknown",
                              "light light pipe", "broken water leak"}) {
    const auto pred = models::nb_predict(model, q);
    const auto oracle = nb_brute_force(docs, 1.0, q);
    if (pred.log_posteriors.size() != oracle.size()) return verdict(false, "class count differs for '" + q + "'");
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
      nb_err = std::max(nb_err, std::abs(pred.log_posteriors[c] - oracle.at(model.classes[c])));
    }
  }
  const bool nb_label = models::nb_predict(model, "water pipe").label == "PLUMB";

  Rng rng(31337);
  const double h = 1e-5;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.below(20);
    models::Matrix x(n, std::vector<double>(5));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : x[i]) v = rng.unit() * 6 - 3;
      y[i] = static_cast<int>(rng.below(2));
    }
    std::vector<double> w(5);
    for (auto& v : w) v = rng.unit() * 2 - 1;
    const double b = rng.unit() - 0.5;
    std::vector<double> gw;
    double gb = 0;
    models::log_loss_gradient(x, y, w, b, gw, gb);
    auto rel = [](double num, double ana) {
      return std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-8});
    };
    for (std::size_t j = 0; j < 5; ++j) {
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double num = (models::mean_log_loss(x, y, wp, b) - models::mean_log_loss(x, y, wm, b)) / (2 * h);
      worst = std::max(worst, rel(num, gw[j]));
    }
    const double numb = (models::mean_log_loss(x, y, w, b + h) - models::mean_log_loss(x, y, w, b - h)) / (2 * h);
    worst = std::max(worst, rel(numb, gb));
  }
  return verdict(nb_err <= 1e-9 && nb_label && worst <= 1e-5,
                 "NB max |err|=" + fmt(nb_err) + ", gradient max rel err=" + fmt(worst) + " over 100 instances");
}

// ---------------------------------------------------------------------------
// 4. Learnability against the majority baseline.

Outcome criterion_learnability() {
  TempDir tmp("acc-learn");
  VirtualClock clock(kStart);
  store::Store st(tmp / "store", clock);

  const auto fcr_csv = mftest::write_corpus(tmp.path(), {.seed = 17, .n_rows = 500, .n_codes = 40}, "fcr.csv");
  auto timed = [&](const executor::RunRequest& req, double& secs) {
    const auto t0 = Clock_::now();
    auto run = executor::run_pipeline(req, tmp / "runs", st, clock);
    secs = seconds_since(t0);
    if (run.status != executor::RunStatus::kSucceeded) {
      throw std::runtime_error("run " + req.run_id + " " + std::string(executor::to_string(run.status)) + ": " +
                               run.error);
    }
    return run.metrics.at("val_accuracy");
  };

  auto fcr = mftest::prepare_run("fcr", mftest::fcr_config(fcr_csv), kStart, "fcr");
  auto baseline = fcr;
  baseline.run_id = "majority";
  for (auto& step : baseline.bundle.pipeline.steps) {
    if (step.name == "train") {
      step.op = "train.majority";
      step.params = json::object();
    }
  }
  double t_fcr = 0, t_base = 0, t_appr = 0;
  const double acc_fcr = timed(fcr, t_fcr);
  const double acc_base = timed(baseline, t_base);

  const auto appr_csv = mftest::write_corpus(tmp.path(), {.seed = 17, .approval_noise = 0.0}, "approval.csv");
  const double acc_appr = timed(mftest::prepare_run("approval", mftest::approval_config(appr_csv), kStart, "appr"), t_appr);

  const bool pass = acc_fcr - acc_base >= 0.30 && acc_appr == 1.0 && t_fcr < 10 && t_appr < 10;
  return verdict(pass, "fcr " + fmt(acc_fcr) + " vs majority " + fmt(acc_base) + " (margin " +
                           fmt(acc_fcr - acc_base) + "), approval " + fmt(acc_appr) + ", runtimes " + fmt(t_fcr) +
                           " s / " + fmt(t_appr) + " s");
}

// ---------------------------------------------------------------------------
// 5. Drift.

Outcome criterion_drift() {
  Rng rng(99);
  int nonzero = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> h(1 + rng.below(20));
    for (auto& v : h) v = rng.below(4) == 0 ? 0.0 : static_cast<double>(rng.below(1000));
    h[rng.below(h.size())] += 1;  // an empty histogram has no distribution
    if (monitors::compute_psi(h, h) != 0.0) ++nonzero;
  }

  TempDir tmp("acc-drift");
  const auto csv = mftest::write_corpus(tmp.path(), {});
  VirtualClock clock(kStart);
  Controller c(platform_options(tmp), clock);
  publish_all(c);
  auto cfg = mftest::approval_config(csv);
  cfg["auto_approve"] = true;
  const auto shifted_id = c.create_model(cfg).model_id;
  const auto steady_id = c.create_model(cfg).model_id;
  c.wait_idle();
  if (c.get_model(shifted_id).state != S::kServing || c.get_model(steady_id).state != S::kServing) {
    return verdict(false, "fixture models did not reach Serving");
  }

  // Shifted window: every request is an expensive critical job.
  for (int i = 0; i < 120; ++i) {
    c.infer(shifted_id, {{"cost", 4800 + static_cast<int>(rng.below(200))}, {"priority", "critical"}});
  }
  // In-distribution window: rows drawn from the training corpus itself.
  const auto rows = corpus::generate_corpus({});
  for (std::size_t i = 0; i < 200; ++i) c.infer(steady_id, {{"cost", rows[i].cost}, {"priority", rows[i].priority}});

  clock.advance(2 * kMinute);
  c.tick();
  const auto shifted = c.last_drift(shifted_id);
  const auto steady = c.last_drift(steady_id);
  c.wait_idle();
  for (int i = 0; i < 3; ++i) {
    clock.advance(2 * kMinute);
    c.tick();
    c.wait_idle();
  }

  // The drift event must be answered directly by a drift retrain.
  std::size_t pairs = 0;
  std::optional<K> previous;
  for (const auto& e : c.journal()) {
    if (e.model_id != shifted_id) continue;
    if (previous == K::kDriftDetected && e.kind == K::kRetrainScheduled && e.payload.value("reason", "") == "drift") {
      ++pairs;
    }
    previous = e.kind;
  }
  const auto drift_events = count_events(c, shifted_id, K::kDriftDetected);
  const auto drift_retrains = count_events(c, shifted_id, K::kRetrainScheduled, "drift");
  const bool steady_ok = steady && steady->status == "ok" && !steady->drifted &&
                         count_events(c, steady_id, K::kDriftDetected) == 0;
  const bool pass = nonzero == 0 && shifted && shifted->drifted && drift_events == 1 && drift_retrains == 1 &&
                    pairs == 1 && steady_ok;
  std::string note = "PSI(h,h)!=0 in " + std::to_string(nonzero) + "/1000; shifted drifted=" +
                     (shifted && shifted->drifted ? "true" : "false") + ", DriftDetected=" +
                     std::to_string(drift_events) + ", drift retrains=" + std::to_string(drift_retrains) +
                     ", pairs=" + std::to_string(pairs) + "; in-distribution drifted=" +
                     (steady ? (steady->drifted ? "true" : "false") : "n/a");
  return verdict(pass, note);
}

// ---------------------------------------------------------------------------
// 6. Approval gate: randomized event orders and an exhaustive search.

json created_payload() {
  return {{"template_ref", store::TemplateRef{"fcr", "1.0.0", "abc"}.to_json()},
          {"config", tmpl::ModelConfig::from_json({{"template", "fcr@1.0.0"}, {"auto_approve", false}}).to_json()},
          {"resolved", tmpl::ResolvedConfig{}.to_json()},
          {"approval_required", true}};
}

json succeeded_payload(int version) {
  return {{"version", version},
          {"run_id", "r"},
          {"artifact", store::ArtifactKey{"runs", "r/model", "d"}.to_json()},
          {"metrics", {{"val_accuracy", 0.9}}},
          {"dataset_digest", "ds"}};
}

// Runtime inputs the controller may see at any moment, with the versions an
// adversarial runtime might name.
std::vector<std::pair<K, json>> alphabet(int max_version) {
  std::vector<std::pair<K, json>> out = {
      {K::kRetrainScheduled, {{"reason", "manual"}}},
      {K::kRetrainScheduled, {{"reason", "drift"}}},
      {K::kDataFetched, {{"dataset_digest", "ds"}}},
      {K::kDataFetched, {{"dataset_digest", "ds"}, {"scheduled", true}}},
      {K::kTrainingStarted, {{"run_id", "r"}}},
      {K::kTrainingFailed, {{"error", "boom"}}},
      {K::kModelApproved, json::object()},
      {K::kModelRejected, json::object()},
      {K::kDriftDetected, json::object()},
      {K::kAccuracyDegraded, json::object()},
      {K::kModelArchived, json::object()},
      {K::kFeedbackOverwritten, json::object()},
  };
  for (int v = 1; v <= max_version; ++v) {
    out.push_back({K::kTrainingSucceeded, succeeded_payload(v)});
    out.push_back({K::kModelPendingApproval, {{"version", v}}});
    out.push_back({K::kModelApproved, {{"version", v}}});
    out.push_back({K::kModelDeployed, {{"version", v}}});
    out.push_back({K::kModelDeployed, {{"version", v}, {"rollback", true}}});
    out.push_back({K::kModelArchived, {{"version", v}}});
  }
  return out;
}

Event make_event(std::uint64_t seq, K kind, json payload) {
  Event e;
  e.seq = seq;
  e.at = 0;
  e.kind = kind;
  e.model_id = "m";
  e.payload = std::move(payload);
  return e;
}

// Applies `e` when it is legal. Tracks which versions a ModelApproved event
// has covered and counts deploys of versions it has not.
struct GateTracker {
  std::set<int> approved;
  std::size_t deploys = 0;
  std::size_t violations = 0;

  bool step(controller::PlatformState& st, const Event& e) {
    const auto before = st.models.at("m").candidate_version;
    try {
      controller::apply(st, e);
    } catch (const Error&) {
      return false;
    }
    if (e.kind == K::kModelApproved && before) approved.insert(*before);
    if (e.kind == K::kModelDeployed) {
      ++deploys;
      if (!approved.count(e.payload["version"].get<int>())) ++violations;
    }
    return true;
  }
};

Outcome criterion_approval_gate() {
  const auto letters = alphabet(4);
  Rng rng(2718);
  std::size_t deploys = 0, violations = 0, approvals = 0, events = 0;
  for (int run = 0; run < 1000; ++run) {
    controller::PlatformState st;
    std::uint64_t seq = 0;
    controller::apply(st, make_event(++seq, K::kModelCreated, created_payload()));
    GateTracker gate;
    std::deque<Event> pending;  // follow-ups requested by decide(), delivered in random order
    auto feed = [&](const Event& e) {
      if (!gate.step(st, e)) return;
      ++events;
      if (e.kind == K::kModelApproved) ++approvals;
      for (const auto& a : controller::decide(st, e)) {
        if (a.type == controller::Action::Type::kEmit) pending.push_back(make_event(0, a.event.kind, a.event.payload));
        if (a.type == controller::Action::Type::kDeploy) {
          pending.push_back(make_event(0, K::kModelDeployed, {{"version", a.version}}));
        }
      }
    };
    for (int step = 0; step < 80; ++step) {
      Event e;
      if (!pending.empty() && rng.below(2) == 0) {
        const auto i = rng.below(pending.size());
        e = pending[i];
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        const auto& [kind, payload] = letters[rng.below(letters.size())];
        e = make_event(0, kind, payload);
        // Steer succeeded runs towards the next legal version so training completes often.
        if (kind == K::kTrainingSucceeded && rng.below(2) == 0) {
          e.payload = succeeded_payload(st.models.at("m").last_version + 1);
        }
      }
      e.seq = ++seq;
      feed(e);
    }
    deploys += gate.deploys;
    violations += gate.violations;
  }

  // Exhaustive closure over the transition table with versions bounded at 3.
  // Timestamps are all zero, so a model's JSON identifies its state.
  const auto bounded = alphabet(3);
  controller::PlatformState init;
  controller::apply(init, make_event(1, K::kModelCreated, created_payload()));
  std::map<std::string, std::pair<controller::PlatformState, std::set<int>>> seen;
  std::deque<std::string> queue;
  auto key_of = [](const controller::PlatformState& st, const std::set<int>& approved) {
    return st.models.at("m").to_json().dump() + json(approved).dump();
  };
  const auto k0 = key_of(init, {});
  seen[k0] = {init, {}};
  queue.push_back(k0);
  std::size_t transitions = 0, bfs_violations = 0, bfs_deploys = 0;
  while (!queue.empty()) {
    const auto [state, approved] = seen.at(queue.front());
    queue.pop_front();
    for (const auto& [kind, payload] : bounded) {
      auto next = state;
      GateTracker gate{approved};
      if (!gate.step(next, make_event(next.last_seq + 1, kind, payload))) continue;
      ++transitions;
      bfs_deploys += gate.deploys;
      bfs_violations += gate.violations;
      const auto& m = next.models.at("m");
      if (m.serving_version && !gate.approved.count(*m.serving_version)) ++bfs_violations;
      const auto k = key_of(next, gate.approved);
      if (!seen.count(k)) {
        seen[k] = {next, gate.approved};
        queue.push_back(k);
      }
    }
  }

  const bool pass = violations == 0 && bfs_violations == 0 && deploys > 0 && bfs_deploys > 0;
  return verdict(pass, "1000 fuzz runs: " + std::to_string(events) + " events, " + std::to_string(approvals) +
                           " approvals, " + std::to_string(deploys) + " deploys, " + std::to_string(violations) +
                           " violations; exhaustive: " + std::to_string(seen.size()) + " states, " +
                           std::to_string(transitions) + " transitions, " + std::to_string(bfs_violations) +
                           " violations");
}

// ---------------------------------------------------------------------------
// 7. Scale-to-zero under a virtual clock.

Outcome criterion_scale_to_zero() {
  TempDir tmp("acc-idle");
  const auto csv = mftest::write_corpus(tmp.path(), {});
  VirtualClock clock(kStart);
  auto options = platform_options(tmp);
  options.gateway.idle_timeout = 5 * kMinute;
  Controller c(options, clock);
  publish_all(c);
  auto cfg = mftest::fcr_config(csv);
  cfg["auto_approve"] = true;
  const auto id = c.create_model(cfg).model_id;
  c.wait_idle();
  if (c.get_model(id).state != S::kServing) return verdict(false, "fixture model did not reach Serving");

  using gateway::EndpointStatus;
  std::vector<std::tuple<EndpointStatus, std::uint64_t, std::uint64_t>> observed;
  auto record = [&] {
    const auto info = c.gateway().status(id);
    observed.emplace_back(info.status, info.loads, info.unloads);
  };
  const json req = {{"description", corpus::generate_corpus({}).front().description + " extra words"}};
  record();
  const auto before = c.infer(id, req).output.dump();
  clock.advance(4 * kMinute);
  c.tick();
  record();
  clock.advance(2 * kMinute);
  c.tick();
  record();
  const auto after = c.infer(id, req).output.dump();
  record();

  const decltype(observed) expected = {{EndpointStatus::kLoaded, 1, 0},
                                       {EndpointStatus::kLoaded, 1, 0},
                                       {EndpointStatus::kIdleUnloaded, 1, 1},
                                       {EndpointStatus::kLoaded, 2, 1}};
  std::string seq;
  for (const auto& [s, l, u] : observed) {
    seq += std::string(seq.empty() ? "" : " -> ") + std::string(gateway::to_string(s)) + "(" + std::to_string(l) +
           "/" + std::to_string(u) + ")";
  }
  const bool identical = before == after;
  return verdict(identical && observed == expected,
                 std::string("reload output identical=") + (identical ? "yes" : "no") + ", loads/unloads " + seq);
}

// ---------------------------------------------------------------------------
// 8. Version swap under 100 concurrent clients.

Outcome criterion_swap_atomicity() {
  TempDir tmp("acc-swap");
  const auto csv = mftest::write_corpus(tmp.path(), {});
  VirtualClock clock(kStart);
  Controller c(platform_options(tmp), clock);
  publish_all(c);
  auto cfg = mftest::fcr_config(csv);
  cfg["auto_approve"] = true;
  const auto id = c.create_model(cfg).model_id;
  c.wait_idle();
  if (c.get_model(id).serving_version != 1) return verdict(false, "fixture model did not serve version 1");

  constexpr int kClients = 100;
  std::atomic<bool> go{true};
  std::atomic<int> errors{0};
  std::vector<std::vector<std::pair<std::uint64_t, int>>> seen(kClients);
  std::vector<std::thread> clients;
  const json req = {{"description", "pipe leak near boiler"}};
  for (int t = 0; t < kClients; ++t) {
    clients.emplace_back([&, t] {
      while (go) {
        try {
          const auto r = c.infer(id, req);
          seen[t].emplace_back(r.sequence, r.model_version);
        } catch (...) {
          ++errors;
        }
      }
    });
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  c.train(id);
  const bool swapped = mftest::eventually([&] { return c.get_model(id).serving_version == 2; },
                                          std::chrono::milliseconds(60000));
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  go = false;
  for (auto& th : clients) th.join();

  std::size_t regressions = 0;
  std::vector<std::pair<std::uint64_t, int>> all;
  for (const auto& s : seen) {
    for (std::size_t i = 1; i < s.size(); ++i) regressions += s[i].second < s[i - 1].second;
    all.insert(all.end(), s.begin(), s.end());
  }
  std::sort(all.begin(), all.end());
  std::size_t cuts = 0;
  for (std::size_t i = 1; i < all.size(); ++i) cuts += all[i].second != all[i - 1].second;
  const bool both = !all.empty() && all.front().second == 1 && all.back().second == 2;
  return verdict(swapped && errors == 0 && regressions == 0 && cuts == 1 && both,
                 std::to_string(all.size()) + " requests from " + std::to_string(kClients) +
                     " clients, errors=" + std::to_string(errors.load()) + ", regressions=" +
                     std::to_string(regressions) + ", cut points=" + std::to_string(cuts));
}

// ---------------------------------------------------------------------------
// 9. Determinism of two full platform runs.

std::map<std::string, std::pair<std::string, std::string>> platform_run(const fs::path& csv) {
  TempDir tmp("acc-det");
  VirtualClock clock(kStart);
  Controller c(platform_options(tmp), clock);
  publish_all(c);
  for (auto cfg : {mftest::fcr_config(csv), mftest::similarity_config(csv), mftest::approval_config(csv)}) {
    cfg["auto_approve"] = true;
    c.create_model(cfg);
  }
  c.wait_idle();
  std::map<std::string, std::pair<std::string, std::string>> out;
  for (const auto& m : c.list_models()) {
    if (m.versions.empty()) throw std::runtime_error(m.model_id + " produced no version");
    const auto& v = m.versions.front();
    out[m.template_ref.name] = {v.artifact.digest, json(v.metrics).dump()};
  }
  c.shutdown();
  return out;
}

Outcome criterion_determinism() {
  TempDir tmp("acc-det-data");
  const auto csv = mftest::write_corpus(tmp.path(), {.seed = 17});
  const auto a = platform_run(csv);
  const auto b = platform_run(csv);
  std::size_t same = 0;
  for (const auto& [name, v] : a) {
    auto it = b.find(name);
    if (it != b.end() && it->second == v) ++same;
  }
  return verdict(a.size() == 3 && b.size() == 3 && same == 3,
                 std::to_string(same) + "/3 templates with identical artifact digests and metrics");
}

// ---------------------------------------------------------------------------
// 10. Locality instancing.

Outcome criterion_locality() {
  TempDir tmp("acc-local");
  const auto csv = mftest::write_corpus(tmp.path(), {});

  // Naive reading of the CSV text: the generator never quotes fields.
  std::map<std::string, std::multiset<std::string>> by_site;
  std::istringstream lines(read_file(csv));
  std::string line;
  std::getline(lines, line);  // header
  std::size_t total = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 10) return verdict(false, "unexpected CSV row: " + line);
    ++total;
    by_site[f[2]].insert(fmt(std::stod(f[6])) + "|" + f[7] + "|" + f[9]);
  }

  VirtualClock clock(kStart);
  Controller c(platform_options(tmp), clock);
  publish_all(c);
  std::map<std::string, std::string> ids;
  for (const std::string site : {"A", "B"}) {
    auto cfg = mftest::approval_config(csv, site);
    cfg["auto_approve"] = true;
    ids[site] = c.create_model(cfg).model_id;
  }
  c.wait_idle();

  std::string note;
  bool pass = by_site["A"].size() + by_site["B"].size() <= total;
  for (const auto& [site, id] : ids) {
    const auto m = c.get_model(id);
    if (m.state != S::kServing || m.versions.empty()) return verdict(false, id + " did not reach Serving");
    const auto rows_loaded = m.versions[0].metrics.at("rows_loaded");
    const auto snap = connectors::load_snapshot(c.store(), id, m.versions[0].dataset_digest);
    std::multiset<std::string> trained;
    const int cost = snap.column("cost"), prio = snap.column("priority"), label = snap.column(executor::kLabelField);
    for (const auto& r : snap.rows) trained.insert(fmt(std::stod(r[cost])) + "|" + r[prio] + "|" + r[label]);
    const bool ok = rows_loaded == static_cast<double>(by_site[site].size()) && trained == by_site[site];
    pass = pass && ok;
    note += std::string(note.empty() ? "" : ", ") + "site " + site + ": rows_loaded=" + fmt(rows_loaded) +
            " expected=" + std::to_string(by_site[site].size()) + (ok ? "" : " (row mismatch)");
  }

  // Independent serving: archiving A leaves B serving.
  const json req = {{"cost", 120}, {"priority", "low"}};
  const bool a_served = c.infer(ids["A"], req).model_id == ids["A"];
  c.archive(ids["A"], std::nullopt);
  c.wait_idle();
  bool a_refused = false;
  try {
    c.infer(ids["A"], req);
  } catch (const Error&) {
    a_refused = true;
  }
  const auto b = c.infer(ids["B"], req);
  const bool b_serves = b.model_id == ids["B"] && c.get_model(ids["B"]).state == S::kServing;
  pass = pass && a_served && a_refused && b_serves;
  note += std::string("; B serves after A archived=") + (b_serves && a_refused ? "yes" : "no");
  return verdict(pass, note);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"end-to-end lifecycle over REST", criterion_end_to_end},
      {"parameter default-fill", criterion_merge_semantics},
      {"classifier oracles", criterion_classifier_oracles},
      {"learnability bar", criterion_learnability},
      {"drift detection", criterion_drift},
      {"approval gate", criterion_approval_gate},
      {"scale-to-zero", criterion_scale_to_zero},
      {"version swap atomicity", criterion_swap_atomicity},
      {"determinism", criterion_determinism},
      {"locality instancing", criterion_locality},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock_::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = verdict(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.note.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
