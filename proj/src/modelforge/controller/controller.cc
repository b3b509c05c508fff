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

#include "modelforge/controller/controller.h"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/connectors/snapshot.h"
#include "modelforge/executor/ops.h"
#include "modelforge/models/artifact.h"
#include "modelforge/models/predict.h"

namespace modelforge::controller {
namespace {

using S = LifecycleState;
using K = EventKind;

bool is_live(const ModelInstance& m) { return m.state != S::kDeleted && m.state != S::kArchived; }

bool serves(const ModelInstance& m) {
  return m.serving_version && (m.state == S::kServing || m.state == S::kRetraining || m.state == S::kPendingApproval);
}

std::string truth_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  fail(ErrorCode::kValidation, "invalid-feedback", "ground_truth must be a string, boolean or integer",
       {{{"field", "ground_truth"}}});
}

}  // namespace

json TrainHandle::to_json() const {
  return {{"model_id", model_id},
          {"run_id", run_id ? json(*run_id) : json(nullptr)},
          {"coalesced", coalesced},
          {"state", state}};
}

json FeedbackResult::to_json() const { return {{"overwritten", overwritten}, {"accuracy", accuracy.to_json()}}; }

Controller::Controller(PlatformOptions options, const Clock& clock)
    : options_(std::move(options)), clock_(clock), state_dir_(options_.data_dir / "state") {
  fs::create_directories(state_dir_);
  store_ = std::make_unique<store::Store>(options_.data_dir / "store", clock_);
  gateway_ = std::make_unique<gateway::Gateway>(*store_, clock_, options_.gateway);
  monitor_ = std::make_unique<monitors::Monitor>(options_.data_dir / "monitoring", clock_);
  executor_ = std::make_unique<executor::Executor>(options_.data_dir / "runs", *store_, clock_,
                                                   std::max<std::size_t>(1, options_.max_concurrent_runs));
  fetches_ = std::make_unique<connectors::FetchSchedule>(scheduler_);

  // Journal first, then the snapshot as a shortcut when it is consistent.
  const auto journal_path = state_dir_ / "events.jsonl";
  if (fs::exists(journal_path)) {
    std::istringstream in(read_file(journal_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        events_.push_back(Event::from_json(json::parse(line)));
      } catch (const std::exception&) {
        break;  // torn final line from a crash
      }
    }
  }
  bool from_snapshot = false;
  const auto snapshot_path = state_dir_ / "snapshot.json";
  if (fs::exists(snapshot_path)) {
    try {
      state_ = PlatformState::from_json(json::parse(read_file(snapshot_path)));
      from_snapshot = events_.empty() || state_.last_seq <= events_.back().seq;
    } catch (const std::exception&) {
      from_snapshot = false;
    }
  }
  if (from_snapshot) {
    for (const auto& e : events_) {
      if (e.seq > state_.last_seq) apply(state_, e);
    }
  } else {
    state_ = replay(events_);
  }
  // Rewrite the journal without any torn tail before appending.
  {
    std::string text;
    for (const auto& e : events_) text += e.to_json().dump() + "\n";
    write_file_atomic(journal_path, text);
  }
  journal_.open(journal_path, std::ios::app | std::ios::binary);
  if (!journal_) fail(ErrorCode::kInternal, "io", "cannot open journal " + journal_path.string());
  publish_state();

  loop_thread_ = std::thread([this] { loop(); });
  loop_id_ = loop_thread_.get_id();
  call([this] { recover(); });
}

Controller::~Controller() { shutdown(); }

void Controller::shutdown() {
  {
    std::lock_guard lock(queue_mu_);
    if (shut_down_) return;
    shut_down_ = true;
  }
  call([this] { closing_ = true; });
  {
    std::unique_lock lock(fetch_mu_);
    fetch_cv_.wait(lock, [this] { return fetching_.empty(); });
  }
  // Cancels live runs; their callbacks still reach the loop.
  executor_.reset();
  {
    std::lock_guard lock(queue_mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (loop_thread_.joinable()) loop_thread_.join();
  persist_snapshot();
  journal_.close();
  events_cv_.notify_all();
}

bool Controller::post(Task task) {
  {
    std::lock_guard lock(queue_mu_);
    if (stopping_) return false;
    queue_.push_back(std::move(task));
  }
  queue_cv_.notify_one();
  return true;
}

template <typename F>
auto Controller::call(F&& fn) -> decltype(fn()) {
  using R = decltype(fn());
  if (std::this_thread::get_id() == loop_id_) return fn();
  auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
  auto result = task->get_future();
  if (!post([task] { (*task)(); })) fail(ErrorCode::kInternal, "shutting-down", "the platform is shutting down");
  return result.get();
}

void Controller::loop() {
  for (;;) {
    Task task;
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
      busy_ = true;
    }
    try {
      task();
    } catch (...) {
    }
    {
      std::lock_guard lock(queue_mu_);
      busy_ = false;
    }
  }
}

// ---- events ---------------------------------------------------------------

Event Controller::commit(EventKind kind, const std::optional<std::string>& model_id, json payload) {
  Event e;
  e.seq = state_.last_seq + 1;
  e.at = clock_.now();
  e.kind = kind;
  e.model_id = model_id;
  e.payload = std::move(payload);
  apply(state_, e);  // throws without touching state when inapplicable
  journal_ << e.to_json().dump() << '\n';
  journal_.flush();
  {
    std::lock_guard lock(state_mu_);
    events_.push_back(e);
  }
  if (++events_since_snapshot_ >= options_.snapshot_every) persist_snapshot();
  publish_state();
  return e;
}

void Controller::react(const Event& e) {
  for (const auto& action : decide(state_, e)) {
    try {
      execute(action);
    } catch (const Error& err) {
      std::lock_guard lock(state_mu_);
      action_errors_[action.model_id] = action.describe() + ": " + err.what();
    }
  }
}

Event Controller::emit(EventKind kind, const std::optional<std::string>& model_id, json payload) {
  auto e = commit(kind, model_id, std::move(payload));
  react(e);
  return e;
}

void Controller::publish_state() {
  auto copy = std::make_shared<const PlatformState>(state_);
  {
    std::lock_guard lock(state_mu_);
    published_ = std::move(copy);
    published_seq_ = state_.last_seq;
  }
  events_cv_.notify_all();
}

void Controller::persist_snapshot() {
  write_file_atomic(state_dir_ / "snapshot.json", state_.to_json().dump());
  events_since_snapshot_ = 0;
}

void Controller::execute(const Action& a) {
  switch (a.type) {
    case Action::Type::kStartFetch:
      try {
        start_fetch(a.model_id, false);
      } catch (const Error& err) {
        on_fetch_failed(a.model_id, false, err.what());
      }
      break;
    case Action::Type::kStartTrainingRun:
      start_run(a.model_id, a.reason, a.dataset_digest);
      break;
    case Action::Type::kDeploy:
      deploy_version(require_model(a.model_id), a.version, false);
      break;
    case Action::Type::kUndeploy:
      if (gateway_->has_endpoint(a.model_id)) gateway_->undeploy(a.model_id);
      references_.erase(a.model_id);
      break;
    case Action::Type::kEmit:
      try {
        emit(a.event.kind, a.event.model_id, a.event.payload);
      } catch (const Error& err) {
        // A retrain requested while one is already under way is coalesced.
        if (!(a.event.kind == K::kRetrainScheduled && err.code() == ErrorCode::kStateConflict)) throw;
      }
      break;
    case Action::Type::kSchedule:
      schedule_retrain(require_model(a.model_id));
      break;
    case Action::Type::kUnschedule:
      fetches_->cancel(a.model_id);
      break;
    case Action::Type::kResetMonitors:
      monitor_->reset_edges(a.model_id);
      references_.erase(a.model_id);
      break;
    case Action::Type::kForgetMonitors:
      monitor_->forget(a.model_id);
      references_.erase(a.model_id);
      last_drift_check_.erase(a.model_id);
      break;
  }
}

// ---- helpers --------------------------------------------------------------

const ModelInstance& Controller::require_model(const std::string& model_id) const {
  const auto* m = state_.find(model_id);
  if (!m) fail(ErrorCode::kNotFound, "unknown-model", "no model with id '" + model_id + "'", {{{"model_id", model_id}}});
  return *m;
}

const tmpl::TemplateBundle& Controller::bundle_for(const store::TemplateRef& ref) {
  auto it = bundles_.find(ref.digest);
  if (it != bundles_.end()) return it->second;
  return bundles_.emplace(ref.digest, tmpl::read_bundle(store_->pull(ref))).first->second;
}

monitors::MonitorSettings Controller::settings_for(const ModelInstance& m) const {
  json overrides = json::object();
  const json keys = options_.monitoring.to_json();
  for (const auto& [k, _] : keys.items()) {
    auto it = m.resolved.values.find(k);
    if (it != m.resolved.values.end() && !it->second.is_null()) overrides[k] = it->second;
  }
  if (m.config.monitoring.is_object()) overrides.update(m.config.monitoring);
  return monitors::MonitorSettings::from_json(overrides, options_.monitoring);
}

std::vector<connectors::Field> Controller::fetch_schema(const ModelInstance& m) {
  std::vector<connectors::Field> schema;
  for (const auto& in : bundle_for(m.template_ref).manifest.inputs) {
    if (m.resolved.inputs.count(in.name)) schema.push_back({in.name, in.kind, in.required});
  }
  if (m.resolved.output) schema.push_back({executor::kLabelField, tmpl::FieldKind::kCategorical, true});
  return schema;
}

// ---- data acquisition -----------------------------------------------------

void Controller::start_fetch(const std::string& model_id, bool scheduled) {
  if (closing_) return;
  const auto& m = require_model(model_id);
  if (m.config.connector.is_null()) {
    fail(ErrorCode::kValidation, "connector", "model '" + model_id + "' has no data connector");
  }
  auto spec = connectors::ConnectorSpec::from_json(m.config.connector);
  spec.select.clear();
  for (const auto& [field, source] : m.resolved.inputs) spec.select.emplace_back(source, field);
  if (m.resolved.output) spec.select.emplace_back(*m.resolved.output, executor::kLabelField);
  auto schema = fetch_schema(m);
  {
    std::lock_guard lock(fetch_mu_);
    if (!fetching_.insert(model_id).second) return;
  }
  std::thread([this, model_id, scheduled, spec = std::move(spec), schema = std::move(schema)] {
    try {
      auto snap = connectors::fetch(spec, schema, clock_.now());
      connectors::persist_snapshot(*store_, model_id, snap);
      post([this, model_id, scheduled, snap = std::move(snap)] { on_fetched(model_id, scheduled, snap); });
    } catch (const std::exception& err) {
      post([this, model_id, scheduled, msg = std::string(err.what())] { on_fetch_failed(model_id, scheduled, msg); });
    }
    std::lock_guard lock(fetch_mu_);
    fetching_.erase(model_id);
    fetch_cv_.notify_all();
  }).detach();
}

void Controller::on_fetched(const std::string& model_id, bool scheduled, const connectors::DatasetSnapshot& snap) {
  const auto* m = state_.find(model_id);
  if (!m || m->state == S::kDeleted) return;
  json payload = {{"scheduled", scheduled},
                  {"dataset_digest", snap.digest},
                  {"rows", snap.row_count()},
                  {"rows_rejected", snap.rows_rejected},
                  {"empty", snap.empty()}};
  if (scheduled) {
    const auto* serving = m->serving_version ? m->find_version(*m->serving_version) : nullptr;
    payload["cache_hit"] = serving && serving->dataset_digest == snap.digest;
  } else if (m->state != S::kAcquiringData && m->state != S::kRetraining) {
    return;  // superseded, e.g. archived while fetching
  }
  emit(K::kDataFetched, model_id, std::move(payload));
}

void Controller::on_fetch_failed(const std::string& model_id, bool scheduled, const std::string& error) {
  const auto* m = state_.find(model_id);
  if (!m) return;
  if (scheduled) {
    std::lock_guard lock(state_mu_);
    action_errors_[model_id] = "scheduled fetch: " + error;
    return;
  }
  if (m->state != S::kAcquiringData && m->state != S::kRetraining) return;
  emit(K::kTrainingFailed, model_id, {{"stage", "fetch"}, {"error", error}});
}

void Controller::schedule_retrain(const ModelInstance& m) {
  if (!m.config.retrain_interval || *m.config.retrain_interval <= 0) return;
  const std::string id = m.model_id;
  fetches_->schedule(id, clock_.now(), *m.config.retrain_interval, [this, id](Timestamp) {
    // Runs inside tick(), on the loop thread.
    try {
      const auto* cur = state_.find(id);
      if (cur && is_live(*cur)) start_fetch(id, true);
    } catch (const Error& err) {
      on_fetch_failed(id, true, err.what());
    }
  });
}

// ---- training -------------------------------------------------------------

void Controller::start_run(const std::string& model_id, const std::string& reason, const std::string& digest) {
  if (closing_) return;
  const auto& m = require_model(model_id);
  executor::RunRequest req;
  req.run_id = model_id + "-" + std::to_string(state_.last_seq + 1);
  req.model_id = model_id;
  req.config = m.resolved;
  req.limits = options_.run_limits;
  try {
    req.bundle = bundle_for(m.template_ref);
    req.data = connectors::load_snapshot(*store_, model_id, digest);
  } catch (const Error& err) {
    emit(K::kTrainingFailed, model_id, {{"stage", "fetch"}, {"error", err.what()}});
    return;
  }
  emit(K::kTrainingStarted, model_id, {{"run_id", req.run_id}, {"dataset_digest", digest}, {"reason", reason}});
  executor_->submit(std::move(req), [this, reason](const executor::TrainingRun& run) {
    post([this, run, reason] { on_run_done(run, reason); });
  });
}

void Controller::on_run_done(const executor::TrainingRun& run, const std::string& reason) {
  const auto* m = state_.find(run.model_id);
  if (!m || m->active_run != run.run_id) return;
  if (run.status == executor::RunStatus::kSucceeded && run.model_artifact) {
    emit(K::kTrainingSucceeded, run.model_id,
         {{"version", m->last_version + 1},
          {"run_id", run.run_id},
          {"artifact", run.model_artifact->to_json()},
          {"metrics", run.metrics},
          {"dataset_digest", run.dataset_digest},
          {"reason", reason}});
  } else {
    emit(K::kTrainingFailed, run.model_id,
         {{"stage", "pipeline"},
          {"run_id", run.run_id},
          {"status", executor::to_string(run.status)},
          {"failed_step", run.failed_step ? json(*run.failed_step) : json(nullptr)},
          {"error", run.error.empty() ? std::string(executor::to_string(run.status)) : run.error}});
  }
}

// ---- deployment -----------------------------------------------------------

void Controller::deploy_version(const ModelInstance& m, int version, bool rollback) {
  const auto* mv = m.find_version(version);
  if (!mv) {
    fail(ErrorCode::kNotFound, "unknown-version", "model '" + m.model_id + "' has no version " + std::to_string(version),
         {{{"model_id", m.model_id}, {"version", version}}});
  }
  Event probe;
  probe.kind = K::kModelDeployed;
  probe.model_id = m.model_id;
  probe.payload = {{"version", version}, {"rollback", rollback}};
  transition(m, probe);
  const std::string id = m.model_id;
  const auto artifact = mv->artifact;
  gateway_->deploy(id, version, artifact, bundle_for(m.template_ref).manifest.inputs);
  {
    std::lock_guard lock(state_mu_);
    action_errors_.erase(id);
  }
  emit(K::kModelDeployed, id, {{"version", version}, {"rollback", rollback}, {"artifact", artifact.to_json()}});
}

// ---- recovery and time ----------------------------------------------------

void Controller::recover() {
  std::vector<std::string> ids;
  for (const auto& [id, _] : state_.models) ids.push_back(id);
  for (const auto& id : ids) {
    const auto& m = state_.models.at(id);
    if (m.serving_version && is_live(m)) {
      try {
        gateway_->deploy(id, *m.serving_version, m.find_version(*m.serving_version)->artifact,
                         bundle_for(m.template_ref).manifest.inputs);
      } catch (const Error& err) {
        std::lock_guard lock(state_mu_);
        action_errors_[id] = std::string("redeploy: ") + err.what();
      }
    }
    if (is_live(m)) schedule_retrain(m);
    const auto& cur = state_.models.at(id);
    if (cur.state == S::kAcquiringData || cur.state == S::kTraining || cur.state == S::kRetraining) {
      json payload = {{"stage", "recovery"}, {"error", "interrupted by a platform restart"}};
      if (cur.active_run) payload["run_id"] = *cur.active_run;
      emit(K::kTrainingFailed, id, std::move(payload));
    }
  }
}

void Controller::tick(Timestamp now) {
  call([&] {
    scheduler_.run_due(now);
    gateway_->idle_sweep(now);
    run_drift_checks(now);
  });
}

void Controller::run_drift_checks(Timestamp now) {
  std::vector<std::string> due;
  for (const auto& [id, m] : state_.models) {
    if (m.state != S::kServing || !m.serving_version) continue;
    auto it = last_drift_check_.find(id);
    if (it != last_drift_check_.end() && now - it->second < options_.drift_check_interval) continue;
    due.push_back(id);
  }
  for (const auto& id : due) {
    last_drift_check_[id] = now;
    try {
      drift_for(state_.models.at(id));
    } catch (const Error& err) {
      std::lock_guard lock(state_mu_);
      action_errors_[id] = std::string("drift check: ") + err.what();
    }
  }
}

monitors::DriftReport Controller::drift_for(const ModelInstance& m) {
  if (!m.serving_version) {
    fail(ErrorCode::kStateConflict, "model-not-served", "model '" + m.model_id + "' has no serving version",
         {{{"model_id", m.model_id}, {"state", to_string(m.state)}}});
  }
  const int version = *m.serving_version;
  const std::string id = m.model_id;
  auto& ref = references_[id];
  if (ref.version != version) {
    const auto* mv = m.find_version(version);
    ref = Reference{};
    ref.snapshot = connectors::load_snapshot(*store_, id, mv->dataset_digest);
    const auto model = models::deserialize_model(store_->get_artifact(mv->artifact));
    for (const auto& row : ref.snapshot.rows) {
      models::FieldGetter get = [&](const std::string& f) -> std::optional<std::string> {
        const int c = ref.snapshot.column(f);
        if (c < 0 || row[c].empty()) return std::nullopt;
        return row[c];
      };
      try {
        auto out = models::predict(model, get);
        if (out.label) ref.predictions.push_back(*out.label);
      } catch (const Error&) {
      }
    }
    ref.version = version;
  }
  monitors::DriftInput input;
  input.model_id = id;
  input.model_version = version;
  input.reference = &ref.snapshot;
  for (const auto& in : bundle_for(m.template_ref).manifest.inputs) {
    if (ref.snapshot.column(in.name) < 0) continue;
    if (in.kind == tmpl::FieldKind::kNumeric) input.features.emplace_back(in.name, true);
    if (in.kind == tmpl::FieldKind::kCategorical) input.features.emplace_back(in.name, false);
  }
  input.reference_predictions = ref.predictions;
  const auto settings = settings_for(m);
  if (auto log = gateway_->inference_log(id)) input.window = log->recent(settings.drift_window, version);
  auto outcome = monitor_->evaluate_drift(input, settings);
  if (outcome.emit_event && m.state == S::kServing) {
    emit(K::kDriftDetected, id, {{"version", version}, {"report", outcome.report.to_json()}});
  }
  return outcome.report;
}

void Controller::wait_idle() {
  int quiet = 0;
  while (quiet < 2) {
    bool idle;
    {
      std::lock_guard lock(fetch_mu_);
      idle = fetching_.empty();
    }
    {
      std::lock_guard lock(queue_mu_);
      idle = idle && queue_.empty() && !busy_;
    }
    idle = idle && call([this] {
             for (const auto& [_, m] : state_.models) {
               if (m.active_run) return false;
             }
             return true;
           });
    quiet = idle ? quiet + 1 : 0;
    if (quiet < 2) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

// ---- public API -----------------------------------------------------------

store::TemplateRef Controller::publish_template(const tmpl::TemplateArchive& archive) {
  return call([&] {
    auto ref = store_->publish(archive);
    emit(K::kTemplatePublished, std::nullopt, {{"name", ref.name}, {"version", ref.version}, {"digest", ref.digest}});
    return ref;
  });
}

std::vector<store::TemplateSummary> Controller::list_templates() const { return store_->list_templates(); }

json Controller::describe_template(const std::string& name, const std::string& version) const {
  const auto ref = store_->resolve(name, version);
  const auto bundle = tmpl::read_bundle(store_->pull(ref));
  return {{"ref", ref.to_json()},
          {"manifest", bundle.manifest.to_json()},
          {"pipeline", bundle.pipeline.to_json()},
          {"serving", bundle.serving.to_json()}};
}

void Controller::delete_template(const std::string& name, const std::string& version) {
  call([&] {
    const auto ref = store_->resolve(name, version);
    for (const auto& [id, m] : state_.models) {
      if (m.state != S::kDeleted && m.template_ref.name == ref.name && m.template_ref.version == ref.version) {
        fail(ErrorCode::kConflict, "template-in-use", "template " + ref.str() + " is used by model '" + id + "'",
             {{{"model_id", id}}});
      }
    }
    store_->delete_template(ref.name, ref.version);
  });
}

ModelInstance Controller::create_model(const json& config_doc) {
  return call([&] {
    auto cfg = tmpl::ModelConfig::from_json(config_doc);
    const auto ref = store_->resolve(cfg.template_ref);
    const auto& bundle = bundle_for(ref);
    auto resolved = tmpl::merge_config(bundle.manifest, cfg);
    if (cfg.connector.is_null()) {
      if (cfg.auto_start || cfg.retrain_interval) {
        fail(ErrorCode::kValidation, "connector", "a data connector is required to start or schedule training",
             {{{"field", "connector"}, {"message", "required"}}});
      }
    } else {
      connectors::ConnectorSpec::from_json(cfg.connector);
    }
    monitors::MonitorSettings::from_json(cfg.monitoring, options_.monitoring);

    std::int64_t cpu = resolved.resources.cpu_millis, mem = resolved.resources.memory_mb;
    for (const auto& [_, m] : state_.models) {
      if (!is_live(m)) continue;
      cpu += m.resolved.resources.cpu_millis;
      mem += m.resolved.resources.memory_mb;
    }
    auto over = [&](const char* resource, std::int64_t used, std::int64_t cap) {
      if (used <= cap) return;
      fail(ErrorCode::kCapacity, "capacity",
           std::string("admission refused: ") + resource + " would reach " + std::to_string(used) +
               " of a capacity of " + std::to_string(cap),
           {{{"resource", resource}, {"required", used}, {"capacity", cap}}});
    };
    over("cpu_millis", cpu, options_.capacity.cpu_millis);
    over("memory_mb", mem, options_.capacity.memory_mb);

    const std::string id = ref.name + "-" + std::to_string(state_.last_seq + 1);
    json payload = {{"template_ref", ref.to_json()},
                    {"config", cfg.to_json()},
                    {"resolved", resolved.to_json()},
                    {"approval_required", bundle.manifest.approval_required}};
    auto e = commit(K::kModelCreated, id, std::move(payload));
    ModelInstance created = state_.models.at(id);
    react(e);
    return created;
  });
}

std::vector<ModelInstance> Controller::list_models(bool include_deleted) const {
  auto s = snapshot();
  std::vector<ModelInstance> out;
  for (const auto& [_, m] : s->models) {
    if (include_deleted || m.state != S::kDeleted) out.push_back(m);
  }
  return out;
}

ModelInstance Controller::get_model(const std::string& model_id) const {
  auto s = snapshot();
  const auto* m = s->find(model_id);
  if (!m) fail(ErrorCode::kNotFound, "unknown-model", "no model with id '" + model_id + "'", {{{"model_id", model_id}}});
  return *m;
}

void Controller::delete_model(const std::string& model_id) {
  call([&] {
    const auto& m = require_model(model_id);
    Event probe;
    probe.kind = K::kModelDeleted;
    probe.model_id = model_id;
    transition(m, probe);
    if (m.active_run) {
      try {
        executor_->cancel(*m.active_run);
      } catch (const Error&) {
      }
    }
    fetches_->cancel(model_id);
    if (gateway_->has_endpoint(model_id)) gateway_->undeploy(model_id);
    emit(K::kModelDeleted, model_id, json::object());
  });
}

TrainHandle Controller::train(const std::string& model_id, const std::string& reason) {
  return call([&] {
    const auto& m = require_model(model_id);
    TrainHandle h{model_id, m.active_run, false, ""};
    if (m.state == S::kRetraining || m.state == S::kAcquiringData || m.state == S::kTraining) {
      h.coalesced = true;
      h.state = to_string(m.state);
      return h;
    }
    Event probe;
    probe.kind = K::kRetrainScheduled;
    probe.model_id = model_id;
    transition(m, probe);
    if (m.config.connector.is_null()) {
      fail(ErrorCode::kValidation, "connector", "model '" + model_id + "' has no data connector",
           {{{"field", "connector"}, {"message", "required"}}});
    }
    emit(K::kRetrainScheduled, model_id, {{"reason", reason}});
    const auto& cur = require_model(model_id);
    h.run_id = cur.active_run;
    h.state = to_string(cur.state);
    return h;
  });
}

void Controller::approve(const std::string& model_id) {
  call([&] {
    const auto& m = require_model(model_id);
    json payload = json::object();
    if (m.candidate_version) payload["version"] = *m.candidate_version;
    emit(K::kModelApproved, model_id, std::move(payload));
  });
}

void Controller::reject(const std::string& model_id) {
  call([&] {
    const auto& m = require_model(model_id);
    json payload = json::object();
    if (m.candidate_version) payload["version"] = *m.candidate_version;
    emit(K::kModelRejected, model_id, std::move(payload));
  });
}

void Controller::rollback(const std::string& model_id, int version) {
  call([&] {
    const auto& m = require_model(model_id);
    const auto* mv = m.find_version(version);
    if (!mv) {
      fail(ErrorCode::kNotFound, "unknown-version", "model '" + model_id + "' has no version " + std::to_string(version),
           {{{"model_id", model_id}, {"version", version}}});
    }
    try {
      store_->get_artifact(mv->artifact);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kNotFound) throw;
      fail(ErrorCode::kIntegrity, "artifact-missing", "artifact of version " + std::to_string(version) + " is missing",
           {{{"artifact", mv->artifact.path()}}});
    }
    deploy_version(m, version, true);
  });
}

void Controller::archive(const std::string& model_id, std::optional<int> version) {
  call([&] {
    const auto& m = require_model(model_id);
    if (!version) {
      emit(K::kModelArchived, model_id, json::object());
      return;
    }
    Event probe;
    probe.kind = K::kModelArchived;
    probe.model_id = model_id;
    probe.payload = {{"version", *version}};
    transition(m, probe);
    const auto moved = store_->move_to_archive(m.find_version(*version)->artifact);
    emit(K::kModelArchived, model_id, {{"version", *version}, {"artifact", moved.to_json()}});
  });
}

gateway::InferResult Controller::infer(const std::string& model_id, const json& request) {
  const auto m = get_model(model_id);
  if (m.state == S::kDeleted) fail(ErrorCode::kNotFound, "unknown-model", "no model with id '" + model_id + "'");
  if (!serves(m)) {
    fail(ErrorCode::kStateConflict, "model-not-served",
         "model '" + model_id + "' is not serving (state " + std::string(to_string(m.state)) + ")",
         {{{"model_id", model_id}, {"state", to_string(m.state)}}});
  }
  return gateway_->infer(model_id, request);
}

std::vector<gateway::InferResult> Controller::infer_batch(const std::string& model_id, const json& requests) {
  const auto m = get_model(model_id);
  if (m.state == S::kDeleted) fail(ErrorCode::kNotFound, "unknown-model", "no model with id '" + model_id + "'");
  if (!serves(m)) {
    fail(ErrorCode::kStateConflict, "model-not-served",
         "model '" + model_id + "' is not serving (state " + std::string(to_string(m.state)) + ")",
         {{{"model_id", model_id}, {"state", to_string(m.state)}}});
  }
  return gateway_->infer_batch(model_id, requests);
}

FeedbackResult Controller::feedback(const std::string& model_id, const std::string& inference_id,
                                    const json& ground_truth) {
  const std::string truth = truth_text(ground_truth);
  return call([&] {
    const auto& m = require_model(model_id);
    if (m.state == S::kDeleted) fail(ErrorCode::kNotFound, "unknown-model", "no model with id '" + model_id + "'");
    auto log = gateway_->inference_log(model_id);
    auto rec = log ? log->find(inference_id) : std::nullopt;
    if (!rec) {
      fail(ErrorCode::kNotFound, "unknown-inference",
           "no inference '" + inference_id + "' logged for model '" + model_id + "'",
           {{{"inference_id", inference_id}}});
    }
    monitors::FeedbackRecord fb{model_id, inference_id, truth, clock_.now()};
    const auto outcome = monitor_->record_feedback(fb, *rec);
    if (outcome.overwritten) {
      emit(K::kFeedbackOverwritten, model_id,
           {{"inference_id", inference_id}, {"previous", outcome.previous}, {"ground_truth", truth}});
    }
    const auto settings = settings_for(state_.models.at(model_id));
    const auto acc = monitor_->evaluate_accuracy(model_id, settings);
    if (acc.emit_event && state_.models.at(model_id).state == S::kServing) {
      emit(K::kAccuracyDegraded, model_id,
           {{"accuracy", acc.status.to_json()}, {"threshold", settings.degrade_threshold}});
    }
    return FeedbackResult{outcome.overwritten, acc.status};
  });
}

json Controller::metrics(const std::string& model_id) const {
  const auto m = get_model(model_id);
  json versions = json::array();
  for (const auto& v : m.versions) versions.push_back(v.to_json());
  json runs = json::array();
  for (const auto& r : executor_->list()) {
    if (r.model_id == model_id) runs.push_back(r.to_json());
  }
  const auto acc = monitor_->accuracy(model_id, monitors::MonitorSettings::from_json(
                                                    m.config.monitoring, options_.monitoring)
                                                    .accuracy_window);
  json j = {{"model_id", model_id},
            {"state", to_string(m.state)},
            {"serving_version", m.serving_version ? json(*m.serving_version) : json(nullptr)},
            {"versions", versions},
            {"runs", runs},
            {"accuracy", acc.to_json()},
            {"inferences", 0}};
  if (auto log = gateway_->inference_log(model_id)) j["inferences"] = log->total();
  if (m.serving_version) {
    if (const auto* v = m.find_version(*m.serving_version)) j["metrics"] = v->metrics;
  }
  return j;
}

json Controller::status(const std::string& model_id) const {
  const auto m = get_model(model_id);
  json j = {{"model_id", model_id},
            {"state", to_string(m.state)},
            {"serving_version", m.serving_version ? json(*m.serving_version) : json(nullptr)},
            {"candidate_version", m.candidate_version ? json(*m.candidate_version) : json(nullptr)},
            {"active_run", m.active_run ? json(*m.active_run) : json(nullptr)},
            {"last_error", m.last_error ? json(*m.last_error) : json(nullptr)},
            {"retrain_scheduled", fetches_->scheduled(model_id)},
            {"endpoint", nullptr}};
  if (gateway_->has_endpoint(model_id)) j["endpoint"] = gateway_->status(model_id).to_json();
  std::lock_guard lock(state_mu_);
  if (auto it = action_errors_.find(model_id); it != action_errors_.end()) j["action_error"] = it->second;
  return j;
}

monitors::DriftReport Controller::check_drift(const std::string& model_id) {
  return call([&] { return drift_for(require_model(model_id)); });
}

std::optional<monitors::DriftReport> Controller::last_drift(const std::string& model_id) const {
  get_model(model_id);
  return monitor_->last_drift(model_id);
}

std::vector<Event> Controller::events_since(std::uint64_t since, std::size_t limit) const {
  std::lock_guard lock(state_mu_);
  std::vector<Event> out;
  auto it = std::upper_bound(events_.begin(), events_.end(), since,
                             [](std::uint64_t s, const Event& e) { return s < e.seq; });
  for (; it != events_.end() && out.size() < limit; ++it) out.push_back(*it);
  return out;
}

bool Controller::wait_for_events(std::uint64_t since, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(state_mu_);
  return events_cv_.wait_for(lock, timeout, [&] { return published_seq_ > since; });
}

std::shared_ptr<const PlatformState> Controller::snapshot() const {
  std::lock_guard lock(state_mu_);
  return published_;
}

std::vector<Event> Controller::journal() const {
  std::lock_guard lock(state_mu_);
  return events_;
}

}  // namespace modelforge::controller
