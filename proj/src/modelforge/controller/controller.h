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

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "modelforge/common/scheduler.h"
#include "modelforge/common/time.h"
#include "modelforge/connectors/connector.h"
#include "modelforge/controller/lifecycle.h"
#include "modelforge/executor/executor.h"
#include "modelforge/gateway/gateway.h"
#include "modelforge/monitors/monitor.h"
#include "modelforge/store/store.h"
#include "modelforge/template/package.h"

namespace modelforge::controller {

namespace fs = std::filesystem;

struct PlatformOptions {
  fs::path data_dir = "modelforge-data";
  tmpl::ResourceMinimums capacity{4000, 6144};
  std::size_t max_concurrent_runs = 2;
  executor::ResourceLimits run_limits;
  gateway::GatewayOptions gateway;
  monitors::MonitorSettings monitoring;
  Duration drift_check_interval = kMinute;
  std::size_t snapshot_every = 100;  // events between snapshot rewrites
};

struct TrainHandle {
  std::string model_id;
  std::optional<std::string> run_id;
  bool coalesced = false;
  std::string state;
  json to_json() const;
};

struct FeedbackResult {
  bool overwritten = false;
  monitors::AccuracyStatus accuracy;
  json to_json() const;
};

// The platform: owns the store, executor, gateway and monitors and drives
// every model through its lifecycle. All state changes are events applied
// by a single loop thread; readers get immutable snapshots.
//
// Layout under data_dir: store/, runs/, state/{events.jsonl,snapshot.json},
// monitoring/.
class Controller {
 public:
  Controller(PlatformOptions options, const Clock& clock);
  ~Controller();
  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  // Templates.
  store::TemplateRef publish_template(const tmpl::TemplateArchive& archive);
  std::vector<store::TemplateSummary> list_templates() const;
  json describe_template(const std::string& name, const std::string& version) const;
  void delete_template(const std::string& name, const std::string& version);

  // Models.
  ModelInstance create_model(const json& config_doc);
  std::vector<ModelInstance> list_models(bool include_deleted = false) const;
  ModelInstance get_model(const std::string& model_id) const;
  void delete_model(const std::string& model_id);
  TrainHandle train(const std::string& model_id, const std::string& reason = "manual");
  void approve(const std::string& model_id);
  void reject(const std::string& model_id);
  void rollback(const std::string& model_id, int version);
  // Archives one non-serving version, or the whole model when `version` is
  // empty.
  void archive(const std::string& model_id, std::optional<int> version);

  // Serving and monitoring.
  gateway::InferResult infer(const std::string& model_id, const json& request);
  std::vector<gateway::InferResult> infer_batch(const std::string& model_id, const json& requests);
  FeedbackResult feedback(const std::string& model_id, const std::string& inference_id, const json& ground_truth);
  json metrics(const std::string& model_id) const;
  json status(const std::string& model_id) const;
  // Computes a fresh report and emits DriftDetected on a rising edge.
  monitors::DriftReport check_drift(const std::string& model_id);
  std::optional<monitors::DriftReport> last_drift(const std::string& model_id) const;

  // Events.
  std::vector<Event> events_since(std::uint64_t since, std::size_t limit = 1000) const;
  // Blocks until an event with seq > since exists or the timeout elapses
  // (real time). Returns false on timeout or shutdown.
  bool wait_for_events(std::uint64_t since, std::chrono::milliseconds timeout) const;
  std::shared_ptr<const PlatformState> snapshot() const;
  std::vector<Event> journal() const;

  // Drives time-based work: retrain schedules, idle unloading, drift checks.
  void tick(Timestamp now);
  void tick() { tick(clock_.now()); }
  // Returns once no event, fetch or training run is pending.
  void wait_idle();
  // Flushes the snapshot and stops background work.
  void shutdown();

  store::Store& store() { return *store_; }
  gateway::Gateway& gateway() { return *gateway_; }
  executor::Executor& executor() { return *executor_; }
  monitors::Monitor& monitor() { return *monitor_; }
  const PlatformOptions& options() const { return options_; }
  const Clock& clock() const { return clock_; }

 private:
  using Task = std::function<void()>;

  template <typename F>
  auto call(F&& fn) -> decltype(fn());
  bool post(Task task);
  void loop();

  // Loop-thread only.
  // commit() validates, journals and publishes an event; react() runs the
  // actions decided for it. emit() does both.
  Event commit(EventKind kind, const std::optional<std::string>& model_id, json payload);
  void react(const Event& event);
  Event emit(EventKind kind, const std::optional<std::string>& model_id, json payload);
  void execute(const Action& action);
  void start_fetch(const std::string& model_id, bool scheduled);
  void on_fetched(const std::string& model_id, bool scheduled, const connectors::DatasetSnapshot& snap);
  void on_fetch_failed(const std::string& model_id, bool scheduled, const std::string& error);
  void start_run(const std::string& model_id, const std::string& reason, const std::string& digest);
  void on_run_done(const executor::TrainingRun& run, const std::string& reason);
  void deploy_version(const ModelInstance& m, int version, bool rollback);
  void schedule_retrain(const ModelInstance& m);
  void run_drift_checks(Timestamp now);
  monitors::DriftReport drift_for(const ModelInstance& m);
  void persist_snapshot();
  void publish_state();
  void recover();

  const ModelInstance& require_model(const std::string& model_id) const;  // loop-thread state
  const tmpl::TemplateBundle& bundle_for(const store::TemplateRef& ref);
  monitors::MonitorSettings settings_for(const ModelInstance& m) const;
  std::vector<connectors::Field> fetch_schema(const ModelInstance& m);

  PlatformOptions options_;
  const Clock& clock_;
  fs::path state_dir_;

  std::unique_ptr<store::Store> store_;
  std::unique_ptr<gateway::Gateway> gateway_;
  std::unique_ptr<monitors::Monitor> monitor_;
  std::unique_ptr<executor::Executor> executor_;
  Scheduler scheduler_;
  std::unique_ptr<connectors::FetchSchedule> fetches_;

  // Owned by the loop thread.
  PlatformState state_;
  std::vector<Event> events_;
  std::size_t events_since_snapshot_ = 0;
  std::map<std::string, tmpl::TemplateBundle> bundles_;  // by template digest
  struct Reference {
    int version = 0;
    connectors::DatasetSnapshot snapshot;
    std::vector<std::string> predictions;
  };
  std::map<std::string, Reference> references_;  // drift reference per model
  std::map<std::string, Timestamp> last_drift_check_;
  std::ofstream journal_;
  bool closing_ = false;

  // Shared.
  mutable std::mutex state_mu_;
  mutable std::condition_variable events_cv_;
  std::shared_ptr<const PlatformState> published_;
  std::uint64_t published_seq_ = 0;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<Task> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread loop_thread_;
  std::thread::id loop_id_;

  std::map<std::string, std::string> action_errors_;  // guarded by state_mu_

  std::mutex fetch_mu_;
  std::condition_variable fetch_cv_;
  std::set<std::string> fetching_;  // one fetch in flight per model
  bool shut_down_ = false;
};

}  // namespace modelforge::controller
