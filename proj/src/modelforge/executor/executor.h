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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "modelforge/common/time.h"
#include "modelforge/connectors/snapshot.h"
#include "modelforge/store/store.h"
#include "modelforge/template/config.h"
#include "modelforge/template/manifest.h"

namespace modelforge::executor {

namespace fs = std::filesystem;
using nlohmann::json;

enum class RunStatus { kQueued, kRunning, kSucceeded, kFailed, kCancelled, kTimedOut };
std::string_view to_string(RunStatus s);
bool is_terminal(RunStatus s);

struct StepResult {
  std::string name;
  std::string status;  // succeeded | failed | cancelled | timed-out
  Duration duration_ms = 0;
  std::string log;  // last 64 KiB
  json to_json() const;
};

struct TrainingRun {
  std::string run_id;
  std::string model_id;
  std::string pipeline_digest;
  std::string dataset_digest;
  Timestamp started_at = 0;
  Timestamp finished_at = 0;
  RunStatus status = RunStatus::kQueued;
  std::vector<StepResult> step_results;
  std::map<std::string, double> metrics;
  std::optional<store::ArtifactKey> model_artifact;
  std::optional<std::string> failed_step;
  std::string error;

  json to_json() const;
};

struct ResourceLimits {
  Duration wall_clock = 10 * kMinute;  // real time, measured on a steady clock
};

struct RunRequest {
  std::string run_id;  // generated when empty
  std::string model_id;
  tmpl::TemplateBundle bundle;
  tmpl::ResolvedConfig config;
  connectors::DatasetSnapshot data;
  ResourceLimits limits;
};

constexpr std::size_t kStepLogLimit = 64 * 1024;

// Replaces `${name}` references with resolved values: a string consisting of
// a single reference takes the value's JSON type, embedded references are
// spliced in as text.
json substitute_params(const json& params, const tmpl::ResolvedConfig& config);

std::string pipeline_digest(const tmpl::PipelineSpec& pipeline);

// Synchronous execution in `<runs_root>/<run_id>/`. `stop` is polled at step
// boundaries and inside long ops; returning kCancelled there cancels.
TrainingRun run_pipeline(const RunRequest& request, const fs::path& runs_root, store::Store& store,
                         const Clock& clock, const std::function<bool()>& cancelled = {});

// FIFO run queue with at most `max_concurrent` pipelines executing at once.
class Executor {
 public:
  using Callback = std::function<void(const TrainingRun&)>;

  Executor(fs::path runs_root, store::Store& store, const Clock& clock, std::size_t max_concurrent);
  ~Executor();
  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  // Enqueues and returns the run id; `done` runs on a worker thread after
  // the run reaches a terminal status.
  std::string submit(RunRequest request, Callback done = {});
  // Throws Error(kNotFound) for an unknown id. Terminal runs are unaffected.
  void cancel(const std::string& run_id);
  TrainingRun get(const std::string& run_id) const;
  std::vector<TrainingRun> list() const;
  // Blocks until the run is terminal.
  TrainingRun wait(const std::string& run_id) const;
  // Blocks until no run is queued or executing.
  void wait_idle() const;

  std::size_t max_concurrent() const { return max_concurrent_; }
  std::size_t peak_concurrency() const { return peak_.load(); }

 private:
  struct Job {
    RunRequest request;
    Callback done;
    std::shared_ptr<std::atomic<bool>> cancel_flag;
  };
  void worker();

  fs::path runs_root_;
  store::Store& store_;
  const Clock& clock_;
  std::size_t max_concurrent_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<Job> queue_;
  std::map<std::string, TrainingRun> runs_;
  std::map<std::string, std::shared_ptr<std::atomic<bool>>> cancel_flags_;
  std::size_t active_ = 0;
  std::atomic<std::size_t> peak_{0};
  std::uint64_t next_id_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace modelforge::executor
