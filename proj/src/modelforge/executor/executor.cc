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

#include "modelforge/executor/executor.h"

#include <chrono>
#include <regex>

#include "modelforge/common/digest.h"
#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/executor/ops.h"
#include "modelforge/models/artifact.h"

namespace modelforge::executor {
namespace {

enum class StopReason { kCancelled, kTimedOut };

struct StopRun {
  StopReason reason;
};

std::string tail(std::string s) {
  if (s.size() > kStepLogLimit) s.erase(0, s.size() - kStepLogLimit);
  return s;
}

json substitute_string(const std::string& s, const tmpl::ResolvedConfig& config) {
  static const std::regex kRef(R"(\$\{([A-Za-z_][A-Za-z0-9_-]*)\})");
  std::smatch m;
  auto lookup = [&](const std::string& name) -> const json& {
    auto it = config.values.find(name);
    if (it == config.values.end()) {
      fail(ErrorCode::kValidation, "dangling-reference", "dangling reference ${" + name + "}",
           {{{"param", name}}});
    }
    return it->second;
  };
  if (std::regex_match(s, m, kRef)) return lookup(m[1].str());
  std::string out;
  auto begin = s.cbegin();
  while (std::regex_search(begin, s.cend(), m, kRef)) {
    out.append(begin, m[0].first);
    const json& v = lookup(m[1].str());
    out += v.is_string() ? v.get<std::string>() : (v.is_null() ? "" : v.dump());
    begin = m[0].second;
  }
  out.append(begin, s.cend());
  return out;
}

}  // namespace

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kQueued: return "Queued";
    case RunStatus::kRunning: return "Running";
    case RunStatus::kSucceeded: return "Succeeded";
    case RunStatus::kFailed: return "Failed";
    case RunStatus::kCancelled: return "Cancelled";
    case RunStatus::kTimedOut: return "TimedOut";
  }
  return "Failed";
}

bool is_terminal(RunStatus s) { return s != RunStatus::kQueued && s != RunStatus::kRunning; }

json StepResult::to_json() const {
  return {{"name", name}, {"status", status}, {"duration_ms", duration_ms}, {"log", log}};
}

json TrainingRun::to_json() const {
  json j = {{"run_id", run_id},
            {"model_id", model_id},
            {"pipeline_digest", pipeline_digest},
            {"dataset_digest", dataset_digest},
            {"started_at", format_rfc3339(started_at)},
            {"status", to_string(status)},
            {"step_results", json::array()},
            {"metrics", metrics}};
  if (is_terminal(status)) j["finished_at"] = format_rfc3339(finished_at);
  for (const auto& s : step_results) j["step_results"].push_back(s.to_json());
  if (model_artifact) j["model_artifact"] = model_artifact->to_json();
  if (failed_step) j["failed_step"] = *failed_step;
  if (!error.empty()) j["error"] = error;
  return j;
}

json substitute_params(const json& params, const tmpl::ResolvedConfig& config) {
  if (params.is_string()) return substitute_string(params.get<std::string>(), config);
  if (params.is_array()) {
    json out = json::array();
    for (const auto& v : params) out.push_back(substitute_params(v, config));
    return out;
  }
  if (params.is_object()) {
    json out = json::object();
    for (auto it = params.begin(); it != params.end(); ++it) out[it.key()] = substitute_params(*it, config);
    return out;
  }
  return params;
}

std::string pipeline_digest(const tmpl::PipelineSpec& pipeline) { return sha256_hex(pipeline.to_json().dump()); }

TrainingRun run_pipeline(const RunRequest& req, const fs::path& runs_root, store::Store& store, const Clock& clock,
                         const std::function<bool()>& cancelled) {
  using steady = std::chrono::steady_clock;
  const auto t0 = steady::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::microseconds>(steady::now() - t0).count() / 1000.0;
  };
  auto over_limit = [&] { return elapsed_ms() > static_cast<double>(req.limits.wall_clock); };

  TrainingRun run;
  run.run_id = req.run_id;
  run.model_id = req.model_id;
  run.pipeline_digest = pipeline_digest(req.bundle.pipeline);
  run.dataset_digest = req.data.digest;
  run.started_at = clock.now();
  run.status = RunStatus::kRunning;

  auto finish = [&](RunStatus s) {
    run.status = s;
    run.finished_at = std::max(clock.now(), run.started_at);
    return run;
  };

  const fs::path ws = runs_root / req.run_id;
  std::map<std::string, fs::path> artifacts;
  try {
    fs::remove_all(ws);
    fs::create_directories(ws);
    write_file_atomic(ws / "dataset", connectors::canonical_bytes(req.data));
    artifacts[std::string(tmpl::kDatasetArtifact)] = ws / "dataset";
  } catch (const std::exception& e) {
    run.error = std::string("cannot prepare workspace: ") + e.what();
    return finish(RunStatus::kFailed);
  }

  json report = json::object();
  for (const auto& step : req.bundle.pipeline.steps) {
    if (cancelled && cancelled()) return finish(RunStatus::kCancelled);
    if (over_limit()) {
      run.error = "wall-clock limit of " + std::to_string(req.limits.wall_clock) + " ms exceeded";
      return finish(RunStatus::kTimedOut);
    }
    const auto step_start = steady::now();
    StepResult result{step.name, "succeeded", 0, ""};
    std::string log;
    auto stamp = [&] {
      result.duration_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(steady::now() - step_start).count();
      result.log = tail(std::move(log));
    };
    try {
      const fs::path dir = ws / step.name;
      OpContext ctx;
      ctx.step = step.name;
      ctx.manifest = &req.bundle.manifest;
      ctx.in_dir = dir / "in";
      ctx.out_dir = dir / "out";
      ctx.inputs = step.inputs;
      ctx.outputs = step.outputs;
      ctx.metrics = &run.metrics;
      ctx.report = &report;
      ctx.log = [&](const std::string& line) {
        log += line;
        log += '\n';
        if (log.size() > 2 * kStepLogLimit) log = tail(std::move(log));
      };
      ctx.checkpoint = [&] {
        if (over_limit()) throw StopRun{StopReason::kTimedOut};
      };
      fs::create_directories(ctx.in_dir);
      fs::create_directories(ctx.out_dir);
      // Only the declared inputs are placed in the step's directory.
      for (const auto& in : step.inputs) {
        auto it = artifacts.find(in);
        if (it == artifacts.end()) {
          fail(ErrorCode::kValidation, "artifact-not-produced", "input artifact '" + in + "' was never produced");
        }
        fs::copy_file(it->second, ctx.in_dir / in, fs::copy_options::overwrite_existing);
      }
      ctx.params = substitute_params(step.params, req.config);
      builtin_op(step.op)(ctx);
      for (const auto& out : step.outputs) {
        if (!fs::is_regular_file(ctx.out_dir / out)) {
          fail(ErrorCode::kValidation, "artifact-not-produced",
               "step '" + step.name + "' did not produce '" + out + "'");
        }
        artifacts[out] = ctx.out_dir / out;
      }
      stamp();
      run.step_results.push_back(std::move(result));
    } catch (const StopRun& s) {
      result.status = s.reason == StopReason::kTimedOut ? "timed-out" : "cancelled";
      stamp();
      run.step_results.push_back(std::move(result));
      run.failed_step = step.name;
      if (s.reason == StopReason::kTimedOut) {
        run.error = "wall-clock limit of " + std::to_string(req.limits.wall_clock) + " ms exceeded";
        return finish(RunStatus::kTimedOut);
      }
      return finish(RunStatus::kCancelled);
    } catch (const std::exception& e) {
      log += std::string("error: ") + e.what() + "\n";
      result.status = "failed";
      stamp();
      run.step_results.push_back(std::move(result));
      run.failed_step = step.name;
      run.error = "step '" + step.name + "' failed: " + e.what();
      return finish(RunStatus::kFailed);
    }
  }
  if (over_limit()) {
    run.error = "wall-clock limit of " + std::to_string(req.limits.wall_clock) + " ms exceeded";
    return finish(RunStatus::kTimedOut);
  }

  try {
    const auto& name = req.bundle.serving.artifact;
    auto it = artifacts.find(name);
    if (it == artifacts.end()) {
      fail(ErrorCode::kValidation, "artifact-not-produced", "serving artifact '" + name + "' was not produced");
    }
    const std::string bytes = read_file(it->second);
    models::deserialize_model(bytes);
    if (!run.metrics.count("val_accuracy") && !run.metrics.count("val_score") && !run.metrics.count("holdout_empty")) {
      fail(ErrorCode::kValidation, "missing-metric", "pipeline produced neither val_accuracy nor val_score");
    }
    json metrics_doc = {{"run_id", run.run_id}, {"metrics", run.metrics}};
    if (!report.empty()) metrics_doc["report"] = report;
    write_file_atomic(ws / "metrics.json", metrics_doc.dump(2));
    run.model_artifact = store.put_artifact("runs", run.run_id + "/" + name, bytes);
    store.put_artifact("runs", run.run_id + "/metrics.json", json(run.metrics).dump());
  } catch (const std::exception& e) {
    run.error = e.what();
    return finish(RunStatus::kFailed);
  }
  return finish(RunStatus::kSucceeded);
}

Executor::Executor(fs::path runs_root, store::Store& store, const Clock& clock, std::size_t max_concurrent)
    : runs_root_(std::move(runs_root)), store_(store), clock_(clock), max_concurrent_(std::max<std::size_t>(1, max_concurrent)) {
  fs::create_directories(runs_root_);
  for (std::size_t i = 0; i < max_concurrent_; ++i) workers_.emplace_back([this] { worker(); });
}

Executor::~Executor() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    for (auto& [_, flag] : cancel_flags_) flag->store(true);
  }
  cv_.notify_all();
  for (auto& t : workers_) t.join();
}

std::string Executor::submit(RunRequest request, Callback done) {
  std::lock_guard lock(mu_);
  if (request.run_id.empty()) {
    request.run_id = "run-" + std::to_string(clock_.now()) + "-" + std::to_string(next_id_++);
  }
  if (runs_.count(request.run_id)) {
    fail(ErrorCode::kConflict, "duplicate-run", "run id '" + request.run_id + "' already exists");
  }
  const std::string id = request.run_id;
  TrainingRun queued;
  queued.run_id = id;
  queued.model_id = request.model_id;
  queued.pipeline_digest = pipeline_digest(request.bundle.pipeline);
  queued.dataset_digest = request.data.digest;
  queued.started_at = clock_.now();
  queued.status = RunStatus::kQueued;
  runs_[id] = queued;
  auto flag = std::make_shared<std::atomic<bool>>(false);
  cancel_flags_[id] = flag;
  queue_.push_back({std::move(request), std::move(done), flag});
  cv_.notify_all();
  return id;
}

void Executor::cancel(const std::string& run_id) {
  std::lock_guard lock(mu_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) fail(ErrorCode::kNotFound, "unknown-run", "no run with id '" + run_id + "'");
  if (is_terminal(it->second.status)) return;
  cancel_flags_[run_id]->store(true);
}

TrainingRun Executor::get(const std::string& run_id) const {
  std::lock_guard lock(mu_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) fail(ErrorCode::kNotFound, "unknown-run", "no run with id '" + run_id + "'");
  return it->second;
}

std::vector<TrainingRun> Executor::list() const {
  std::lock_guard lock(mu_);
  std::vector<TrainingRun> out;
  for (const auto& [_, r] : runs_) out.push_back(r);
  return out;
}

TrainingRun Executor::wait(const std::string& run_id) const {
  std::unique_lock lock(mu_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) fail(ErrorCode::kNotFound, "unknown-run", "no run with id '" + run_id + "'");
  cv_.wait(lock, [&] { return is_terminal(runs_.at(run_id).status); });
  return runs_.at(run_id);
}

void Executor::wait_idle() const {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return queue_.empty() && active_ == 0; });
}

void Executor::worker() {
  while (true) {
    Job job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
      ++active_;
      std::size_t peak = peak_.load();
      while (active_ > peak && !peak_.compare_exchange_weak(peak, active_)) {
      }
      auto& r = runs_[job.request.run_id];
      if (job.cancel_flag->load()) {
        r.status = RunStatus::kCancelled;
        r.finished_at = clock_.now();
      } else {
        r.status = RunStatus::kRunning;
        r.started_at = clock_.now();
      }
    }
    TrainingRun result;
    if (job.cancel_flag->load()) {
      std::lock_guard lock(mu_);
      result = runs_[job.request.run_id];
    } else {
      auto flag = job.cancel_flag;
      result = run_pipeline(job.request, runs_root_, store_, clock_, [flag] { return flag->load(); });
    }
    {
      std::lock_guard lock(mu_);
      runs_[result.run_id] = result;
    }
    if (job.done) {
      try {
        job.done(result);
      } catch (...) {
      }
    }
    {
      std::lock_guard lock(mu_);
      --active_;
    }
    cv_.notify_all();
  }
}

}  // namespace modelforge::executor
