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

#include "modelforge/controller/lifecycle.h"

#include "modelforge/common/error.h"

namespace modelforge::controller {
namespace {

using S = LifecycleState;
using K = EventKind;

constexpr std::pair<S, const char*> kStateNames[] = {
    {S::kCreated, "Created"},     {S::kAcquiringData, "AcquiringData"},     {S::kTraining, "Training"},
    {S::kTrainingFailed, "TrainingFailed"}, {S::kPendingApproval, "PendingApproval"}, {S::kRejected, "Rejected"},
    {S::kServing, "Serving"},     {S::kRetraining, "Retraining"},           {S::kArchived, "Archived"},
    {S::kDeleted, "Deleted"},
};

constexpr std::pair<K, const char*> kEventNames[] = {
    {K::kTemplatePublished, "TemplatePublished"},
    {K::kModelCreated, "ModelCreated"},
    {K::kDataFetched, "DataFetched"},
    {K::kTrainingStarted, "TrainingStarted"},
    {K::kTrainingSucceeded, "TrainingSucceeded"},
    {K::kTrainingFailed, "TrainingFailed"},
    {K::kModelPendingApproval, "ModelPendingApproval"},
    {K::kModelApproved, "ModelApproved"},
    {K::kModelRejected, "ModelRejected"},
    {K::kModelDeployed, "ModelDeployed"},
    {K::kDriftDetected, "DriftDetected"},
    {K::kAccuracyDegraded, "AccuracyDegraded"},
    {K::kRetrainScheduled, "RetrainScheduled"},
    {K::kModelArchived, "ModelArchived"},
    {K::kModelDeleted, "ModelDeleted"},
    {K::kFeedbackOverwritten, "FeedbackOverwritten"},
};

[[noreturn]] void inapplicable(const ModelInstance& m, const Event& e, const std::string& why = "") {
  fail(ErrorCode::kStateConflict, "invalid-transition",
       "event " + std::string(to_string(e.kind)) + " is not applicable to model '" + m.model_id + "' in state " +
           std::string(to_string(m.state)) + (why.empty() ? "" : ": " + why),
       {{{"model_id", m.model_id}, {"state", to_string(m.state)}, {"event", to_string(e.kind)}}});
}

int payload_version(const Event& e) {
  if (!e.payload.contains("version") || !e.payload["version"].is_number_integer()) {
    fail(ErrorCode::kValidation, "invalid-event", std::string(to_string(e.kind)) + " needs an integer version");
  }
  return e.payload["version"].get<int>();
}

bool is_scheduled_fetch(const Event& e) { return e.payload.value("scheduled", false); }

}  // namespace

std::string_view to_string(LifecycleState s) {
  for (const auto& [v, n] : kStateNames) {
    if (v == s) return n;
  }
  return "Created";
}

LifecycleState state_from(std::string_view s) {
  for (const auto& [v, n] : kStateNames) {
    if (s == n) return v;
  }
  fail(ErrorCode::kValidation, "invalid-state", "unknown lifecycle state '" + std::string(s) + "'");
}

const std::vector<LifecycleState>& all_states() {
  static const std::vector<LifecycleState> v = [] {
    std::vector<LifecycleState> out;
    for (const auto& [s, _] : kStateNames) out.push_back(s);
    return out;
  }();
  return v;
}

std::string_view to_string(EventKind k) {
  for (const auto& [v, n] : kEventNames) {
    if (v == k) return n;
  }
  return "TemplatePublished";
}

EventKind event_kind_from(std::string_view s) {
  for (const auto& [v, n] : kEventNames) {
    if (s == n) return v;
  }
  fail(ErrorCode::kValidation, "invalid-event", "unknown event kind '" + std::string(s) + "'");
}

const std::vector<EventKind>& all_event_kinds() {
  static const std::vector<EventKind> v = [] {
    std::vector<EventKind> out;
    for (const auto& [k, _] : kEventNames) out.push_back(k);
    return out;
  }();
  return v;
}

json Event::to_json() const {
  return {{"seq", seq},
          {"at", format_rfc3339(at)},
          {"at_ms", at},
          {"kind", to_string(kind)},
          {"model_id", model_id ? json(*model_id) : json(nullptr)},
          {"payload", payload}};
}

Event Event::from_json(const json& j) {
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.at = j.at("at_ms").get<Timestamp>();
  e.kind = event_kind_from(j.at("kind").get<std::string>());
  if (j.contains("model_id") && !j["model_id"].is_null()) e.model_id = j["model_id"].get<std::string>();
  e.payload = j.value("payload", json::object());
  return e;
}

json ModelVersion::to_json() const {
  return {{"version", version},
          {"run_id", run_id},
          {"artifact", artifact.to_json()},
          {"metrics", metrics},
          {"dataset_digest", dataset_digest},
          {"reason", reason},
          {"created_at", format_rfc3339(created_at)},
          {"created_at_ms", created_at},
          {"approved", approved},
          {"archived", archived}};
}

ModelVersion ModelVersion::from_json(const json& j) {
  ModelVersion v;
  v.version = j.at("version").get<int>();
  v.run_id = j.at("run_id").get<std::string>();
  v.artifact = store::ArtifactKey::from_json(j.at("artifact"));
  v.metrics = j.at("metrics").get<std::map<std::string, double>>();
  v.dataset_digest = j.at("dataset_digest").get<std::string>();
  v.reason = j.at("reason").get<std::string>();
  v.created_at = j.at("created_at_ms").get<Timestamp>();
  v.approved = j.at("approved").get<bool>();
  v.archived = j.at("archived").get<bool>();
  return v;
}

const ModelVersion* ModelInstance::find_version(int v) const {
  for (const auto& mv : versions) {
    if (mv.version == v) return &mv;
  }
  return nullptr;
}

ModelVersion* ModelInstance::find_version(int v) {
  return const_cast<ModelVersion*>(static_cast<const ModelInstance*>(this)->find_version(v));
}

json ModelInstance::to_json() const {
  json j = {{"model_id", model_id},
            {"template_ref", template_ref.to_json()},
            {"config", config.to_json()},
            {"resolved", resolved.to_json()},
            {"approval_required", approval_required},
            {"state", to_string(state)},
            {"versions", json::array()},
            {"serving_version", serving_version ? json(*serving_version) : json(nullptr)},
            {"created_at", format_rfc3339(created_at)},
            {"created_at_ms", created_at},
            {"updated_at", format_rfc3339(updated_at)},
            {"updated_at_ms", updated_at},
            {"last_version", last_version},
            {"active_run", active_run ? json(*active_run) : json(nullptr)},
            {"candidate_version", candidate_version ? json(*candidate_version) : json(nullptr)},
            {"retrain_reason", retrain_reason},
            {"last_error", last_error ? json(*last_error) : json(nullptr)},
            {"last_dataset_digest", last_dataset_digest}};
  for (const auto& v : versions) j["versions"].push_back(v.to_json());
  return j;
}

ModelInstance ModelInstance::from_json(const json& j) {
  ModelInstance m;
  m.model_id = j.at("model_id").get<std::string>();
  m.template_ref = store::TemplateRef::from_json(j.at("template_ref"));
  m.config = tmpl::ModelConfig::from_json(j.at("config"));
  m.resolved = tmpl::ResolvedConfig::from_json(j.at("resolved"));
  m.approval_required = j.at("approval_required").get<bool>();
  m.state = state_from(j.at("state").get<std::string>());
  for (const auto& v : j.at("versions")) m.versions.push_back(ModelVersion::from_json(v));
  if (!j.at("serving_version").is_null()) m.serving_version = j["serving_version"].get<int>();
  m.created_at = j.at("created_at_ms").get<Timestamp>();
  m.updated_at = j.at("updated_at_ms").get<Timestamp>();
  m.last_version = j.at("last_version").get<int>();
  if (!j.at("active_run").is_null()) m.active_run = j["active_run"].get<std::string>();
  if (!j.at("candidate_version").is_null()) m.candidate_version = j["candidate_version"].get<int>();
  m.retrain_reason = j.at("retrain_reason").get<std::string>();
  if (!j.at("last_error").is_null()) m.last_error = j["last_error"].get<std::string>();
  m.last_dataset_digest = j.at("last_dataset_digest").get<std::string>();
  return m;
}

const ModelInstance* PlatformState::find(const std::string& id) const {
  auto it = models.find(id);
  return it == models.end() ? nullptr : &it->second;
}

json PlatformState::to_json() const {
  json j = {{"last_seq", last_seq}, {"models", json::array()}};
  for (const auto& [_, m] : models) j["models"].push_back(m.to_json());
  return j;
}

PlatformState PlatformState::from_json(const json& j) {
  PlatformState s;
  s.last_seq = j.at("last_seq").get<std::uint64_t>();
  for (const auto& mj : j.at("models")) {
    auto m = ModelInstance::from_json(mj);
    s.models.emplace(m.model_id, std::move(m));
  }
  return s;
}

LifecycleState transition(const ModelInstance& m, const Event& e) {
  const S s = m.state;
  if (s == S::kDeleted) inapplicable(m, e, "the model is deleted");
  switch (e.kind) {
    case K::kTemplatePublished:
    case K::kModelCreated:
      inapplicable(m, e);
    case K::kRetrainScheduled:
      if (s == S::kCreated || s == S::kTrainingFailed || s == S::kRejected) return S::kAcquiringData;
      if (s == S::kServing) return S::kRetraining;
      inapplicable(m, e);
    case K::kDataFetched:
      if (is_scheduled_fetch(e)) return s;
      if (s == S::kAcquiringData) return S::kTraining;
      if (s == S::kRetraining) return S::kRetraining;
      inapplicable(m, e);
    case K::kTrainingStarted:
      if (s == S::kTraining || s == S::kRetraining) {
        if (m.active_run) inapplicable(m, e, "run " + *m.active_run + " is still active");
        return s;
      }
      inapplicable(m, e);
    case K::kTrainingSucceeded:
      if (s == S::kTraining || s == S::kRetraining) {
        if (payload_version(e) != m.last_version + 1) inapplicable(m, e, "version numbers must increase by one");
        return m.auto_deploys() ? S::kServing : S::kPendingApproval;
      }
      inapplicable(m, e);
    case K::kTrainingFailed:
      if (s == S::kTraining || s == S::kAcquiringData) return S::kTrainingFailed;
      if (s == S::kRetraining) return S::kServing;  // the previous version keeps serving
      inapplicable(m, e);
    case K::kModelPendingApproval:
      if (s == S::kPendingApproval) return s;
      inapplicable(m, e);
    case K::kModelApproved:
      if (s == S::kPendingApproval) {
        if (!m.candidate_version || payload_version(e) != *m.candidate_version) {
          inapplicable(m, e, "approval must name the candidate version");
        }
        return S::kServing;
      }
      inapplicable(m, e);
    case K::kModelRejected:
      if (s == S::kPendingApproval) return m.serving_version ? S::kServing : S::kRejected;
      inapplicable(m, e);
    case K::kModelDeployed: {
      const int v = payload_version(e);
      const auto* mv = m.find_version(v);
      if (!mv) inapplicable(m, e, "version " + std::to_string(v) + " does not exist");
      if (!mv->approved) inapplicable(m, e, "version " + std::to_string(v) + " has not been approved");
      if (s == S::kServing || s == S::kRetraining || (s == S::kPendingApproval && m.serving_version)) return s;
      if (s == S::kArchived && e.payload.value("rollback", false)) return S::kServing;
      inapplicable(m, e);
    }
    case K::kDriftDetected:
    case K::kAccuracyDegraded:
      if (s == S::kServing) return s;
      inapplicable(m, e, "only serving models are monitored");
    case K::kModelArchived: {
      if (e.payload.contains("version") && !e.payload["version"].is_null()) {
        const int v = payload_version(e);
        const auto* mv = m.find_version(v);
        if (!mv) inapplicable(m, e, "version " + std::to_string(v) + " does not exist");
        if (m.serving_version == v && s != S::kArchived) inapplicable(m, e, "version " + std::to_string(v) + " is serving");
        if (mv->archived) inapplicable(m, e, "version " + std::to_string(v) + " is already archived");
        return s;
      }
      if (s == S::kServing) return S::kArchived;
      inapplicable(m, e);
    }
    case K::kModelDeleted:
      return S::kDeleted;
    case K::kFeedbackOverwritten:
      return s;
  }
  inapplicable(m, e);
}

void apply(PlatformState& st, const Event& e) {
  if (e.seq <= st.last_seq) {
    fail(ErrorCode::kInternal, "journal-order", "event seq " + std::to_string(e.seq) + " does not follow " +
                                                    std::to_string(st.last_seq));
  }
  if (e.kind == K::kTemplatePublished) {
    st.last_seq = e.seq;
    return;
  }
  if (!e.model_id) fail(ErrorCode::kValidation, "invalid-event", std::string(to_string(e.kind)) + " needs a model id");
  const std::string& id = *e.model_id;

  if (e.kind == K::kModelCreated) {
    if (st.models.count(id)) fail(ErrorCode::kConflict, "duplicate-model", "model '" + id + "' already exists");
    ModelInstance m;
    m.model_id = id;
    m.template_ref = store::TemplateRef::from_json(e.payload.at("template_ref"));
    m.config = tmpl::ModelConfig::from_json(e.payload.at("config"));
    m.resolved = tmpl::ResolvedConfig::from_json(e.payload.at("resolved"));
    m.approval_required = e.payload.at("approval_required").get<bool>();
    m.state = S::kCreated;
    m.created_at = e.at;
    m.updated_at = e.at;
    st.models.emplace(id, std::move(m));
    st.last_seq = e.seq;
    return;
  }

  auto it = st.models.find(id);
  if (it == st.models.end()) fail(ErrorCode::kNotFound, "unknown-model", "no model with id '" + id + "'");
  ModelInstance& m = it->second;
  const S next = transition(m, e);

  switch (e.kind) {
    case K::kRetrainScheduled:
      m.retrain_reason = e.payload.value("reason", "manual");
      m.last_error.reset();
      break;
    case K::kDataFetched:
      m.last_dataset_digest = e.payload.value("dataset_digest", "");
      break;
    case K::kTrainingStarted:
      m.active_run = e.payload.at("run_id").get<std::string>();
      break;
    case K::kTrainingSucceeded: {
      ModelVersion v;
      v.version = payload_version(e);
      v.run_id = e.payload.at("run_id").get<std::string>();
      v.artifact = store::ArtifactKey::from_json(e.payload.at("artifact"));
      v.metrics = e.payload.at("metrics").get<std::map<std::string, double>>();
      v.dataset_digest = e.payload.at("dataset_digest").get<std::string>();
      v.reason = e.payload.value("reason", m.retrain_reason);
      v.created_at = e.at;
      v.approved = m.auto_deploys();
      m.versions.push_back(std::move(v));
      m.last_version = payload_version(e);
      m.active_run.reset();
      m.candidate_version = m.auto_deploys() ? std::nullopt : std::optional<int>(m.last_version);
      break;
    }
    case K::kTrainingFailed:
      m.active_run.reset();
      m.last_error = e.payload.value("error", "training failed");
      break;
    case K::kModelApproved:
      if (m.candidate_version) m.find_version(*m.candidate_version)->approved = true;
      break;
    case K::kModelRejected:
      m.candidate_version.reset();
      break;
    case K::kModelDeployed: {
      const int v = payload_version(e);
      m.serving_version = v;
      m.find_version(v)->archived = false;
      if (m.candidate_version == v) m.candidate_version.reset();
      break;
    }
    case K::kModelArchived:
      if (e.payload.contains("version") && !e.payload["version"].is_null()) {
        auto* mv = m.find_version(payload_version(e));
        mv->archived = true;
        if (e.payload.contains("artifact")) mv->artifact = store::ArtifactKey::from_json(e.payload["artifact"]);
      } else {
        m.serving_version.reset();
        m.candidate_version.reset();
      }
      break;
    case K::kModelDeleted:
      m.serving_version.reset();
      m.active_run.reset();
      m.candidate_version.reset();
      break;
    default:
      break;
  }
  m.state = next;
  m.updated_at = e.at;
  st.last_seq = e.seq;
}

PlatformState replay(const std::vector<Event>& events) {
  PlatformState st;
  for (const auto& e : events) apply(st, e);
  return st;
}

std::string Action::describe() const {
  static const char* kNames[] = {"StartFetch", "StartTrainingRun", "Deploy", "Undeploy", "Emit",
                                 "Schedule",   "Unschedule",       "ResetMonitors", "ForgetMonitors"};
  std::string s = kNames[static_cast<int>(type)];
  s += "(" + model_id;
  if (type == Type::kEmit) s += ", " + std::string(to_string(event.kind));
  if (type == Type::kDeploy) s += ", v" + std::to_string(version);
  if (!reason.empty()) s += ", " + reason;
  return s + ")";
}

std::vector<Action> decide(const PlatformState& st, const Event& e) {
  std::vector<Action> actions;
  if (!e.model_id) return actions;  // catalog events carry no model work
  const auto* m = st.find(*e.model_id);
  if (!m) return actions;
  const std::string& id = m->model_id;
  auto emit = [&](EventKind k, json payload) {
    Action a{Action::Type::kEmit, id, "", "", 0, 0, {}};
    a.event.kind = k;
    a.event.model_id = id;
    a.event.payload = std::move(payload);
    actions.push_back(std::move(a));
  };
  auto simple = [&](Action::Type t) { actions.push_back(Action{t, id, "", "", 0, 0, {}}); };

  switch (e.kind) {
    case K::kModelCreated:
      if (m->config.retrain_interval) {
        Action a{Action::Type::kSchedule, id, "", "", 0, *m->config.retrain_interval, {}};
        actions.push_back(a);
      }
      if (m->config.auto_start) emit(K::kRetrainScheduled, {{"reason", "initial"}});
      break;
    case K::kRetrainScheduled: {
      const std::string reason = e.payload.value("reason", "manual");
      const std::string digest = e.payload.value("dataset_digest", "");
      if (!digest.empty()) {
        actions.push_back(Action{Action::Type::kStartTrainingRun, id, reason, digest, 0, 0, {}});
      } else {
        actions.push_back(Action{Action::Type::kStartFetch, id, reason, "", 0, 0, {}});
      }
      break;
    }
    case K::kDataFetched: {
      const std::string digest = e.payload.value("dataset_digest", "");
      if (!is_scheduled_fetch(e)) {
        if (m->state == S::kTraining || m->state == S::kRetraining) {
          actions.push_back(Action{Action::Type::kStartTrainingRun, id, m->retrain_reason, digest, 0, 0, {}});
        }
      } else if (m->state == S::kServing && !e.payload.value("cache_hit", false) &&
                 !e.payload.value("empty", false)) {
        emit(K::kRetrainScheduled, {{"reason", "scheduled"}, {"dataset_digest", digest}});
      }
      break;
    }
    case K::kTrainingSucceeded: {
      const int v = payload_version(e);
      if (m->auto_deploys()) {
        actions.push_back(Action{Action::Type::kDeploy, id, "", "", v, 0, {}});
      } else {
        emit(K::kModelPendingApproval, {{"version", v}, {"metrics", e.payload.at("metrics")}});
      }
      break;
    }
    case K::kModelApproved:
      actions.push_back(Action{Action::Type::kDeploy, id, "", "", payload_version(e), 0, {}});
      break;
    case K::kModelDeployed:
      simple(Action::Type::kResetMonitors);
      break;
    case K::kDriftDetected:
      if (m->state == S::kServing) emit(K::kRetrainScheduled, {{"reason", "drift"}});
      break;
    case K::kAccuracyDegraded:
      if (m->state == S::kServing) emit(K::kRetrainScheduled, {{"reason", "accuracy"}});
      break;
    case K::kModelArchived:
      if (m->state == S::kArchived && !(e.payload.contains("version") && !e.payload["version"].is_null())) {
        simple(Action::Type::kUndeploy);
      }
      break;
    case K::kModelDeleted:
      simple(Action::Type::kUnschedule);
      simple(Action::Type::kForgetMonitors);
      break;
    default:
      break;
  }
  return actions;
}

}  // namespace modelforge::controller
