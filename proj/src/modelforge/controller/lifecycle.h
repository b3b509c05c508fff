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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "modelforge/common/time.h"
#include "modelforge/store/store.h"
#include "modelforge/template/config.h"

namespace modelforge::controller {

using nlohmann::json;

enum class LifecycleState {
  kCreated,
  kAcquiringData,
  kTraining,
  kTrainingFailed,
  kPendingApproval,
  kRejected,
  kServing,
  kRetraining,
  kArchived,
  kDeleted,
};
std::string_view to_string(LifecycleState s);
LifecycleState state_from(std::string_view s);
const std::vector<LifecycleState>& all_states();

enum class EventKind {
  kTemplatePublished,
  kModelCreated,
  kDataFetched,
  kTrainingStarted,
  kTrainingSucceeded,
  kTrainingFailed,
  kModelPendingApproval,
  kModelApproved,
  kModelRejected,
  kModelDeployed,
  kDriftDetected,
  kAccuracyDegraded,
  kRetrainScheduled,
  kModelArchived,
  kModelDeleted,
  kFeedbackOverwritten,
};
std::string_view to_string(EventKind k);
EventKind event_kind_from(std::string_view s);
const std::vector<EventKind>& all_event_kinds();

struct Event {
  std::uint64_t seq = 0;
  Timestamp at = 0;
  EventKind kind = EventKind::kTemplatePublished;
  std::optional<std::string> model_id;
  json payload = json::object();

  json to_json() const;
  static Event from_json(const json& j);
};

struct ModelVersion {
  int version = 0;
  std::string run_id;
  store::ArtifactKey artifact;
  std::map<std::string, double> metrics;
  std::string dataset_digest;
  std::string reason;  // initial | manual | scheduled | drift | accuracy
  Timestamp created_at = 0;
  bool approved = false;
  bool archived = false;

  json to_json() const;
  static ModelVersion from_json(const json& j);
};

struct ModelInstance {
  std::string model_id;
  store::TemplateRef template_ref;
  tmpl::ModelConfig config;
  tmpl::ResolvedConfig resolved;
  bool approval_required = true;  // from the manifest
  LifecycleState state = LifecycleState::kCreated;
  std::vector<ModelVersion> versions;
  std::optional<int> serving_version;
  Timestamp created_at = 0;
  Timestamp updated_at = 0;

  int last_version = 0;
  std::optional<std::string> active_run;
  std::optional<int> candidate_version;  // awaiting approval
  std::string retrain_reason;
  std::optional<std::string> last_error;
  std::string last_dataset_digest;

  // True when a new version goes live without a human decision.
  bool auto_deploys() const { return !approval_required || config.auto_approve; }
  const ModelVersion* find_version(int v) const;
  ModelVersion* find_version(int v);
  json to_json() const;
  static ModelInstance from_json(const json& j);
};

struct PlatformState {
  std::map<std::string, ModelInstance> models;
  std::uint64_t last_seq = 0;

  const ModelInstance* find(const std::string& id) const;
  json to_json() const;
  static PlatformState from_json(const json& j);
};

// The lifecycle state an event moves a model to. Throws
// Error(kStateConflict, "invalid-transition") naming both the state and the
// event when it is not applicable; `instance` is unchanged either way.
LifecycleState transition(const ModelInstance& instance, const Event& event);

// Validates and folds one event into the state. Replaying a journal through
// apply() from an empty state reconstructs the live state exactly.
void apply(PlatformState& state, const Event& event);
PlatformState replay(const std::vector<Event>& events);

// What the runtime should do in response to an event that has just been
// applied to `state`.
struct Action {
  enum class Type {
    kStartFetch,        // model_id, reason
    kStartTrainingRun,  // model_id, dataset_digest, reason
    kDeploy,            // model_id, version
    kUndeploy,          // model_id
    kEmit,              // event
    kSchedule,          // model_id, interval
    kUnschedule,        // model_id
    kResetMonitors,     // model_id
    kForgetMonitors,    // model_id
  };
  Type type;
  std::string model_id;
  std::string reason;
  std::string dataset_digest;
  int version = 0;
  Duration interval = 0;
  Event event;  // kEmit: seq and at are assigned by the runtime

  std::string describe() const;
};

std::vector<Action> decide(const PlatformState& state, const Event& event);

}  // namespace modelforge::controller
