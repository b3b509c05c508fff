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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "modelforge/common/time.h"
#include "modelforge/models/artifact.h"
#include "modelforge/monitors/inference_log.h"
#include "modelforge/store/store.h"
#include "modelforge/template/manifest.h"

namespace modelforge::gateway {

using nlohmann::json;

enum class EndpointStatus { kLoaded, kIdleUnloaded, kUnavailable };
std::string_view to_string(EndpointStatus s);

struct GatewayOptions {
  Duration idle_timeout = 5 * kMinute;
  std::size_t max_in_flight = 64;
  Duration queue_timeout = 30 * kSecond;  // real time
  Duration drain_timeout = 10 * kSecond;  // real time
  std::size_t log_capacity = 10000;
};

struct EndpointInfo {
  std::string model_id;
  int loaded_version = 0;
  EndpointStatus status = EndpointStatus::kUnavailable;
  std::string cause;
  Timestamp last_request_at = 0;
  Duration idle_timeout = 0;
  std::size_t in_flight = 0;
  std::uint64_t loads = 0;
  std::uint64_t unloads = 0;
  store::ArtifactKey artifact;
  json to_json() const;
};

struct InferResult {
  std::string inference_id;
  std::string model_id;
  int model_version = 0;
  Timestamp served_at = 0;
  std::uint64_t sequence = 0;  // order in which requests bound to a loaded model
  json output;
  json to_json() const;
};

// In-process serving layer. Model objects are immutable and shared by
// pointer, so a version swap replaces one pointer under the endpoint lock and
// requests already holding the old model finish on it.
class Gateway {
 public:
  Gateway(store::Store& store, const Clock& clock, GatewayOptions options = {});

  // Loads the artifact and points the endpoint at it. On a load failure the
  // endpoint keeps serving its previous version, or becomes Unavailable with
  // the cause when it had none; the error is rethrown.
  void deploy(const std::string& model_id, int version, const store::ArtifactKey& artifact,
              std::vector<tmpl::InputFieldSpec> inputs);
  // Drains in-flight requests (bounded by drain_timeout) and removes the
  // endpoint. Throws Error(kNotFound) for an unknown endpoint.
  void undeploy(const std::string& model_id);

  // `request` is an object keyed by input field. Throws Error(kNotFound) for
  // an unknown endpoint and Error(kValidation) naming offending fields.
  InferResult infer(const std::string& model_id, const json& request);
  std::vector<InferResult> infer_batch(const std::string& model_id, const json& requests);

  // Unloads every Loaded endpoint idle for longer than its timeout.
  std::vector<std::string> idle_sweep(Timestamp now);

  bool has_endpoint(const std::string& model_id) const;
  EndpointInfo status(const std::string& model_id) const;
  std::vector<EndpointInfo> endpoints() const;
  std::shared_ptr<monitors::InferenceLog> inference_log(const std::string& model_id) const;
  // The model currently loaded or loadable for the endpoint.
  std::shared_ptr<const models::Model> current_model(const std::string& model_id);

  const GatewayOptions& options() const { return options_; }
  void set_idle_timeout(Duration d) { options_.idle_timeout = d; }

 private:
  struct Endpoint {
    std::string model_id;
    std::vector<tmpl::InputFieldSpec> inputs;
    std::shared_ptr<monitors::InferenceLog> log;

    mutable std::mutex mu;  // guards the fields below
    std::shared_ptr<const models::Model> loaded;
    int version = 0;
    store::ArtifactKey artifact;
    EndpointStatus status = EndpointStatus::kUnavailable;
    std::string cause;
    Timestamp last_request_at = 0;
    std::uint64_t loads = 0;
    std::uint64_t unloads = 0;

    std::mutex admit_mu;
    std::condition_variable admit_cv;
    std::size_t in_flight = 0;
    std::uint64_t next_ticket = 0;
    std::uint64_t head_ticket = 0;
    std::set<std::uint64_t> abandoned;  // timed-out tickets behind the head
    bool removing = false;
  };
  class Admission;

  std::shared_ptr<Endpoint> find(const std::string& model_id) const;
  std::shared_ptr<const models::Model> load(const store::ArtifactKey& key) const;
  InferResult serve(Endpoint& ep, const json& request);
  EndpointInfo info(const Endpoint& ep) const;

  store::Store& store_;
  const Clock& clock_;
  GatewayOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Endpoint>> endpoints_;
  std::atomic<std::uint64_t> sequence_{0};
};

// Checks a request object against template input fields: every field in
// `needed` must be present and every present template field must parse under
// its kind. Fields outside the template pass through. Returns cells as text.
std::map<std::string, std::string> validate_request(const std::vector<tmpl::InputFieldSpec>& inputs,
                                                    const std::vector<std::string>& needed, const json& request);

std::string new_inference_id();

}  // namespace modelforge::gateway
