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

#include "modelforge/gateway/gateway.h"

#include <chrono>
#include <random>

#include "modelforge/common/error.h"
#include "modelforge/connectors/snapshot.h"
#include "modelforge/models/predict.h"

namespace modelforge::gateway {
namespace {

std::string cell_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

[[noreturn]] void no_endpoint(const std::string& model_id) {
  fail(ErrorCode::kNotFound, "no-endpoint", "no endpoint for model '" + model_id + "'", {{{"model_id", model_id}}});
}

}  // namespace

std::string_view to_string(EndpointStatus s) {
  switch (s) {
    case EndpointStatus::kLoaded: return "Loaded";
    case EndpointStatus::kIdleUnloaded: return "Idle-Unloaded";
    case EndpointStatus::kUnavailable: return "Unavailable";
  }
  return "Unavailable";
}

json EndpointInfo::to_json() const {
  json j = {{"model_id", model_id},
            {"loaded_version", loaded_version},
            {"status", to_string(status)},
            {"last_request_at", last_request_at ? json(format_rfc3339(last_request_at)) : json(nullptr)},
            {"idle_timeout_ms", idle_timeout},
            {"in_flight", in_flight},
            {"loads", loads},
            {"unloads", unloads},
            {"artifact", artifact.to_json()}};
  if (!cause.empty()) j["cause"] = cause;
  return j;
}

json InferResult::to_json() const {
  return {{"inference_id", inference_id}, {"model_id", model_id},          {"model_version", model_version},
          {"served_at", format_rfc3339(served_at)}, {"sequence", sequence}, {"output", output}};
}

std::string new_inference_id() {
  thread_local std::mt19937_64 rng{std::random_device{}() ^
                                   static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
  static const char* kHex = "0123456789abcdef";
  std::string id;
  for (int w = 0; w < 2; ++w) {
    auto x = rng();
    for (int i = 0; i < 16; ++i, x >>= 4) id.push_back(kHex[x & 0xf]);
  }
  return id;
}

std::map<std::string, std::string> validate_request(const std::vector<tmpl::InputFieldSpec>& inputs,
                                                    const std::vector<std::string>& needed, const json& request) {
  if (!request.is_object()) {
    fail(ErrorCode::kValidation, "invalid-request", "inference request must be a JSON object keyed by input field");
  }
  json bad = json::array();
  std::map<std::string, std::string> cells;
  for (auto it = request.begin(); it != request.end(); ++it) {
    if (it->is_object() || it->is_array()) {
      bad.push_back({{"field", it.key()}, {"message", "must be a scalar"}});
      continue;
    }
    if (!it->is_null()) cells[it.key()] = cell_text(*it);
  }
  for (const auto& f : needed) {
    if (!cells.count(f)) bad.push_back({{"field", f}, {"message", "required"}});
  }
  for (const auto& in : inputs) {
    auto c = cells.find(in.name);
    if (c == cells.end()) continue;
    if (in.kind == tmpl::FieldKind::kNumeric && !connectors::parse_number(c->second)) {
      bad.push_back({{"field", in.name}, {"message", "must be a finite number"}});
    } else if (in.kind == tmpl::FieldKind::kTimestamp && !parse_rfc3339(c->second)) {
      bad.push_back({{"field", in.name}, {"message", "must be an RFC 3339 timestamp"}});
    }
  }
  if (!bad.empty()) {
    fail(ErrorCode::kValidation, "invalid-request",
         "invalid field '" + bad[0]["field"].get<std::string>() + "': " + bad[0]["message"].get<std::string>(), bad);
  }
  return cells;
}

// FIFO admission bounded by max_in_flight.
class Gateway::Admission {
 public:
  Admission(Endpoint& ep, std::size_t max_in_flight, Duration timeout) : ep_(ep) {
    std::unique_lock lock(ep.admit_mu);
    if (ep.removing) no_endpoint(ep.model_id);
    const std::uint64_t ticket = ep.next_ticket++;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout);
    const bool ok = ep.admit_cv.wait_until(lock, deadline, [&] {
      return ep.removing || (ticket == ep.head_ticket && ep.in_flight < max_in_flight);
    });
    if (!ok || ep.removing) {
      // Give up our place so later tickets do not wait on it.
      ep.abandoned.insert(ticket);
      advance();
      ep.admit_cv.notify_all();
      if (ep.removing) no_endpoint(ep.model_id);
      fail(ErrorCode::kCapacity, "queue-timeout", "request waited too long for a free slot on '" + ep.model_id + "'");
    }
    ++ep.head_ticket;
    advance();
    ++ep.in_flight;
    ep.admit_cv.notify_all();
  }
  ~Admission() {
    {
      std::lock_guard lock(ep_.admit_mu);
      --ep_.in_flight;
    }
    ep_.admit_cv.notify_all();
  }

 private:
  void advance() {
    while (ep_.abandoned.erase(ep_.head_ticket)) ++ep_.head_ticket;
  }
  Endpoint& ep_;
};

Gateway::Gateway(store::Store& store, const Clock& clock, GatewayOptions options)
    : store_(store), clock_(clock), options_(options) {}

std::shared_ptr<Gateway::Endpoint> Gateway::find(const std::string& model_id) const {
  std::shared_lock lock(mu_);
  auto it = endpoints_.find(model_id);
  return it == endpoints_.end() ? nullptr : it->second;
}

std::shared_ptr<const models::Model> Gateway::load(const store::ArtifactKey& key) const {
  return std::make_shared<const models::Model>(models::deserialize_model(store_.get_artifact(key)));
}

void Gateway::deploy(const std::string& model_id, int version, const store::ArtifactKey& artifact,
                     std::vector<tmpl::InputFieldSpec> inputs) {
  std::shared_ptr<Endpoint> ep;
  {
    std::unique_lock lock(mu_);
    auto& slot = endpoints_[model_id];
    if (!slot) {
      slot = std::make_shared<Endpoint>();
      slot->model_id = model_id;
      slot->log = std::make_shared<monitors::InferenceLog>(options_.log_capacity);
    }
    ep = slot;
  }
  std::shared_ptr<const models::Model> model;
  try {
    model = load(artifact);
  } catch (const Error& e) {
    std::lock_guard lock(ep->mu);
    if (!ep->loaded && ep->status != EndpointStatus::kIdleUnloaded) {
      ep->status = EndpointStatus::kUnavailable;
      ep->cause = e.what();
      ep->artifact = artifact;
      ep->version = version;
    }
    throw;
  }
  std::lock_guard lock(ep->mu);
  ep->inputs = std::move(inputs);
  ep->loaded = std::move(model);
  ep->version = version;
  ep->artifact = artifact;
  ep->status = EndpointStatus::kLoaded;
  ep->cause.clear();
  ep->last_request_at = clock_.now();
  ++ep->loads;
}

void Gateway::undeploy(const std::string& model_id) {
  auto ep = find(model_id);
  if (!ep) no_endpoint(model_id);
  {
    std::unique_lock lock(ep->admit_mu);
    if (ep->removing) no_endpoint(model_id);
    ep->removing = true;
    ep->admit_cv.notify_all();
    ep->admit_cv.wait_for(lock, std::chrono::milliseconds(options_.drain_timeout), [&] { return ep->in_flight == 0; });
  }
  std::unique_lock lock(mu_);
  endpoints_.erase(model_id);
}

InferResult Gateway::serve(Endpoint& ep, const json& request) {
  std::shared_ptr<const models::Model> model;
  int version = 0;
  std::uint64_t sequence = 0;
  std::vector<tmpl::InputFieldSpec> inputs;
  {
    std::lock_guard lock(ep.mu);
    if (ep.status == EndpointStatus::kUnavailable) {
      fail(ErrorCode::kStateConflict, "endpoint-unavailable",
           "model '" + ep.model_id + "' is unavailable: " + ep.cause);
    }
    if (!ep.loaded) {
      // Cold start after an idle unload.
      ep.loaded = load(ep.artifact);
      ep.status = EndpointStatus::kLoaded;
      ++ep.loads;
    }
    model = ep.loaded;
    version = ep.version;
    inputs = ep.inputs;
    ep.last_request_at = clock_.now();
    sequence = ++sequence_;
  }
  const auto cells = validate_request(inputs, models::model_input_fields(*model), request);
  const auto out = models::predict(*model, [&](const std::string& f) -> std::optional<std::string> {
    auto it = cells.find(f);
    if (it == cells.end()) return std::nullopt;
    return it->second;
  });
  InferResult r;
  r.inference_id = new_inference_id();
  r.model_id = ep.model_id;
  r.model_version = version;
  r.served_at = clock_.now();
  r.sequence = sequence;
  r.output = out.body;
  monitors::InferenceRecord rec;
  rec.inference_id = r.inference_id;
  rec.model_version = version;
  rec.at = r.served_at;
  rec.inputs = cells;
  rec.prediction = out.label.value_or("");
  ep.log->append(std::move(rec));
  return r;
}

InferResult Gateway::infer(const std::string& model_id, const json& request) {
  auto ep = find(model_id);
  if (!ep) no_endpoint(model_id);
  Admission slot(*ep, options_.max_in_flight, options_.queue_timeout);
  return serve(*ep, request);
}

std::vector<InferResult> Gateway::infer_batch(const std::string& model_id, const json& requests) {
  if (!requests.is_array()) fail(ErrorCode::kValidation, "invalid-request", "batch request must be a JSON array");
  auto ep = find(model_id);
  if (!ep) no_endpoint(model_id);
  Admission slot(*ep, options_.max_in_flight, options_.queue_timeout);
  // Validate everything first so a bad element leaves no log entries.
  {
    std::shared_ptr<const models::Model> model;
    std::vector<tmpl::InputFieldSpec> inputs;
    {
      std::lock_guard lock(ep->mu);
      if (!ep->loaded && ep->status != EndpointStatus::kUnavailable) {
        ep->loaded = load(ep->artifact);
        ep->status = EndpointStatus::kLoaded;
        ++ep->loads;
      }
      model = ep->loaded;
      inputs = ep->inputs;
    }
    if (model) {
      json bad = json::array();
      for (std::size_t i = 0; i < requests.size(); ++i) {
        try {
          validate_request(inputs, models::model_input_fields(*model), requests[i]);
        } catch (const Error& e) {
          bad.push_back({{"index", i}, {"message", e.what()}, {"fields", e.detail()}});
        }
      }
      if (!bad.empty()) {
        fail(ErrorCode::kValidation, "invalid-request",
             "batch element " + bad[0]["index"].dump() + ": " + bad[0]["message"].get<std::string>(), bad);
      }
    }
  }
  std::vector<InferResult> out;
  for (const auto& r : requests) out.push_back(serve(*ep, r));
  return out;
}

std::vector<std::string> Gateway::idle_sweep(Timestamp now) {
  std::vector<std::shared_ptr<Endpoint>> eps;
  {
    std::shared_lock lock(mu_);
    for (const auto& [_, ep] : endpoints_) eps.push_back(ep);
  }
  std::vector<std::string> unloaded;
  for (auto& ep : eps) {
    std::lock_guard lock(ep->mu);
    if (ep->status == EndpointStatus::kLoaded && now - ep->last_request_at > options_.idle_timeout) {
      ep->loaded.reset();
      ep->status = EndpointStatus::kIdleUnloaded;
      ++ep->unloads;
      unloaded.push_back(ep->model_id);
    }
  }
  return unloaded;
}

bool Gateway::has_endpoint(const std::string& model_id) const { return find(model_id) != nullptr; }

EndpointInfo Gateway::info(const Endpoint& ep) const {
  EndpointInfo i;
  {
    std::lock_guard lock(ep.mu);
    i.model_id = ep.model_id;
    i.loaded_version = ep.version;
    i.status = ep.status;
    i.cause = ep.cause;
    i.last_request_at = ep.last_request_at;
    i.loads = ep.loads;
    i.unloads = ep.unloads;
    i.artifact = ep.artifact;
  }
  i.idle_timeout = options_.idle_timeout;
  {
    std::lock_guard lock(const_cast<Endpoint&>(ep).admit_mu);
    i.in_flight = ep.in_flight;
  }
  return i;
}

EndpointInfo Gateway::status(const std::string& model_id) const {
  auto ep = find(model_id);
  if (!ep) no_endpoint(model_id);
  return info(*ep);
}

std::vector<EndpointInfo> Gateway::endpoints() const {
  std::vector<std::shared_ptr<Endpoint>> eps;
  {
    std::shared_lock lock(mu_);
    for (const auto& [_, ep] : endpoints_) eps.push_back(ep);
  }
  std::vector<EndpointInfo> out;
  for (const auto& ep : eps) out.push_back(info(*ep));
  return out;
}

std::shared_ptr<monitors::InferenceLog> Gateway::inference_log(const std::string& model_id) const {
  auto ep = find(model_id);
  return ep ? ep->log : nullptr;
}

std::shared_ptr<const models::Model> Gateway::current_model(const std::string& model_id) {
  auto ep = find(model_id);
  if (!ep) return nullptr;
  std::lock_guard lock(ep->mu);
  if (ep->loaded) return ep->loaded;
  if (ep->status == EndpointStatus::kUnavailable) return nullptr;
  // Read-only peek for monitors; does not count as a cold start.
  return load(ep->artifact);
}

}  // namespace modelforge::gateway
