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

#include "modelforge/api/router.h"

#include <algorithm>

#include "modelforge/common/error.h"
#include "modelforge/template/package.h"

namespace modelforge::api {
namespace {

json parse_body(const Request& req, bool allow_empty) {
  if (req.body.empty() || req.body.find_first_not_of(" \t\r\n") == std::string::npos) {
    if (allow_empty) return json::object();
    fail(ErrorCode::kValidation, "invalid-body", "request body is required", {{{"field", "body"}}});
  }
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kValidation, "invalid-json", std::string("request body is not valid JSON: ") + e.what(),
         {{{"field", "body"}, {"byte", e.byte}}});
  }
}

std::size_t query_size(const Request& req, const char* name, std::size_t fallback) {
  auto it = req.query.find(name);
  if (it == req.query.end()) return fallback;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(it->second, &used);
    if (used == it->second.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  fail(ErrorCode::kValidation, "invalid-query", std::string(name) + " must be a non-negative integer",
       {{{"field", name}}});
}

bool query_flag(const Request& req, const char* name) {
  auto it = req.query.find(name);
  return it != req.query.end() && (it->second == "true" || it->second == "1" || it->second.empty());
}

template <typename T>
json page(const std::vector<T>& items, const Request& req, const std::function<json(const T&)>& to) {
  const std::size_t offset = query_size(req, "offset", 0);
  const std::size_t limit = query_size(req, "limit", items.size());
  json out = json::array();
  for (std::size_t i = offset; i < items.size() && out.size() < limit; ++i) out.push_back(to(items[i]));
  return out;
}

int int_field(const json& body, const char* name) {
  if (!body.is_object() || !body.contains(name) || !body[name].is_number_integer()) {
    fail(ErrorCode::kValidation, "invalid-body", std::string(name) + " must be an integer",
         {{{"field", name}, {"message", "must be an integer"}}});
  }
  return body[name].get<int>();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string Request::header(const std::string& name) const {
  auto it = headers.find(lower(name));
  return it == headers.end() ? std::string() : it->second;
}

Response Response::json_body(int status, const json& body) {
  Response r;
  r.status = status;
  r.body = body.dump();
  return r;
}

json model_json(const controller::ModelInstance& m) { return m.to_json(); }
json event_json(const controller::Event& e) { return e.to_json(); }

Router::Router(controller::Controller& platform, std::string token) : platform_(platform), token_(std::move(token)) {
  register_routes();
}

Response Router::error_response(const Error& err) { return Response::json_body(http_status(err.code()), {{"error", err.to_json()}}); }

bool Router::authorized(const Request& req) const {
  if (token_.empty()) return true;
  return req.header("authorization") == "Bearer " + token_;
}

void Router::add(std::string method, std::string pattern, std::string summary, std::string request_body,
                 int success_status, Handler handler) {
  Route r{std::move(method), std::move(pattern), std::move(summary), std::move(request_body), success_status,
          std::move(handler), std::regex(), {}};
  std::string re = "^";
  for (std::size_t i = 0; i < r.pattern.size();) {
    if (r.pattern[i] == '{') {
      const auto close = r.pattern.find('}', i);
      r.names.push_back(r.pattern.substr(i + 1, close - i - 1));
      re += "([^/]+)";
      i = close + 1;
    } else {
      const char c = r.pattern[i++];
      if (c == '.') re += "\\.";
      else re += c;
    }
  }
  r.regex = std::regex(re + "$");
  routes_.push_back(std::move(r));
}

Response Router::handle(const Request& req) {
  try {
    const Route* match = nullptr;
    Params params;
    bool path_known = false;
    for (const auto& r : routes_) {
      std::smatch m;
      if (!std::regex_match(req.path, m, r.regex)) continue;
      path_known = true;
      if (r.method != req.method) continue;
      match = &r;
      for (std::size_t i = 0; i < r.names.size(); ++i) params[r.names[i]] = m[i + 1].str();
      break;
    }
    if (!match) {
      if (path_known) {
        auto resp = Response::json_body(405, {{"error", {{"code", "validation"}, {"kind", "method-not-allowed"},
                                                        {"message", req.method + " is not supported on " + req.path},
                                                        {"detail", json::array()}}}});
        return resp;
      }
      fail(ErrorCode::kNotFound, "unknown-route", "no route for " + req.method + " " + req.path,
           {{{"path", req.path}}});
    }
    if (match->pattern != "/v1/healthz" && !authorized(req)) {
      auto resp = Response::json_body(401, {{"error", {{"code", "validation"}, {"kind", "unauthorized"},
                                                      {"message", "missing or invalid bearer token"},
                                                      {"detail", json::array()}}}});
      resp.headers["WWW-Authenticate"] = "Bearer";
      return resp;
    }

    const std::string key = req.method == "GET" ? "" : req.header("idempotency-key");
    if (!key.empty()) {
      std::lock_guard lock(idem_mu_);
      if (!idempotency_.emplace(key, req.method + " " + req.path).second) {
        fail(ErrorCode::kConflict, "duplicate-request",
             "idempotency key '" + key + "' was already used by " + idempotency_[key], {{{"idempotency_key", key}}});
      }
    }
    try {
      return match->handler(req, params);
    } catch (...) {
      if (!key.empty()) {
        std::lock_guard lock(idem_mu_);
        idempotency_.erase(key);
      }
      throw;
    }
  } catch (const Error& err) {
    return error_response(err);
  } catch (const json::exception& e) {
    return error_response(Error(ErrorCode::kValidation, "invalid-body", e.what()));
  } catch (const std::exception& e) {
    return error_response(Error(ErrorCode::kInternal, "internal", e.what()));
  }
}

void Router::register_routes() {
  auto& p = platform_;

  add("GET", "/v1/healthz", "Liveness and version", "", 200, [](const Request&, const Params&) {
    return Response::json_body(200, {{"status", "ok"}, {"version", MODELFORGE_VERSION}});
  });
  add("GET", "/v1/openapi.json", "OpenAPI document generated from the route table", "", 200,
      [this](const Request&, const Params&) { return Response::json_body(200, openapi()); });

  add("POST", "/v1/templates", "Publish a packaged template (.tmpl.tgz bytes)", "binary", 201,
      [&p](const Request& req, const Params&) {
        if (req.body.empty()) fail(ErrorCode::kValidation, "invalid-body", "template archive bytes are required");
        const auto ref = p.publish_template(tmpl::archive_from_bytes(req.body));
        return Response::json_body(201, ref.to_json());
      });
  add("GET", "/v1/templates", "List published templates", "", 200, [&p](const Request& req, const Params&) {
    const auto all = p.list_templates();
    return Response::json_body(
        200, page<store::TemplateSummary>(all, req, [](const store::TemplateSummary& s) { return s.to_json(); }));
  });
  add("GET", "/v1/templates/{name}/{version}", "Describe a template version", "", 200,
      [&p](const Request&, const Params& a) {
        return Response::json_body(200, p.describe_template(a.at("name"), a.at("version")));
      });
  add("GET", "/v1/templates/{name}/{version}/archive", "Download a template archive", "", 200,
      [&p](const Request&, const Params& a) {
        const auto ref = p.store().resolve(a.at("name"), a.at("version"));
        Response r;
        r.content_type = "application/gzip";
        r.body = p.store().pull(ref).bytes;
        r.headers["X-Template-Digest"] = ref.digest;
        return r;
      });
  add("DELETE", "/v1/templates/{name}/{version}", "Delete a template version", "", 200,
      [&p](const Request&, const Params& a) {
        p.delete_template(a.at("name"), a.at("version"));
        return Response::json_body(200, {{"deleted", a.at("name") + "@" + a.at("version")}});
      });

  // Remote-store surface: the same registry, pulled as raw archives.
  add("GET", "/store/templates", "Store: list published templates", "", 200, [&p](const Request& req, const Params&) {
    std::vector<store::TemplateSummary> all;
    const auto prefix = req.query.count("name") ? std::optional<std::string>(req.query.at("name")) : std::nullopt;
    all = p.store().list_templates(prefix);
    return Response::json_body(200, page<store::TemplateSummary>(all, req, [](const store::TemplateSummary& s) { return s.to_json(); }));
  });
  add("GET", "/store/templates/{name}/{version}", "Store: pull a template archive", "", 200,
      [&p](const Request&, const Params& a) {
        const auto ref = p.store().resolve(a.at("name"), a.at("version"));
        Response r;
        r.content_type = "application/gzip";
        r.body = p.store().pull(ref).bytes;
        r.headers["X-Template-Digest"] = ref.digest;
        r.headers["X-Template-Version"] = ref.version;
        return r;
      });
  add("POST", "/store/templates", "Store: publish a template archive", "binary", 201,
      [&p](const Request& req, const Params&) {
        if (req.body.empty()) fail(ErrorCode::kValidation, "invalid-body", "template archive bytes are required");
        return Response::json_body(201, p.publish_template(tmpl::archive_from_bytes(req.body)).to_json());
      });
  add("DELETE", "/store/templates/{name}/{version}", "Store: delete a template version", "", 200,
      [&p](const Request&, const Params& a) {
        p.delete_template(a.at("name"), a.at("version"));
        return Response::json_body(200, {{"deleted", a.at("name") + "@" + a.at("version")}});
      });

  add("POST", "/v1/models", "Instantiate a model from a template and configuration", "json", 201,
      [&p](const Request& req, const Params&) {
        return Response::json_body(201, model_json(p.create_model(parse_body(req, false))));
      });
  add("GET", "/v1/models", "List models", "", 200, [&p](const Request& req, const Params&) {
    const auto all = p.list_models(query_flag(req, "include_deleted"));
    return Response::json_body(
        200, page<controller::ModelInstance>(all, req, [](const controller::ModelInstance& m) { return model_json(m); }));
  });
  add("GET", "/v1/models/{id}", "Get a model", "", 200, [&p](const Request&, const Params& a) {
    return Response::json_body(200, model_json(p.get_model(a.at("id"))));
  });
  add("DELETE", "/v1/models/{id}", "Delete a model after draining its endpoint", "", 200,
      [&p](const Request&, const Params& a) {
        p.delete_model(a.at("id"));
        return Response::json_body(200, model_json(p.get_model(a.at("id"))));
      });
  add("POST", "/v1/models/{id}/train", "Trigger a (re)training run", "json", 202,
      [&p](const Request& req, const Params& a) {
        const auto body = parse_body(req, true);
        const std::string reason = body.value("reason", "manual");
        static const std::set<std::string> kReasons = {"manual", "scheduled", "drift", "accuracy"};
        if (!kReasons.count(reason)) {
          fail(ErrorCode::kValidation, "invalid-reason", "reason must be manual, scheduled, drift or accuracy",
               {{{"field", "reason"}}});
        }
        return Response::json_body(202, p.train(a.at("id"), reason).to_json());
      });
  add("POST", "/v1/models/{id}/approve", "Approve the pending version", "", 200,
      [&p](const Request&, const Params& a) {
        p.approve(a.at("id"));
        return Response::json_body(200, model_json(p.get_model(a.at("id"))));
      });
  add("POST", "/v1/models/{id}/reject", "Reject the pending version", "", 200, [&p](const Request&, const Params& a) {
    p.reject(a.at("id"));
    return Response::json_body(200, model_json(p.get_model(a.at("id"))));
  });
  add("POST", "/v1/models/{id}/rollback", "Serve an earlier version", "json", 200,
      [&p](const Request& req, const Params& a) {
        p.rollback(a.at("id"), int_field(parse_body(req, false), "version"));
        return Response::json_body(200, model_json(p.get_model(a.at("id"))));
      });
  add("POST", "/v1/models/{id}/archive", "Archive a version, or the whole model when no version is given", "json",
      200, [&p](const Request& req, const Params& a) {
        const auto body = parse_body(req, true);
        std::optional<int> version;
        if (body.contains("version") && !body["version"].is_null()) version = int_field(body, "version");
        p.archive(a.at("id"), version);
        return Response::json_body(200, model_json(p.get_model(a.at("id"))));
      });
  add("POST", "/v1/models/{id}/infer", "Run inference on one request object or an array of them", "json", 200,
      [&p](const Request& req, const Params& a) {
        const auto body = parse_body(req, false);
        if (body.is_array()) {
          json out = json::array();
          for (const auto& r : p.infer_batch(a.at("id"), body)) out.push_back(r.to_json());
          return Response::json_body(200, out);
        }
        return Response::json_body(200, p.infer(a.at("id"), body).to_json());
      });
  add("POST", "/v1/models/{id}/feedback", "Submit ground truth for a served inference", "json", 200,
      [&p](const Request& req, const Params& a) {
        const auto body = parse_body(req, false);
        if (!body.is_object() || !body.contains("inference_id") || !body["inference_id"].is_string()) {
          fail(ErrorCode::kValidation, "invalid-body", "inference_id must be a string", {{{"field", "inference_id"}}});
        }
        if (!body.contains("ground_truth")) {
          fail(ErrorCode::kValidation, "invalid-body", "ground_truth is required", {{{"field", "ground_truth"}}});
        }
        return Response::json_body(
            200, p.feedback(a.at("id"), body["inference_id"].get<std::string>(), body["ground_truth"]).to_json());
      });
  add("GET", "/v1/models/{id}/metrics", "Training metrics, versions and rolling accuracy", "", 200,
      [&p](const Request&, const Params& a) { return Response::json_body(200, p.metrics(a.at("id"))); });
  add("GET", "/v1/models/{id}/drift", "Latest drift report (refresh=true computes a new one)", "", 200,
      [&p](const Request& req, const Params& a) {
        if (query_flag(req, "refresh")) return Response::json_body(200, p.check_drift(a.at("id")).to_json());
        const auto report = p.last_drift(a.at("id"));
        return Response::json_body(200, report ? report->to_json() : json(nullptr));
      });
  add("GET", "/v1/models/{id}/status", "Lifecycle and endpoint status", "", 200,
      [&p](const Request&, const Params& a) { return Response::json_body(200, p.status(a.at("id"))); });
  add("GET", "/v1/events", "Event journal from ?since=seq (text/event-stream streams live)", "", 200,
      [&p](const Request& req, const Params&) {
        json out = json::array();
        for (const auto& e : p.events_since(query_size(req, "since", 0), query_size(req, "limit", 1000))) {
          out.push_back(event_json(e));
        }
        return Response::json_body(200, out);
      });
}

json Router::openapi() const {
  json paths = json::object();
  for (const auto& r : routes_) {
    json op = {{"summary", r.summary},
               {"operationId", lower(r.method) + r.pattern},
               {"responses",
                {{std::to_string(r.success_status), {{"description", "success"}}},
                 {"default", {{"description", "error"}, {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/ApiError"}}}}}}}}}}}};
    json parameters = json::array();
    for (const auto& n : r.names) {
      parameters.push_back({{"name", n}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}});
    }
    if (!parameters.empty()) op["parameters"] = parameters;
    if (r.request_body == "json") {
      op["requestBody"] = {{"content", {{"application/json", {{"schema", {{"type", "object"}}}}}}}};
    } else if (r.request_body == "binary") {
      op["requestBody"] = {
          {"content", {{"application/gzip", {{"schema", {{"type", "string"}, {"format", "binary"}}}}}}}};
    }
    if (r.pattern != "/v1/healthz") op["security"] = json::array({{{"bearer", json::array()}}});
    paths[r.pattern][lower(r.method)] = op;
  }
  return {{"openapi", "3.0.3"},
          {"info", {{"title", "modelforge"}, {"version", MODELFORGE_VERSION}}},
          {"paths", paths},
          {"components",
           {{"securitySchemes", {{"bearer", {{"type", "http"}, {"scheme", "bearer"}}}}},
            {"schemas",
             {{"ApiError",
               {{"type", "object"},
                {"properties",
                 {{"error",
                   {{"type", "object"},
                    {"properties",
                     {{"code",
                       {{"type", "string"},
                        {"enum", {"validation", "not-found", "conflict", "state-conflict", "integrity", "capacity",
                                  "internal"}}}},
                      {"kind", {{"type", "string"}}},
                      {"message", {{"type", "string"}}},
                      {"detail", {{"type", "array"}}}}}}}}}}}}}}}};
}

}  // namespace modelforge::api
