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

#include "modelforge/modelforge.h"

#include <cstring>
#include <memory>

#include "httplib.h"
#include "json.hpp"
#include "modelforge/api/config.h"
#include "modelforge/api/router.h"
#include "modelforge/api/server.h"
#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/common/yaml.h"
#include "modelforge/controller/controller.h"
#include "modelforge/corpus/corpus.h"
#include "modelforge/template/package.h"

using nlohmann::json;
namespace mf = modelforge;

struct mf_platform {
  mf::SystemClock clock;
  mf::api::ServerConfig config;
  std::unique_ptr<mf::controller::Controller> controller;
  std::unique_ptr<mf::api::Router> router;
};

struct mf_server {
  std::unique_ptr<mf::api::Server> server;
};

struct mf_client {
  std::string base_url;
  std::string token;
};

namespace {

thread_local std::string g_last_error;

mf_status status_of(mf::ErrorCode code) {
  switch (code) {
    case mf::ErrorCode::kValidation: return MF_ERR_VALIDATION;
    case mf::ErrorCode::kNotFound: return MF_ERR_NOT_FOUND;
    case mf::ErrorCode::kConflict: return MF_ERR_CONFLICT;
    case mf::ErrorCode::kStateConflict: return MF_ERR_STATE_CONFLICT;
    case mf::ErrorCode::kIntegrity: return MF_ERR_INTEGRITY;
    case mf::ErrorCode::kCapacity: return MF_ERR_CAPACITY;
    case mf::ErrorCode::kInternal: return MF_ERR_INTERNAL;
  }
  return MF_ERR_INTERNAL;
}

mf_status set_error(mf_status status, const std::string& code, const std::string& kind, const std::string& message) {
  g_last_error = json{{"code", code}, {"kind", kind}, {"message", message}, {"detail", json::array()}}.dump();
  return status;
}

template <typename F>
mf_status guarded(F&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const mf::Error& e) {
    g_last_error = e.to_json().dump();
    return status_of(e.code());
  } catch (const json::exception& e) {
    return set_error(MF_ERR_VALIDATION, "validation", "invalid-json", e.what());
  } catch (const std::exception& e) {
    return set_error(MF_ERR_INTERNAL, "internal", "internal", e.what());
  }
}

mf_status invalid(const char* what) {
  return set_error(MF_ERR_INVALID_ARGUMENT, "validation", "invalid-argument", std::string(what) + " must not be NULL");
}

char* dup(const std::string& s, size_t* len = nullptr) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  if (len) *len = s.size();
  return out;
}

}  // namespace

extern "C" {

const char* mf_version(void) { return MODELFORGE_VERSION; }

const char* mf_status_name(mf_status status) {
  switch (status) {
    case MF_OK: return "ok";
    case MF_ERR_VALIDATION: return "validation";
    case MF_ERR_NOT_FOUND: return "not-found";
    case MF_ERR_CONFLICT: return "conflict";
    case MF_ERR_STATE_CONFLICT: return "state-conflict";
    case MF_ERR_INTEGRITY: return "integrity";
    case MF_ERR_CAPACITY: return "capacity";
    case MF_ERR_INTERNAL: return "internal";
    case MF_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case MF_ERR_UNREACHABLE: return "unreachable";
  }
  return "internal";
}

const char* mf_last_error(void) { return g_last_error.c_str(); }

void mf_free(char* s) { std::free(s); }

mf_status mf_template_validate(const char* project_dir, char** report_json) {
  if (!project_dir || !report_json) return invalid("project_dir and report_json");
  return guarded([&] {
    *report_json = dup(mf::tmpl::validate_layout(project_dir).to_json().dump());
    return MF_OK;
  });
}

mf_status mf_template_package(const char* project_dir, const char* out_path, char** info_json) {
  if (!project_dir || !out_path) return invalid("project_dir and out_path");
  return guarded([&] {
    const auto archive = mf::tmpl::package(project_dir);
    mf::write_file_atomic(out_path, archive.bytes);
    if (info_json) {
      *info_json = dup(json{{"name", archive.manifest.name},
                            {"version", archive.manifest.version},
                            {"digest", archive.digest},
                            {"path", out_path}}
                           .dump());
    }
    return MF_OK;
  });
}

mf_status mf_template_scaffold(const char* project_dir, const char* name) {
  if (!project_dir || !name) return invalid("project_dir and name");
  return guarded([&] {
    mf::tmpl::scaffold_project(project_dir, name);
    return MF_OK;
  });
}

mf_status mf_yaml_to_json(const char* yaml, char** json_text) {
  if (!yaml || !json_text) return invalid("yaml and json_text");
  return guarded([&] {
    *json_text = dup(mf::parse_yaml(yaml, "input").dump());
    return MF_OK;
  });
}

mf_status mf_corpus_generate(const char* options_json, char** csv) {
  if (!csv) return invalid("csv");
  return guarded([&] {
    mf::corpus::CorpusOptions o;
    if (options_json && *options_json) {
      const auto j = json::parse(options_json);
      o.seed = j.value("seed", o.seed);
      o.n_rows = j.value("n_rows", o.n_rows);
      o.n_codes = j.value("n_codes", o.n_codes);
      o.approval_noise = j.value("approval_noise", o.approval_noise);
      if (j.contains("sites")) o.sites = j["sites"].get<std::vector<std::string>>();
      if (j.contains("base_time")) {
        const auto t = mf::parse_rfc3339(j["base_time"].get<std::string>());
        if (!t) mf::fail(mf::ErrorCode::kValidation, "invalid-corpus-options", "base_time must be RFC 3339");
        o.base_time = *t;
      }
    }
    *csv = dup(mf::corpus::to_csv(mf::corpus::generate_corpus(o)));
    return MF_OK;
  });
}

mf_status mf_platform_open(const char* config_path, const char* overrides_json, mf_platform** out) {
  if (!out) return invalid("out");
  *out = nullptr;
  return guarded([&] {
    json doc = json::object();
    if (config_path && *config_path) {
      doc = mf::parse_yaml(mf::read_file(config_path), config_path);
      if (doc.is_null()) doc = json::object();
    }
    if (overrides_json && *overrides_json) doc.update(json::parse(overrides_json));
    auto p = std::make_unique<mf_platform>();
    p->config = mf::api::config_from_json(doc, mf::api::process_environment());
    p->controller = std::make_unique<mf::controller::Controller>(p->config.platform, p->clock);
    p->router = std::make_unique<mf::api::Router>(*p->controller, p->config.token);
    *out = p.release();
    return MF_OK;
  });
}

void mf_platform_close(mf_platform* platform) { delete platform; }

mf_status mf_platform_request(mf_platform* platform, const char* method, const char* path, const char* headers_json,
                              const char* body, size_t body_len, int* http_status, char** response,
                              size_t* response_len) {
  if (!platform || !method || !path || !http_status || !response) return invalid("platform, method, path and outputs");
  return guarded([&] {
    mf::api::Request req;
    req.method = method;
    std::string target = path;
    const auto q = target.find('?');
    req.path = target.substr(0, q);
    if (q != std::string::npos) {
      httplib::Params params;
      httplib::detail::parse_query_text(target.substr(q + 1), params);
      for (const auto& [k, v] : params) req.query[k] = v;
    }
    if (headers_json && *headers_json) {
      for (const auto& [k, v] : json::parse(headers_json).items()) {
        std::string name = k;
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        req.headers[name] = v.get<std::string>();
      }
    }
    if (body) req.body.assign(body, body_len);
    const auto resp = platform->router->handle(req);
    *http_status = resp.status;
    *response = dup(resp.body, response_len);
    return MF_OK;
  });
}

mf_status mf_platform_tick(mf_platform* platform) {
  if (!platform) return invalid("platform");
  return guarded([&] {
    platform->controller->tick();
    return MF_OK;
  });
}

mf_status mf_platform_wait_idle(mf_platform* platform) {
  if (!platform) return invalid("platform");
  return guarded([&] {
    platform->controller->wait_idle();
    return MF_OK;
  });
}

mf_status mf_server_start(mf_platform* platform, mf_server** out, int* bound_port) {
  if (!platform || !out) return invalid("platform and out");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<mf_server>();
    s->server = std::make_unique<mf::api::Server>(*platform->controller, platform->config);
    const int port = s->server->start();
    if (bound_port) *bound_port = port;
    *out = s.release();
    return MF_OK;
  });
}

void mf_server_wait(mf_server* server) {
  if (server) server->server->wait();
}

void mf_server_stop(mf_server* server) {
  if (server) server->server->stop();
}

void mf_server_free(mf_server* server) { delete server; }

mf_status mf_client_new(const char* base_url, const char* token, mf_client** out) {
  if (!base_url || !out) return invalid("base_url and out");
  return guarded([&] {
    *out = new mf_client{base_url, token ? token : ""};
    return MF_OK;
  });
}

void mf_client_free(mf_client* client) { delete client; }

mf_status mf_client_request(mf_client* client, const char* method, const char* path, const char* content_type,
                            const char* body, size_t body_len, const char* idempotency_key, int* http_status,
                            char** response, size_t* response_len) {
  if (!client || !method || !path || !http_status || !response) return invalid("client, method, path and outputs");
  return guarded([&] {
    httplib::Client cli(client->base_url);
    cli.set_connection_timeout(5, 0);
    cli.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!client->token.empty()) headers.emplace("Authorization", "Bearer " + client->token);
    if (idempotency_key && *idempotency_key) headers.emplace("Idempotency-Key", idempotency_key);
    const std::string ct = content_type ? content_type : "application/json";
    const std::string payload = body ? std::string(body, body_len) : std::string();
    const std::string m = method;
    httplib::Result res;
    if (m == "GET") {
      res = cli.Get(path, headers);
    } else if (m == "POST") {
      res = cli.Post(path, headers, payload, ct);
    } else if (m == "DELETE") {
      res = cli.Delete(path, headers, payload, ct);
    } else if (m == "PUT") {
      res = cli.Put(path, headers, payload, ct);
    } else {
      return set_error(MF_ERR_INVALID_ARGUMENT, "validation", "invalid-argument", "unsupported method " + m);
    }
    if (!res) {
      return set_error(MF_ERR_UNREACHABLE, "internal", "unreachable",
                       "cannot reach " + client->base_url + ": " + httplib::to_string(res.error()));
    }
    *http_status = res->status;
    *response = dup(res->body, response_len);
    return MF_OK;
  });
}

mf_status mf_client_follow_events(mf_client* client, uint64_t since, mf_event_callback callback, void* user) {
  if (!client || !callback) return invalid("client and callback");
  return guarded([&] {
    httplib::Client cli(client->base_url);
    cli.set_connection_timeout(5, 0);
    cli.set_read_timeout(3600, 0);
    httplib::Headers headers = {{"Accept", "text/event-stream"}};
    if (!client->token.empty()) headers.emplace("Authorization", "Bearer " + client->token);
    std::string buffer;
    bool stopped = false;
    int status = 0;
    std::string error_body;
    auto res = cli.Get(
        "/v1/events?since=" + std::to_string(since), headers,
        [&](const httplib::Response& r) {
          status = r.status;
          return true;
        },
        [&](const char* data, size_t len) {
          if (status != 200) {
            error_body.append(data, len);
            return true;
          }
          buffer.append(data, len);
          std::size_t end;
          while ((end = buffer.find("\n\n")) != std::string::npos) {
            const std::string frame = buffer.substr(0, end);
            buffer.erase(0, end + 2);
            std::size_t pos = frame.find("data: ");
            if (pos == std::string::npos) continue;
            const auto eol = frame.find('\n', pos);
            const std::string data_line = frame.substr(pos + 6, eol == std::string::npos ? std::string::npos : eol - pos - 6);
            if (callback(data_line.c_str(), user) != 0) {
              stopped = true;
              return false;
            }
          }
          return true;
        });
    if (stopped) return MF_OK;
    if (status != 0 && status != 200) {
      try {
        g_last_error = json::parse(error_body).at("error").dump();
      } catch (const std::exception&) {
        g_last_error = error_body;
      }
      return MF_ERR_VALIDATION;
    }
    if (!res) {
      return set_error(MF_ERR_UNREACHABLE, "internal", "unreachable",
                       "cannot reach " + client->base_url + ": " + httplib::to_string(res.error()));
    }
    return MF_OK;
  });
}

}  // extern "C"
