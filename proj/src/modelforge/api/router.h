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

#include <functional>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "modelforge/common/error.h"
#include "modelforge/controller/controller.h"

namespace modelforge::api {

using nlohmann::json;

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;

  std::string header(const std::string& name) const;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;

  static Response json_body(int status, const json& body);
};

// Transport-independent REST surface over a Controller. The HTTP server and
// the in-process C API both dispatch through it, and the OpenAPI document is
// generated from its route table.
class Router {
 public:
  using Params = std::map<std::string, std::string>;
  using Handler = std::function<Response(const Request&, const Params&)>;

  struct Route {
    std::string method;
    std::string pattern;  // e.g. /v1/models/{id}
    std::string summary;
    std::string request_body;  // "", "json" or "binary"
    int success_status = 200;
    Handler handler;
    std::regex regex;
    std::vector<std::string> names;
  };

  Router(controller::Controller& platform, std::string token);

  Response handle(const Request& request);
  const std::vector<Route>& routes() const { return routes_; }
  json openapi() const;

  // Bearer check shared with the streaming endpoint.
  bool authorized(const Request& request) const;
  static Response error_response(const Error& err);

 private:
  void add(std::string method, std::string pattern, std::string summary, std::string request_body,
           int success_status, Handler handler);
  void register_routes();

  controller::Controller& platform_;
  std::string token_;
  std::vector<Route> routes_;
  std::mutex idem_mu_;
  std::map<std::string, std::string> idempotency_;  // key -> method path
};

json model_json(const controller::ModelInstance& m);
json event_json(const controller::Event& e);

}  // namespace modelforge::api
