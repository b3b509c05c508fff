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

#include "doctest.h"
#include "httplib.h"
#include "modelforge/api/config.h"
#include "modelforge/api/router.h"
#include "modelforge/api/server.h"
#include "modelforge/common/error.h"
#include "support/support.h"

using namespace modelforge;
using namespace modelforge::api;
using mftest::TempDir;

namespace {

const Timestamp kNow = *parse_rfc3339("2026-01-01T00:00:00Z");

struct Fixture {
  TempDir tmp{"api"};
  VirtualClock clock{kNow};
  std::unique_ptr<controller::Controller> platform;
  std::unique_ptr<Router> router;

  explicit Fixture(const std::string& token = "") {
    controller::PlatformOptions o;
    o.data_dir = tmp / "data";
    platform = std::make_unique<controller::Controller>(o, clock);
    router = std::make_unique<Router>(*platform, token);
  }

  Response call(const std::string& method, const std::string& path, const std::string& body = "",
                std::map<std::string, std::string> headers = {}) {
    Request r;
    r.method = method;
    auto q = path.find('?');
    r.path = path.substr(0, q);
    if (q != std::string::npos) {
      std::istringstream qs(path.substr(q + 1));
      for (std::string kv; std::getline(qs, kv, '&');) {
        const auto eq = kv.find('=');
        r.query[kv.substr(0, eq)] = eq == std::string::npos ? "" : kv.substr(eq + 1);
      }
    }
    r.body = body;
    r.headers = std::move(headers);
    return router->handle(r);
  }
  json call_json(const std::string& method, const std::string& path, const json& body = nullptr) {
    const auto resp = call(method, path, body.is_null() ? "" : body.dump());
    INFO(resp.body);
    CHECK(resp.status < 300);
    return json::parse(resp.body);
  }
};

std::string error_kind(const Response& r) { return json::parse(r.body)["error"]["kind"]; }

}  // namespace

TEST_CASE("health, unknown routes and wrong methods") {
  Fixture f;
  auto r = f.call("GET", "/v1/healthz");
  CHECK(r.status == 200);
  CHECK(json::parse(r.body)["version"] == MODELFORGE_VERSION);
  CHECK(f.call("GET", "/v1/nothing").status == 404);
  r = f.call("PUT", "/v1/models");
  CHECK(r.status == 405);
  CHECK(error_kind(r) == "method-not-allowed");
  CHECK(f.call("GET", "/v1/models/nope-1").status == 404);
  CHECK(f.call("POST", "/v1/models", "{not json").status == 400);
}

TEST_CASE("bearer authentication") {
  Fixture f("s3cret");
  CHECK(f.call("GET", "/v1/healthz").status == 200);
  const auto denied = f.call("GET", "/v1/models");
  CHECK(denied.status == 401);
  CHECK(denied.headers.at("WWW-Authenticate") == "Bearer");
  CHECK(f.call("GET", "/v1/models", "", {{"authorization", "Bearer wrong"}}).status == 401);
  CHECK(f.call("GET", "/v1/models", "", {{"authorization", "Bearer s3cret"}}).status == 200);
}

TEST_CASE("openapi lists every route") {
  Fixture f;
  const auto doc = f.call_json("GET", "/v1/openapi.json");
  CHECK(doc["openapi"].get<std::string>().rfind("3.", 0) == 0);
  for (const auto& r : f.router->routes()) {
    std::string method = r.method;
    std::transform(method.begin(), method.end(), method.begin(), ::tolower);
    CHECK(doc["paths"][r.pattern].contains(method));
  }
}

TEST_CASE("REST lifecycle with idempotency keys") {
  Fixture f;
  const auto csv = mftest::write_corpus(f.tmp.path(), {.n_rows = 150});
  for (const char* name : {"fcr", "approval"}) {
    const auto r = f.call("POST", "/v1/templates", mftest::shipped_template(name).bytes);
    CHECK(r.status == 201);
  }
  CHECK(f.call("POST", "/v1/templates", mftest::shipped_template("fcr").bytes).status == 409);
  CHECK(f.call("POST", "/v1/templates", "garbage").status == 400);
  CHECK(f.call_json("GET", "/v1/templates").size() == 2);
  CHECK(f.call_json("GET", "/v1/templates/fcr/latest")["manifest"]["name"] == "fcr");

  const auto body = mftest::fcr_config(csv).dump();
  const auto created = f.call("POST", "/v1/models", body, {{"idempotency-key", "k1"}});
  REQUIRE(created.status == 201);
  const std::string id = json::parse(created.body)["model_id"];
  const auto dup = f.call("POST", "/v1/models", body, {{"idempotency-key", "k1"}});
  CHECK(dup.status == 409);
  CHECK(error_kind(dup) == "duplicate-request");

  f.platform->wait_idle();
  CHECK(f.call_json("GET", "/v1/models/" + id)["state"] == "PendingApproval");
  CHECK(f.call("POST", "/v1/models/" + id + "/infer", R"({"description":"pipe"})").status == 409);
  f.call_json("POST", "/v1/models/" + id + "/approve");
  f.platform->wait_idle();
  CHECK(f.call_json("GET", "/v1/models/" + id)["state"] == "Serving");

  const auto inf = f.call_json("POST", "/v1/models/" + id + "/infer", {{"description", "pipe leak"}});
  CHECK(inf["model_version"] == 1);
  const auto batch =
      f.call_json("POST", "/v1/models/" + id + "/infer", json::array({{{"description", "a"}}, {{"description", "b"}}}));
  CHECK(batch.size() == 2);
  const auto fb = f.call_json("POST", "/v1/models/" + id + "/feedback",
                              {{"inference_id", inf["inference_id"]}, {"ground_truth", inf["output"]["label"]}});
  CHECK(fb["accuracy"]["accuracy"] == 1.0);
  CHECK(f.call("POST", "/v1/models/" + id + "/feedback", R"({"ground_truth":"x"})").status == 400);
  CHECK(f.call("POST", "/v1/models/" + id + "/train", R"({"reason":"whim"})").status == 400);
  CHECK(f.call("POST", "/v1/models/" + id + "/rollback", R"({"version":"1"})").status == 400);

  CHECK(f.call_json("GET", "/v1/models/" + id + "/metrics").contains("metrics"));
  CHECK(f.call_json("GET", "/v1/models/" + id + "/status")["state"] == "Serving");
  CHECK(f.call_json("GET", "/v1/models/" + id + "/drift?refresh=true")["status"] == "insufficient_data");
  const auto events = f.call_json("GET", "/v1/events?since=0");
  CHECK(events.size() >= 8);
  CHECK(f.call_json("GET", "/v1/events?since=" + std::to_string(events.back()["seq"].get<int>())).empty());
  CHECK(f.call_json("GET", "/v1/models?limit=1").size() == 1);

  CHECK(f.call("DELETE", "/v1/templates/fcr/1.0.0").status == 409);
  f.call_json("DELETE", "/v1/models/" + id);
  CHECK(f.call_json("GET", "/v1/models").empty());
  CHECK(f.call_json("GET", "/v1/models?include_deleted=true").size() == 1);
}

TEST_CASE("remote store routes") {
  Fixture f;
  const auto archive = mftest::shipped_template("similarity");
  CHECK(f.call("POST", "/store/templates", archive.bytes).status == 201);
  const auto listed = f.call_json("GET", "/store/templates?name=sim");
  REQUIRE(listed.size() == 1);
  const auto pulled = f.call("GET", "/store/templates/similarity/1.0.0");
  CHECK(pulled.status == 200);
  CHECK(pulled.body == archive.bytes);
  CHECK(pulled.headers.at("X-Template-Digest") == archive.digest);
  CHECK(f.call_json("GET", "/store/templates?name=zzz").empty());
  CHECK(f.call("DELETE", "/store/templates/similarity/1.0.0").status == 200);
  CHECK(f.call("GET", "/store/templates/similarity/1.0.0").status == 404);
}

TEST_CASE("configuration file and environment overrides") {
  TempDir tmp;
  write_file_atomic(tmp / "modelforge.yaml",
                    "data_dir: /var/lib/mf\nbind: 0.0.0.0:9000\ncapacity:\n  cpu_millis: 2000\n  memory_mb: 1024\n");
  auto c = load_config(tmp / "modelforge.yaml", {});
  CHECK(c.platform.data_dir == "/var/lib/mf");
  CHECK(c.host == "0.0.0.0");
  CHECK(c.port == 9000);
  CHECK(c.platform.capacity.cpu_millis == 2000);

  c = load_config(tmp / "modelforge.yaml",
                  {{"MF_BIND", "127.0.0.1:0"}, {"MF_TOKEN", "t"}, {"MF_CAPACITY_CPU_MILLIS", "3000"},
                   {"MF_IDLE_TIMEOUT", "90s"}, {"MF_DRIFT_THRESHOLD", "0.3"}});
  CHECK(c.port == 0);
  CHECK(c.token == "t");
  CHECK(c.platform.capacity.cpu_millis == 3000);
  CHECK(c.platform.gateway.idle_timeout == 90 * kSecond);
  CHECK(c.platform.monitoring.drift_threshold == 0.3);
  CHECK_THROWS_AS(load_config(tmp / "modelforge.yaml", {{"MF_CAPACITY_CPU_MILLIS", "lots"}}), Error);
  CHECK_THROWS_AS(load_config(tmp / "absent.yaml", {}), Error);
  CHECK_NOTHROW(load_config(std::nullopt, {}));
}

TEST_CASE("HTTP server serves the router, the ui and the event stream") {
  Fixture f;
  ServerConfig cfg;
  cfg.port = 0;
  cfg.token = "tok";
  Server server(*f.platform, cfg);
  const int port = server.start();
  REQUIRE(port > 0);
  httplib::Client cli("127.0.0.1", port);
  cli.set_bearer_token_auth("tok");
  auto res = cli.Get("/v1/healthz");
  REQUIRE(res);
  CHECK(res->status == 200);
  res = cli.Post("/v1/templates", mftest::shipped_template("fcr").bytes, "application/octet-stream");
  REQUIRE(res);
  CHECK(res->status == 201);
  res = cli.Get("/ui");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body.find("<html") != std::string::npos);

  httplib::Client anon("127.0.0.1", port);
  res = anon.Get("/v1/models");
  REQUIRE(res);
  CHECK(res->status == 401);

  std::string stream;
  httplib::Headers h = {{"Accept", "text/event-stream"}};
  cli.set_read_timeout(5, 0);
  cli.Get("/v1/events?since=0", h, [&](const char* data, size_t len) {
    stream.append(data, len);
    return stream.find("TemplatePublished") == std::string::npos;
  });
  CHECK(stream.find("data:") != std::string::npos);
  CHECK(stream.find("TemplatePublished") != std::string::npos);
  server.stop();
}
