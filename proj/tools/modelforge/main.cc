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

// modelforge command-line client. Every API subcommand is a thin wrapper over
// exactly one REST route; template and corpus helpers run locally.

#include <unistd.h>

#include <csignal>
#include <filesystem>
#include <optional>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "modelforge/modelforge.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitApi = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::string server;
  std::string token;
  std::string output = "table";
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  mf_free(s);
  return out;
}

int report_error(mf_status st) {
  std::string detail = mf_last_error();
  std::string message = detail;
  try {
    message = json::parse(detail).value("message", detail);
  } catch (const std::exception&) {
  }
  std::cerr << "error (" << mf_status_name(st) << "): " << message << "\n";
  return kExitApi;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

void print_table(const json& rows, const std::vector<std::string>& columns) {
  std::vector<std::size_t> width(columns.size());
  std::vector<std::vector<std::string>> cells;
  for (std::size_t c = 0; c < columns.size(); ++c) width[c] = columns[c].size();
  for (const auto& r : rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      line.push_back(r.contains(columns[c]) ? scalar(r[columns[c]]) : "-");
      width[c] = std::max(width[c], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      std::cout << line[c] << (c + 1 < line.size() ? std::string(width[c] - line[c].size() + 2, ' ') : "");
    }
    std::cout << "\n";
  };
  std::vector<std::string> header;
  for (const auto& c : columns) {
    std::string h = c;
    for (auto& ch : h) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    header.push_back(h);
  }
  emit(header);
  for (const auto& l : cells) emit(l);
}

void print(const Globals& g, const json& value, const std::vector<std::string>& columns = {}) {
  if (g.output == "json") {
    std::cout << value.dump(2) << "\n";
    return;
  }
  if (value.is_array()) {
    std::vector<std::string> cols = columns;
    if (cols.empty() && !value.empty() && value[0].is_object()) {
      for (const auto& [k, v] : value[0].items()) {
        if (!v.is_structured()) cols.push_back(k);
      }
    }
    if (cols.empty()) {
      for (const auto& v : value) std::cout << scalar(v) << "\n";
    } else {
      print_table(value, cols);
    }
    return;
  }
  if (value.is_object()) {
    for (const auto& [k, v] : value.items()) std::cout << k << ": " << scalar(v) << "\n";
    return;
  }
  std::cout << scalar(value) << "\n";
}

// One REST call; prints the API error and returns false on failure.
bool call(const Globals& g, const std::string& method, const std::string& path, json& out,
          const std::string& body = "", const std::string& content_type = "application/json",
          const std::string& idempotency_key = "", int* exit_code = nullptr) {
  mf_client* client = nullptr;
  mf_status st = mf_client_new(g.server.c_str(), g.token.empty() ? nullptr : g.token.c_str(), &client);
  if (st != MF_OK) {
    if (exit_code) *exit_code = report_error(st);
    return false;
  }
  int http = 0;
  char* resp = nullptr;
  size_t len = 0;
  st = mf_client_request(client, method.c_str(), path.c_str(), content_type.c_str(), body.data(), body.size(),
                         idempotency_key.empty() ? nullptr : idempotency_key.c_str(), &http, &resp, &len);
  mf_client_free(client);
  if (st != MF_OK) {
    if (exit_code) *exit_code = report_error(st);
    return false;
  }
  const std::string text = take(resp);
  try {
    out = text.empty() ? json(nullptr) : json::parse(text);
  } catch (const std::exception&) {
    out = text;
  }
  if (http >= 400) {
    const json err = out.is_object() && out.contains("error") ? out["error"] : json{{"message", text}};
    std::cerr << "error (" << err.value("code", std::to_string(http)) << "): " << err.value("message", text) << "\n";
    if (err.contains("detail") && err["detail"].is_array() && !err["detail"].empty()) {
      std::cerr << "detail: " << err["detail"].dump() << "\n";
    }
    if (exit_code) *exit_code = kExitApi;
    return false;
  }
  return true;
}

json parse_config_file(const std::string& path) {
  const std::string text = read_text(path);
  char* out = nullptr;
  const mf_status st = mf_yaml_to_json(text.c_str(), &out);
  if (st != MF_OK) {
    report_error(st);
    throw CLI::RuntimeError(kExitApi);
  }
  return json::parse(take(out));
}

std::string url_escape(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

mf_server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) mf_server_stop(g_server);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modelforge: template-based model lifecycle platform"};
  app.require_subcommand(1);
  Globals g;
  g.server = env_or("MF_SERVER", "http://127.0.0.1:8080");
  g.token = env_or("MF_TOKEN", "");
  app.add_option("--server", g.server, "API base URL (env MF_SERVER)");
  app.add_option("--token", g.token, "Bearer token (env MF_TOKEN)");
  app.add_option("--output,-o", g.output, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.set_version_flag("--version", std::string(mf_version()));

  int rc = kExitOk;
  auto run = [&](const std::function<bool()>& fn) {
    return [&rc, fn] {
      if (!fn() && rc == kExitOk) rc = kExitApi;
    };
  };
  json out;

  // ---- template -------------------------------------------------------------
  auto* tmpl = app.add_subcommand("template", "Template authoring and registry");
  tmpl->require_subcommand(1);

  std::string project_dir;
  auto* validate = tmpl->add_subcommand("validate", "Validate a template project layout and specs");
  validate->add_option("dir", project_dir, "Project directory")->required();
  validate->callback(run([&] {
    char* report = nullptr;
    const mf_status st = mf_template_validate(project_dir.c_str(), &report);
    if (st != MF_OK) {
      rc = report_error(st);
      return false;
    }
    const json r = json::parse(take(report));
    if (g.output == "json") {
      print(g, r);
    } else {
      for (const auto& e : r["entries"]) {
        std::cout << (e["present"].get<bool>() ? "ok      " : (e["required"].get<bool>() ? "MISSING " : "absent  "))
                  << e["name"].get<std::string>() << "\n";
      }
      for (const auto& f : r["files"]) std::cout << f["status"].get<std::string>() << "  " << f["path"].get<std::string>() << "\n";
      for (const auto& d : r["diagnostics"]) std::cout << "diagnostic: " << d.get<std::string>() << "\n";
      std::cout << (r["ok"].get<bool>() ? "valid" : "invalid") << "\n";
    }
    if (!r["ok"].get<bool>()) rc = kExitApi;
    return true;
  }));

  std::string package_out;
  auto* package = tmpl->add_subcommand("package", "Package a template project into a .tmpl.tgz");
  package->add_option("dir", project_dir, "Project directory")->required();
  package->add_option("--out", package_out, "Archive path (default <name>-<version>.tmpl.tgz)");
  package->callback(run([&] {
    std::string target = package_out;
    if (target.empty()) target = "template.tmpl.tgz";
    char* info = nullptr;
    const mf_status st = mf_template_package(project_dir.c_str(), target.c_str(), &info);
    if (st != MF_OK) {
      rc = report_error(st);
      return false;
    }
    json j = json::parse(take(info));
    if (package_out.empty()) {
      const std::string named = j["name"].get<std::string>() + "-" + j["version"].get<std::string>() + ".tmpl.tgz";
      std::rename(target.c_str(), named.c_str());
      j["path"] = named;
    }
    print(g, j);
    return true;
  }));

  std::string scaffold_name;
  auto* scaffold = tmpl->add_subcommand("scaffold", "Create a boilerplate template project");
  scaffold->add_option("dir", project_dir, "Project directory")->required();
  scaffold->add_option("--name", scaffold_name, "Template name")->required();
  scaffold->callback(run([&] {
    const mf_status st = mf_template_scaffold(project_dir.c_str(), scaffold_name.c_str());
    if (st != MF_OK) {
      rc = report_error(st);
      return false;
    }
    std::cout << project_dir << "\n";
    return true;
  }));

  std::string archive_path;
  auto* publish = tmpl->add_subcommand("publish", "Publish a .tmpl.tgz (or a project directory) to the store");
  publish->add_option("archive", archive_path, "Archive file or project directory")->required();
  publish->callback(run([&] {
    std::string bytes;
    if (std::filesystem::is_directory(archive_path)) {
      const auto tmp = std::filesystem::temp_directory_path() / ("mf-publish-" + std::to_string(::getpid()) + ".tgz");
      const mf_status st = mf_template_package(archive_path.c_str(), tmp.c_str(), nullptr);
      if (st != MF_OK) {
        rc = report_error(st);
        return false;
      }
      bytes = read_text(tmp.string());
      std::filesystem::remove(tmp);
    } else {
      bytes = read_text(archive_path);
    }
    if (!call(g, "POST", "/v1/templates", out, bytes, "application/gzip", "", &rc)) return false;
    print(g, out);
    return true;
  }));

  auto* tlist = tmpl->add_subcommand("list", "List published templates");
  tlist->callback(run([&] {
    if (!call(g, "GET", "/v1/templates", out, "", "application/json", "", &rc)) return false;
    json rows = json::array();
    for (const auto& t : out) {
      rows.push_back({{"name", t["ref"]["name"]},
                      {"version", t["ref"]["version"]},
                      {"output", t.value("output_kind", "")},
                      {"approval", t.value("approval_required", true)},
                      {"digest", t["ref"]["digest"].get<std::string>().substr(0, 12)}});
    }
    print(g, g.output == "json" ? out : rows);
    return true;
  }));

  std::string tname, tversion;
  auto* tget = tmpl->add_subcommand("get", "Describe a template version");
  tget->add_option("name", tname)->required();
  tget->add_option("version", tversion)->default_val("latest");
  tget->callback(run([&] {
    if (!call(g, "GET", "/v1/templates/" + url_escape(tname) + "/" + url_escape(tversion), out, "", "application/json",
              "", &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  auto* tdelete = tmpl->add_subcommand("delete", "Delete a template version");
  tdelete->add_option("name", tname)->required();
  tdelete->add_option("version", tversion)->required();
  tdelete->callback(run([&] {
    if (!call(g, "DELETE", "/v1/templates/" + url_escape(tname) + "/" + url_escape(tversion), out, "",
              "application/json", "", &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  // ---- model ----------------------------------------------------------------
  auto* model = app.add_subcommand("model", "Model instances and their lifecycle");
  model->require_subcommand(1);
  const std::vector<std::string> model_columns = {"model_id", "state", "serving_version", "last_version"};

  std::string template_ref, config_path, idem_key, model_id;
  auto* create = model->add_subcommand("create", "Instantiate a model from a template");
  create->add_option("--template", template_ref, "Template reference name@version");
  create->add_option("--config", config_path, "Model configuration (YAML or JSON)");
  create->add_option("--idempotency-key", idem_key, "Reject replays of this request");
  create->callback(run([&] {
    json cfg = config_path.empty() ? json::object() : parse_config_file(config_path);
    if (!template_ref.empty()) cfg["template"] = template_ref;
    if (!call(g, "POST", "/v1/models", out, cfg.dump(), "application/json", idem_key, &rc)) return false;
    if (g.output == "json") {
      print(g, out);
    } else {
      std::cout << out["model_id"].get<std::string>() << "\n";
    }
    return true;
  }));

  bool include_deleted = false;
  auto* mlist = model->add_subcommand("list", "List models");
  mlist->add_flag("--all", include_deleted, "Include deleted models");
  mlist->callback(run([&] {
    if (!call(g, "GET", std::string("/v1/models") + (include_deleted ? "?include_deleted=true" : ""), out, "",
              "application/json", "", &rc)) {
      return false;
    }
    print(g, out, model_columns);
    return true;
  }));

  auto simple_model = [&](const char* name, const char* help, const char* method, const char* suffix) {
    auto* sub = model->add_subcommand(name, help);
    sub->add_option("id", model_id, "Model id")->required();
    sub->callback(run([&, method, suffix] {
      if (!call(g, method, "/v1/models/" + url_escape(model_id) + suffix, out, "", "application/json", "", &rc)) {
        return false;
      }
      print(g, out);
      return true;
    }));
    return sub;
  };
  simple_model("get", "Show a model", "GET", "");
  simple_model("delete", "Delete a model", "DELETE", "");
  simple_model("approve", "Approve the pending version", "POST", "/approve");
  simple_model("reject", "Reject the pending version", "POST", "/reject");

  std::string reason = "manual";
  auto* train = model->add_subcommand("train", "Start a (re)training run");
  train->add_option("id", model_id, "Model id")->required();
  train->add_option("--reason", reason)->check(CLI::IsMember({"manual", "scheduled", "drift", "accuracy"}));
  train->callback(run([&] {
    if (!call(g, "POST", "/v1/models/" + url_escape(model_id) + "/train", out, json{{"reason", reason}}.dump(),
              "application/json", "", &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  int version = 0;
  auto* rollback = model->add_subcommand("rollback", "Serve an earlier version");
  rollback->add_option("id", model_id, "Model id")->required();
  rollback->add_option("version", version, "Version number")->required();
  rollback->callback(run([&] {
    if (!call(g, "POST", "/v1/models/" + url_escape(model_id) + "/rollback", out, json{{"version", version}}.dump(),
              "application/json", "", &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  std::optional<int> archive_version;
  auto* archive = model->add_subcommand("archive", "Archive a version, or the whole model");
  archive->add_option("id", model_id, "Model id")->required();
  archive->add_option("--version", archive_version, "Version to archive");
  archive->callback(run([&] {
    json body = json::object();
    if (archive_version) body["version"] = *archive_version;
    if (!call(g, "POST", "/v1/models/" + url_escape(model_id) + "/archive", out, body.dump(), "application/json", "",
              &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  // ---- serving and monitoring ------------------------------------------------
  std::string data, data_file;
  auto* infer = app.add_subcommand("infer", "Run inference (object or array of objects)");
  infer->add_option("id", model_id, "Model id")->required();
  auto* data_opt = infer->add_option("--data", data, "Request JSON");
  infer->add_option("--file", data_file, "File holding the request JSON")->excludes(data_opt);
  infer->callback(run([&] {
    const std::string body = data_file.empty() ? data : read_text(data_file);
    if (body.empty()) throw CLI::ValidationError("--data or --file is required");
    if (!call(g, "POST", "/v1/models/" + url_escape(model_id) + "/infer", out, body, "application/json", "", &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  std::string inference_id, truth;
  auto* feedback = app.add_subcommand("feedback", "Submit ground truth for an inference");
  feedback->add_option("id", model_id, "Model id")->required();
  feedback->add_option("--inference-id", inference_id)->required();
  feedback->add_option("--truth", truth, "Ground-truth label or decision")->required();
  feedback->callback(run([&] {
    json gt = truth;
    if (truth == "true" || truth == "false") gt = truth == "true";
    if (!call(g, "POST", "/v1/models/" + url_escape(model_id) + "/feedback", out,
              json{{"inference_id", inference_id}, {"ground_truth", gt}}.dump(), "application/json", "", &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  auto* metrics = app.add_subcommand("metrics", "Training metrics and rolling accuracy");
  metrics->add_option("id", model_id, "Model id")->required();
  metrics->callback(run([&] {
    if (!call(g, "GET", "/v1/models/" + url_escape(model_id) + "/metrics", out, "", "application/json", "", &rc)) {
      return false;
    }
    if (g.output == "json") {
      print(g, out);
    } else {
      json rows = json::array();
      for (const auto& v : out["versions"]) {
        json r = {{"version", v["version"]}, {"reason", v["reason"]}, {"archived", v["archived"]}};
        for (const auto& [k, m] : v["metrics"].items()) {
          if (k == "val_accuracy" || k == "val_score" || k == "holdout_rows") r[k] = m;
        }
        rows.push_back(r);
      }
      print_table(rows, {"version", "reason", "val_accuracy", "val_score", "holdout_rows", "archived"});
      std::cout << "rolling accuracy: " << scalar(out["accuracy"]["accuracy"]) << " ("
                << scalar(out["accuracy"]["labeled"]) << " labeled)\n";
    }
    return true;
  }));

  bool refresh = false;
  auto* drift = app.add_subcommand("drift", "Latest drift report");
  drift->add_option("id", model_id, "Model id")->required();
  drift->add_flag("--refresh", refresh, "Compute a fresh report");
  drift->callback(run([&] {
    if (!call(g, "GET", "/v1/models/" + url_escape(model_id) + "/drift" + (refresh ? "?refresh=true" : ""), out, "",
              "application/json", "", &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  auto* status = app.add_subcommand("status", "Lifecycle and endpoint status");
  status->add_option("id", model_id, "Model id")->required();
  status->callback(run([&] {
    if (!call(g, "GET", "/v1/models/" + url_escape(model_id) + "/status", out, "", "application/json", "", &rc)) {
      return false;
    }
    print(g, out);
    return true;
  }));

  std::uint64_t since = 0;
  bool follow = false;
  auto* events = app.add_subcommand("events", "Event journal");
  events->add_option("--since", since, "Only events after this sequence number");
  events->add_flag("--follow,-f", follow, "Stream new events until interrupted");
  events->callback(run([&] {
    if (!follow) {
      if (!call(g, "GET", "/v1/events?since=" + std::to_string(since), out, "", "application/json", "", &rc)) {
        return false;
      }
      json rows = json::array();
      for (const auto& e : out) {
        rows.push_back({{"seq", e["seq"]}, {"at", e["at"]}, {"kind", e["kind"]}, {"model_id", e["model_id"]}});
      }
      print(g, g.output == "json" ? out : rows, {"seq", "at", "kind", "model_id"});
      return true;
    }
    mf_client* client = nullptr;
    mf_status st = mf_client_new(g.server.c_str(), g.token.empty() ? nullptr : g.token.c_str(), &client);
    if (st == MF_OK) {
      st = mf_client_follow_events(
          client, since,
          [](const char* ev, void* user) {
            const auto* gl = static_cast<const Globals*>(user);
            if (gl->output == "json") {
              std::cout << ev << std::endl;
            } else {
              const json e = json::parse(ev);
              std::cout << e["seq"] << "  " << e["at"].get<std::string>() << "  " << e["kind"].get<std::string>()
                        << "  " << scalar(e["model_id"]) << std::endl;
            }
            return 0;
          },
          &g);
      mf_client_free(client);
    }
    if (st != MF_OK) {
      rc = report_error(st);
      return false;
    }
    return true;
  }));

  // ---- local utilities --------------------------------------------------------
  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the platform and its REST API in the foreground");
  serve->add_option("--config", serve_config, "modelforge.yaml (env MF_* overrides apply)");
  serve->callback(run([&] {
    mf_platform* platform = nullptr;
    mf_status st = mf_platform_open(serve_config.empty() ? nullptr : serve_config.c_str(), nullptr, &platform);
    if (st != MF_OK) {
      rc = report_error(st);
      return false;
    }
    int port = 0;
    st = mf_server_start(platform, &g_server, &port);
    if (st != MF_OK) {
      rc = report_error(st);
      mf_platform_close(platform);
      return false;
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "modelforge " << mf_version() << " listening on port " << port << "\n";
    mf_server_wait(g_server);
    mf_server_stop(g_server);
    mf_server_free(g_server);
    g_server = nullptr;
    mf_platform_close(platform);
    return true;
  }));

  auto* corpus = app.add_subcommand("corpus", "Synthetic work-order corpus");
  corpus->require_subcommand(1);
  std::uint64_t seed = 17;
  std::size_t rows = 500, codes = 40;
  double noise = 0.0;
  std::string corpus_out, sites;
  auto* generate = corpus->add_subcommand("generate", "Write a seeded corpus as CSV");
  generate->add_option("--seed", seed);
  generate->add_option("--rows", rows);
  generate->add_option("--codes", codes);
  generate->add_option("--noise", noise, "Approval label noise in [0, 1]");
  generate->add_option("--sites", sites, "Comma-separated site names");
  generate->add_option("--out", corpus_out, "Output file (default stdout)");
  generate->callback(run([&] {
    json opts = {{"seed", seed}, {"n_rows", rows}, {"n_codes", codes}, {"approval_noise", noise}};
    if (!sites.empty()) {
      json list = json::array();
      std::stringstream ss(sites);
      std::string s;
      while (std::getline(ss, s, ',')) list.push_back(s);
      opts["sites"] = list;
    }
    char* csv = nullptr;
    const mf_status st = mf_corpus_generate(opts.dump().c_str(), &csv);
    if (st != MF_OK) {
      rc = report_error(st);
      return false;
    }
    const std::string text = take(csv);
    if (corpus_out.empty()) {
      std::cout << text;
    } else {
      std::ofstream(corpus_out, std::ios::binary) << text;
    }
    return true;
  }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitApi;
  }
  return rc;
}
