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

#include "modelforge/api/config.h"

#include <cstdlib>

#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/common/yaml.h"

extern char** environ;

namespace modelforge::api {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  fail(ErrorCode::kValidation, "config", "configuration " + field + ": " + msg,
       {{{"field", field}, {"message", msg}}});
}

Duration duration_of(const json& v, const std::string& field) {
  if (v.is_number_integer()) return v.get<Duration>();
  if (v.is_string()) {
    if (auto d = parse_duration(v.get<std::string>())) return *d;
  }
  bad(field, "must be a duration such as 500ms, 30s, 5m or 1h");
}

std::int64_t int_of(const json& v, const std::string& field) {
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::int64_t>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const auto s = v.get<std::string>();
      const long long n = std::stoll(s, &used);
      if (used == s.size() && n >= 0) return n;
    } catch (const std::exception&) {
    }
  }
  bad(field, "must be a non-negative integer");
}

double number_of(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const auto s = v.get<std::string>();
      const double d = std::stod(s, &used);
      if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
  }
  bad(field, "must be a number");
}

void set_bind(ServerConfig& c, const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) bad("bind", "must be host:port");
  c.host = bind.substr(0, colon);
  c.port = static_cast<int>(int_of(json(bind.substr(colon + 1)), "bind"));
  if (c.port > 65535) bad("bind", "port out of range");
}

}  // namespace

json ServerConfig::to_json() const {
  return {{"bind", host + ":" + std::to_string(port)},
          {"data_dir", platform.data_dir.string()},
          {"auth", !token.empty()},
          {"ui_dir", ui_dir.string()},
          {"tick_interval_ms", tick_interval},
          {"capacity", {{"cpu_millis", platform.capacity.cpu_millis}, {"memory_mb", platform.capacity.memory_mb}}},
          {"idle_timeout_ms", platform.gateway.idle_timeout},
          {"max_concurrent_runs", platform.max_concurrent_runs},
          {"monitoring", platform.monitoring.to_json()}};
}

Environment process_environment() {
  Environment env;
  for (char** e = environ; e && *e; ++e) {
    std::string kv = *e;
    if (kv.rfind("MF_", 0) != 0) continue;
    const auto eq = kv.find('=');
    if (eq != std::string::npos) env[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return env;
}

ServerConfig config_from_json(const json& doc, const Environment& env) {
  ServerConfig c;
  if (!doc.is_null() && !doc.is_object()) bad("document", "must be a mapping");
  static const std::set<std::string> kKnown = {"data_dir", "bind", "token", "capacity", "idle_timeout",
                                               "drift", "max_concurrent_runs", "tick_interval", "ui_dir",
                                               "drift_check_interval", "run_timeout"};
  if (doc.is_object()) {
    for (const auto& [k, _] : doc.items()) {
      if (!kKnown.count(k)) bad(k, "unknown setting");
    }
    if (doc.contains("data_dir")) c.platform.data_dir = doc["data_dir"].get<std::string>();
    if (doc.contains("bind")) set_bind(c, doc["bind"].get<std::string>());
    if (doc.contains("token")) c.token = doc["token"].get<std::string>();
    if (doc.contains("capacity")) {
      const auto& cap = doc["capacity"];
      if (cap.contains("cpu_millis")) c.platform.capacity.cpu_millis = int_of(cap["cpu_millis"], "capacity.cpu_millis");
      if (cap.contains("memory_mb")) c.platform.capacity.memory_mb = int_of(cap["memory_mb"], "capacity.memory_mb");
    }
    if (doc.contains("idle_timeout")) c.platform.gateway.idle_timeout = duration_of(doc["idle_timeout"], "idle_timeout");
    if (doc.contains("drift")) {
      c.platform.monitoring = monitors::MonitorSettings::from_json(doc["drift"], c.platform.monitoring);
    }
    if (doc.contains("max_concurrent_runs")) {
      c.platform.max_concurrent_runs = static_cast<std::size_t>(int_of(doc["max_concurrent_runs"], "max_concurrent_runs"));
    }
    if (doc.contains("tick_interval")) c.tick_interval = duration_of(doc["tick_interval"], "tick_interval");
    if (doc.contains("drift_check_interval")) {
      c.platform.drift_check_interval = duration_of(doc["drift_check_interval"], "drift_check_interval");
    }
    if (doc.contains("run_timeout")) c.platform.run_limits.wall_clock = duration_of(doc["run_timeout"], "run_timeout");
    if (doc.contains("ui_dir")) c.ui_dir = doc["ui_dir"].get<std::string>();
  }

  auto has = [&](const char* k) { return env.count(k) > 0; };
  if (has("MF_DATA_DIR")) c.platform.data_dir = env.at("MF_DATA_DIR");
  if (has("MF_BIND")) set_bind(c, env.at("MF_BIND"));
  if (has("MF_TOKEN")) c.token = env.at("MF_TOKEN");
  if (has("MF_CAPACITY_CPU_MILLIS")) {
    c.platform.capacity.cpu_millis = int_of(json(env.at("MF_CAPACITY_CPU_MILLIS")), "MF_CAPACITY_CPU_MILLIS");
  }
  if (has("MF_CAPACITY_MEMORY_MB")) {
    c.platform.capacity.memory_mb = int_of(json(env.at("MF_CAPACITY_MEMORY_MB")), "MF_CAPACITY_MEMORY_MB");
  }
  if (has("MF_IDLE_TIMEOUT")) c.platform.gateway.idle_timeout = duration_of(json(env.at("MF_IDLE_TIMEOUT")), "MF_IDLE_TIMEOUT");
  if (has("MF_DRIFT_THRESHOLD")) {
    c.platform.monitoring.drift_threshold = number_of(json(env.at("MF_DRIFT_THRESHOLD")), "MF_DRIFT_THRESHOLD");
  }
  if (has("MF_DEGRADE_THRESHOLD")) {
    c.platform.monitoring.degrade_threshold = number_of(json(env.at("MF_DEGRADE_THRESHOLD")), "MF_DEGRADE_THRESHOLD");
  }
  if (has("MF_MIN_WINDOW")) {
    c.platform.monitoring.min_window = static_cast<std::size_t>(int_of(json(env.at("MF_MIN_WINDOW")), "MF_MIN_WINDOW"));
  }
  if (has("MF_MAX_CONCURRENT_RUNS")) {
    c.platform.max_concurrent_runs =
        static_cast<std::size_t>(int_of(json(env.at("MF_MAX_CONCURRENT_RUNS")), "MF_MAX_CONCURRENT_RUNS"));
  }
  if (has("MF_TICK_INTERVAL")) c.tick_interval = duration_of(json(env.at("MF_TICK_INTERVAL")), "MF_TICK_INTERVAL");
  if (has("MF_UI_DIR")) c.ui_dir = env.at("MF_UI_DIR");
  if (c.tick_interval <= 0) bad("tick_interval", "must be positive");
  return c;
}

ServerConfig load_config(const std::optional<std::filesystem::path>& path, const Environment& env) {
  json doc = nullptr;
  if (path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(*path, ec)) {
      fail(ErrorCode::kNotFound, "io", "configuration file not found: " + path->string());
    }
    doc = parse_yaml(read_file(*path), path->filename().string());
  }
  return config_from_json(doc, env);
}

}  // namespace modelforge::api
