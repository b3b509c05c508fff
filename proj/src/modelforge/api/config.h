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

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "modelforge/controller/controller.h"

namespace modelforge::api {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string token;  // empty disables authentication
  std::filesystem::path ui_dir;
  Duration tick_interval = kSecond;
  controller::PlatformOptions platform;

  nlohmann::json to_json() const;
};

using Environment = std::map<std::string, std::string>;

// The process environment restricted to MF_* variables.
Environment process_environment();

// Reads modelforge.yaml (when `path` is given) and applies MF_* overrides:
// MF_DATA_DIR, MF_BIND (host:port), MF_TOKEN, MF_CAPACITY_CPU_MILLIS,
// MF_CAPACITY_MEMORY_MB, MF_IDLE_TIMEOUT, MF_DRIFT_THRESHOLD,
// MF_DEGRADE_THRESHOLD, MF_MIN_WINDOW, MF_MAX_CONCURRENT_RUNS,
// MF_TICK_INTERVAL, MF_UI_DIR.
ServerConfig load_config(const std::optional<std::filesystem::path>& path, const Environment& env);
ServerConfig config_from_json(const nlohmann::json& doc, const Environment& env);

}  // namespace modelforge::api
