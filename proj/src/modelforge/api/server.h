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
#include <memory>
#include <mutex>
#include <thread>

#include "modelforge/api/config.h"
#include "modelforge/api/router.h"

namespace httplib {
class Server;
}

namespace modelforge::api {

// HTTP transport for the Router plus the SSE event stream, the /ui mount and
// a background ticker that drives schedules, idle unloading and drift checks.
class Server {
 public:
  Server(controller::Controller& platform, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port. Throws Error(kInternal, "bind") on failure.
  int start();
  // Blocks until stop() is called from elsewhere.
  void wait();
  void stop();

  int port() const { return port_; }
  Router& router() { return router_; }

 private:
  void install();
  void tick_loop();

  controller::Controller& platform_;
  ServerConfig config_;
  Router router_;
  std::unique_ptr<httplib::Server> http_;
  std::thread listen_thread_;
  std::thread tick_thread_;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::condition_variable cv_;
  int port_ = 0;
};

// Minimal built-in page served at /ui when no dashboard bundle is installed.
extern const char* const kFallbackUi;

}  // namespace modelforge::api
