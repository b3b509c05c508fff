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

#include "modelforge/api/server.h"

#include <algorithm>
#include <chrono>

#include "httplib.h"
#include "modelforge/common/error.h"

namespace modelforge::api {
namespace {

Request to_request(const httplib::Request& in) {
  Request r;
  r.method = in.method;
  r.path = in.path;
  for (const auto& [k, v] : in.params) r.query[k] = v;
  for (const auto& [k, v] : in.headers) {
    std::string name = k;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    r.headers[name] = v;
  }
  r.body = in.body;
  return r;
}

void write_response(const Response& from, httplib::Response& to) {
  to.status = from.status;
  for (const auto& [k, v] : from.headers) to.set_header(k, v);
  to.set_content(from.body, from.content_type);
}

std::string sse_frame(const controller::Event& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + std::string(controller::to_string(e.kind)) +
         "\ndata: " + e.to_json().dump() + "\n\n";
}

}  // namespace

const char* const kFallbackUi = R"HTML(<!doctype html>
<html><head><meta charset="utf-8"><title>modelforge</title>
<style>body{font-family:sans-serif;margin:2em}td,th{padding:.2em .8em;text-align:left}</style></head>
<body><h1>modelforge</h1>
<p>The dashboard bundle is not installed; this page lists models from <code>/v1/models</code>.</p>
<label>Token <input id="t" type="password"></label> <button onclick="load()">Load</button>
<table id="m"><tr><th>model</th><th>state</th><th>serving</th></tr></table>
<script>
function load(){const t=document.getElementById('t').value;sessionStorage.setItem('mf_token',t);
fetch('/v1/models',{headers:t?{Authorization:'Bearer '+t}:{}}).then(r=>r.json()).then(ms=>{
const tb=document.getElementById('m');tb.querySelectorAll('tr.r').forEach(x=>x.remove());
(Array.isArray(ms)?ms:[]).forEach(m=>{const tr=document.createElement('tr');tr.className='r';
[m.model_id,m.state,m.serving_version??''].forEach(v=>{const td=document.createElement('td');td.textContent=v;tr.appendChild(td);});
tb.appendChild(tr);});});}
document.getElementById('t').value=sessionStorage.getItem('mf_token')||'';
</script></body></html>
)HTML";

Server::Server(controller::Controller& platform, ServerConfig config)
    : platform_(platform), config_(std::move(config)), router_(platform, config_.token),
      http_(std::make_unique<httplib::Server>()) {
  install();
}

Server::~Server() { stop(); }

void Server::install() {
  auto dispatch = [this](const httplib::Request& in, httplib::Response& out) {
    write_response(router_.handle(to_request(in)), out);
  };

  http_->Get("/v1/events", [this, dispatch](const httplib::Request& in, httplib::Response& out) {
    const auto accept = in.get_header_value("Accept");
    if (accept.find("text/event-stream") == std::string::npos) return dispatch(in, out);
    const auto req = to_request(in);
    if (!router_.authorized(req)) return write_response(router_.handle(req), out);
    std::uint64_t since = 0;
    try {
      if (in.has_param("since")) since = std::stoull(in.get_param_value("since"));
      if (in.has_header("Last-Event-ID")) since = std::stoull(in.get_header_value("Last-Event-ID"));
    } catch (const std::exception&) {
      return write_response(Router::error_response(Error(ErrorCode::kValidation, "invalid-query",
                                                         "since must be a non-negative integer")),
                            out);
    }
    auto cursor = std::make_shared<std::uint64_t>(since);
    out.set_header("Cache-Control", "no-cache");
    out.set_chunked_content_provider("text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) {
      if (stopping_) return false;
      auto batch = platform_.events_since(*cursor, 256);
      if (batch.empty()) {
        platform_.wait_for_events(*cursor, std::chrono::milliseconds(1000));
        batch = platform_.events_since(*cursor, 256);
      }
      if (batch.empty()) {
        static const std::string kKeepAlive = ": keep-alive\n\n";
        return sink.write(kKeepAlive.data(), kKeepAlive.size());
      }
      for (const auto& e : batch) {
        const auto frame = sse_frame(e);
        if (!sink.write(frame.data(), frame.size())) return false;
        *cursor = e.seq;
      }
      return !stopping_.load();
    });
  });

  const std::string any = R"(/(v1|store)/.*)";
  http_->Get(any, dispatch);
  http_->Post(any, dispatch);
  http_->Delete(any, dispatch);
  http_->Put(any, dispatch);

  std::error_code ec;
  const bool bundle = !config_.ui_dir.empty() && std::filesystem::is_regular_file(config_.ui_dir / "index.html", ec);
  if (bundle) {
    http_->set_mount_point("/ui", config_.ui_dir.string());
    http_->Get("/ui", [](const httplib::Request&, httplib::Response& out) { out.set_redirect("/ui/"); });
  } else {
    auto page = [](const httplib::Request&, httplib::Response& out) { out.set_content(kFallbackUi, "text/html"); };
    http_->Get("/ui", page);
    http_->Get("/ui/", page);
  }
}

int Server::start() {
  if (config_.port == 0) {
    port_ = http_->bind_to_any_port(config_.host);
  } else {
    port_ = http_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) {
    fail(ErrorCode::kInternal, "bind",
         "cannot bind " + config_.host + ":" + std::to_string(config_.port),
         {{{"host", config_.host}, {"port", config_.port}}});
  }
  listen_thread_ = std::thread([this] { http_->listen_after_bind(); });
  tick_thread_ = std::thread([this] { tick_loop(); });
  http_->wait_until_ready();
  return port_;
}

void Server::tick_loop() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    cv_.wait_for(lock, std::chrono::milliseconds(config_.tick_interval), [this] { return stopping_.load(); });
    if (stopping_) break;
    lock.unlock();
    try {
      platform_.tick();
    } catch (const std::exception&) {
    }
    lock.lock();
  }
}

void Server::wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return stopping_.load(); });
}

void Server::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_.exchange(true)) return;
  }
  cv_.notify_all();
  http_->stop();
  if (listen_thread_.joinable()) listen_thread_.join();
  if (tick_thread_.joinable()) tick_thread_.join();
}

}  // namespace modelforge::api
