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

#ifndef MODELFORGE_MODELFORGE_H_
#define MODELFORGE_MODELFORGE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MF_API __declspec(dllexport)
#else
#define MF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mf_status {
  MF_OK = 0,
  MF_ERR_VALIDATION = 1,
  MF_ERR_NOT_FOUND = 2,
  MF_ERR_CONFLICT = 3,
  MF_ERR_STATE_CONFLICT = 4,
  MF_ERR_INTEGRITY = 5,
  MF_ERR_CAPACITY = 6,
  MF_ERR_INTERNAL = 7,
  MF_ERR_INVALID_ARGUMENT = 8,  // NULL handle or pointer
  MF_ERR_UNREACHABLE = 9,       // client could not reach the server
} mf_status;

typedef struct mf_platform mf_platform;
typedef struct mf_server mf_server;
typedef struct mf_client mf_client;

MF_API const char* mf_version(void);
MF_API const char* mf_status_name(mf_status status);

// JSON {"code","kind","message","detail"} for the last failure on the
// calling thread; "" after a success. Valid until the next call.
MF_API const char* mf_last_error(void);

// Frees strings returned through char** out-parameters.
MF_API void mf_free(char* s);

// ---- templates (local, no server) ------------------------------------------
// *report_json receives the validation report; MF_OK is returned even when
// the report says the project is invalid.
MF_API mf_status mf_template_validate(const char* project_dir, char** report_json);
// Writes the .tmpl.tgz and returns {"name","version","digest","path"}.
MF_API mf_status mf_template_package(const char* project_dir, const char* out_path, char** info_json);
MF_API mf_status mf_template_scaffold(const char* project_dir, const char* name);

// Converts a YAML document (the subset used for templates and configs) to
// JSON text.
MF_API mf_status mf_yaml_to_json(const char* yaml, char** json_text);

// ---- synthetic corpus -------------------------------------------------------
// options_json: {"seed","n_rows","n_codes","approval_noise","base_time"
// (RFC 3339),"sites":[...]}; any key may be omitted. *csv receives the corpus.
MF_API mf_status mf_corpus_generate(const char* options_json, char** csv);

// ---- in-process platform ----------------------------------------------------
// config_path may be NULL; MF_* environment variables apply either way.
// overrides_json (nullable) is merged over the file with the same keys as
// modelforge.yaml.
MF_API mf_status mf_platform_open(const char* config_path, const char* overrides_json, mf_platform** out);
MF_API void mf_platform_close(mf_platform* platform);
// Dispatches one REST call without a socket. headers_json is a nullable
// object of header names to values.
MF_API mf_status mf_platform_request(mf_platform* platform, const char* method, const char* path,
                                     const char* headers_json, const char* body, size_t body_len,
                                     int* http_status, char** response, size_t* response_len);
MF_API mf_status mf_platform_tick(mf_platform* platform);
MF_API mf_status mf_platform_wait_idle(mf_platform* platform);

// ---- HTTP server -------------------------------------------------------------
MF_API mf_status mf_server_start(mf_platform* platform, mf_server** out, int* bound_port);
// Blocks until mf_server_stop is called from another thread or a signal
// handler requests shutdown via mf_server_stop.
MF_API void mf_server_wait(mf_server* server);
MF_API void mf_server_stop(mf_server* server);
MF_API void mf_server_free(mf_server* server);

// ---- HTTP client -------------------------------------------------------------
// base_url like "http://127.0.0.1:8080"; token may be NULL.
MF_API mf_status mf_client_new(const char* base_url, const char* token, mf_client** out);
MF_API void mf_client_free(mf_client* client);
// Returns MF_OK whenever a response arrived (inspect *http_status) and
// MF_ERR_UNREACHABLE when the connection failed.
MF_API mf_status mf_client_request(mf_client* client, const char* method, const char* path, const char* content_type,
                                   const char* body, size_t body_len, const char* idempotency_key, int* http_status,
                                   char** response, size_t* response_len);
// Streams events with seq > since; the callback receives each event as a
// JSON string and returns nonzero to stop.
typedef int (*mf_event_callback)(const char* event_json, void* user);
MF_API mf_status mf_client_follow_events(mf_client* client, uint64_t since, mf_event_callback callback, void* user);

#ifdef __cplusplus
}
#endif

#endif  // MODELFORGE_MODELFORGE_H_
