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

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace modelforge {

// Error codes surfaced at the API boundary. Every failure raised anywhere in
// the platform carries exactly one of these plus a finer-grained `kind`.
enum class ErrorCode {
  kValidation,
  kNotFound,
  kConflict,
  kStateConflict,
  kIntegrity,
  kCapacity,
  kInternal,
};

std::string_view code_name(ErrorCode code);
int http_status(ErrorCode code);
ErrorCode code_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string kind, const std::string& message,
        nlohmann::json detail = nlohmann::json::array());

  ErrorCode code() const { return code_; }
  const std::string& kind() const { return kind_; }
  const nlohmann::json& detail() const { return detail_; }

  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  std::string kind_;
  nlohmann::json detail_;
};

[[noreturn]] void fail(ErrorCode code, std::string kind, const std::string& message,
                       nlohmann::json detail = nlohmann::json::array());

}  // namespace modelforge
