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

#include "modelforge/common/error.h"

namespace modelforge {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kStateConflict: return "state-conflict";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kCapacity: return "capacity";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kStateConflict: return 409;
    case ErrorCode::kCapacity: return 422;
    case ErrorCode::kIntegrity:
    case ErrorCode::kInternal: return 500;
  }
  return 500;
}

ErrorCode code_from_name(std::string_view name) {
  for (auto c : {ErrorCode::kValidation, ErrorCode::kNotFound, ErrorCode::kConflict,
                 ErrorCode::kStateConflict, ErrorCode::kIntegrity, ErrorCode::kCapacity}) {
    if (code_name(c) == name) return c;
  }
  return ErrorCode::kInternal;
}

Error::Error(ErrorCode code, std::string kind, const std::string& message, nlohmann::json detail)
    : std::runtime_error(message), code_(code), kind_(std::move(kind)), detail_(std::move(detail)) {}

nlohmann::json Error::to_json() const {
  return {{"code", code_name(code_)}, {"kind", kind_}, {"message", what()}, {"detail", detail_}};
}

void fail(ErrorCode code, std::string kind, const std::string& message, nlohmann::json detail) {
  throw Error(code, std::move(kind), message, std::move(detail));
}

}  // namespace modelforge
