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

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace modelforge {

struct SemVer {
  unsigned long long major = 0;
  unsigned long long minor = 0;
  unsigned long long patch = 0;
  std::vector<std::string> prerelease;
  std::string build;

  static std::optional<SemVer> parse(std::string_view text);
  std::string str() const;
};

// Precedence per semver 2.0.0; build metadata is ignored and a pre-release
// sorts below the corresponding release.
std::strong_ordering compare(const SemVer& a, const SemVer& b);

}  // namespace modelforge
