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
#include <string>
#include <string_view>

namespace modelforge {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// observe either the old or the new content, never a partial write.
void write_file_atomic(const fs::path& path, std::string_view bytes);

void append_line(const fs::path& path, std::string_view line);

}  // namespace modelforge
