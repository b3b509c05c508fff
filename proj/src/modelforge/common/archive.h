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

#include <string>
#include <string_view>
#include <vector>

namespace modelforge {

std::string gzip_compress(std::string_view bytes);
// Throws Error(kIntegrity, "gzip") on a malformed stream or CRC mismatch.
std::string gzip_decompress(std::string_view bytes);

struct TarEntry {
  std::string path;
  std::string data;
};

// Canonical ustar stream: entries sorted by path, mode 0644, zero uid/gid,
// zero mtime, empty owner names, regular files only.
std::string tar_write(std::vector<TarEntry> entries);

// Reads regular-file entries. Absolute paths, `..` components and link
// entries are rejected with Error(kValidation, "security").
std::vector<TarEntry> tar_read(std::string_view tar);

// True when `path` is relative, non-empty and has no `.`/`..` components.
bool is_safe_relative_path(std::string_view path);

}  // namespace modelforge
