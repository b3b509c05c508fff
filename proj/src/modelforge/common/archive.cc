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

#include "modelforge/common/archive.h"

#include <zlib.h>

#include <algorithm>
#include <cstring>

#include "modelforge/common/error.h"

namespace modelforge {
namespace {

constexpr std::size_t kBlock = 512;

void write_octal(char* field, std::size_t width, unsigned long long value) {
  // width includes the trailing NUL
  for (std::size_t i = width - 1; i-- > 0;) {
    field[i] = static_cast<char>('0' + (value & 7));
    value >>= 3;
  }
  field[width - 1] = '\0';
}

unsigned long long read_octal(const char* field, std::size_t width) {
  unsigned long long v = 0;
  std::size_t i = 0;
  while (i < width && field[i] == ' ') ++i;
  for (; i < width && field[i] >= '0' && field[i] <= '7'; ++i) v = v * 8 + (field[i] - '0');
  return v;
}

unsigned header_checksum(const char* block) {
  unsigned sum = 0;
  for (std::size_t i = 0; i < kBlock; ++i) {
    sum += (i >= 148 && i < 156) ? static_cast<unsigned>(' ') : static_cast<unsigned char>(block[i]);
  }
  return sum;
}

std::string field_string(const char* field, std::size_t width) {
  return std::string(field, strnlen(field, width));
}

}  // namespace

std::string gzip_compress(std::string_view bytes) {
  z_stream zs{};
  if (deflateInit2(&zs, 9, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    fail(ErrorCode::kInternal, "gzip", "deflateInit2 failed");
  }
  std::string out;
  out.resize(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 32);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) fail(ErrorCode::kInternal, "gzip", "deflate did not finish");
  return out;
}

std::string gzip_decompress(std::string_view bytes) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) fail(ErrorCode::kInternal, "gzip", "inflateInit2 failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::string out;
  char buf[1 << 15];
  int rc;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      fail(ErrorCode::kIntegrity, "gzip", "corrupt gzip stream");
    }
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      fail(ErrorCode::kIntegrity, "gzip", "truncated gzip stream");
    }
  } while (rc != Z_STREAM_END);
  const bool trailing = zs.avail_in != 0;
  inflateEnd(&zs);
  if (trailing) fail(ErrorCode::kIntegrity, "gzip", "trailing bytes after gzip stream");
  return out;
}

bool is_safe_relative_path(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.find('\\') != std::string_view::npos) return false;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    auto part = path.substr(start, end - start);
    if (part.empty() || part == "." || part == "..") return false;
    start = end + 1;
  }
  return true;
}

std::string tar_write(std::vector<TarEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const TarEntry& a, const TarEntry& b) { return a.path < b.path; });
  std::string out;
  for (const auto& e : entries) {
    if (!is_safe_relative_path(e.path)) fail(ErrorCode::kValidation, "security", "unsafe path " + e.path);
    char header[kBlock] = {};
    std::string name = e.path, prefix;
    if (name.size() > 100) {
      auto cut = name.rfind('/', 155);
      while (cut != std::string::npos && name.size() - cut - 1 > 100) cut = std::string::npos;
      if (cut == std::string::npos || cut == 0) {
        fail(ErrorCode::kValidation, "tar", "path too long for ustar: " + e.path);
      }
      prefix = name.substr(0, cut);
      name = name.substr(cut + 1);
    }
    std::memcpy(header, name.data(), name.size());
    write_octal(header + 100, 8, 0644);
    write_octal(header + 108, 8, 0);
    write_octal(header + 116, 8, 0);
    write_octal(header + 124, 12, e.data.size());
    write_octal(header + 136, 12, 0);
    header[156] = '0';
    std::memcpy(header + 257, "ustar", 6);
    std::memcpy(header + 263, "00", 2);
    write_octal(header + 329, 8, 0);
    write_octal(header + 337, 8, 0);
    std::memcpy(header + 345, prefix.data(), prefix.size());
    write_octal(header + 148, 7, header_checksum(header));
    header[155] = ' ';
    out.append(header, kBlock);
    out += e.data;
    out.append((kBlock - e.data.size() % kBlock) % kBlock, '\0');
  }
  out.append(2 * kBlock, '\0');
  return out;
}

std::vector<TarEntry> tar_read(std::string_view tar) {
  std::vector<TarEntry> entries;
  std::size_t pos = 0;
  while (true) {
    if (pos + kBlock > tar.size()) fail(ErrorCode::kIntegrity, "tar", "truncated tar stream");
    const char* h = tar.data() + pos;
    if (std::all_of(h, h + kBlock, [](char c) { return c == '\0'; })) break;
    if (read_octal(h + 148, 8) != header_checksum(h)) {
      fail(ErrorCode::kIntegrity, "tar", "bad header checksum at offset " + std::to_string(pos));
    }
    std::string path = field_string(h, 100);
    const std::string prefix = field_string(h + 345, 155);
    if (!prefix.empty()) path = prefix + "/" + path;
    const char type = h[156];
    const auto size = read_octal(h + 124, 12);
    pos += kBlock;
    if (pos + size > tar.size()) fail(ErrorCode::kIntegrity, "tar", "truncated entry " + path);
    std::string clean = path;
    if (type == '5') {
      while (!clean.empty() && clean.back() == '/') clean.pop_back();
    }
    if (!is_safe_relative_path(clean)) {
      fail(ErrorCode::kValidation, "security", "tar entry escapes destination: " + path,
           {{{"entry", path}}});
    }
    if (type == '0' || type == '\0') {
      entries.push_back({clean, std::string(tar.substr(pos, size))});
    } else if (type != '5') {
      fail(ErrorCode::kValidation, "security",
           std::string("unsupported tar entry type '") + type + "' for " + path, {{{"entry", path}}});
    }
    pos += (size + kBlock - 1) / kBlock * kBlock;
  }
  return entries;
}

}  // namespace modelforge
