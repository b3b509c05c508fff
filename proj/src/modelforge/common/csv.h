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

namespace modelforge::csv {

using Row = std::vector<std::string>;

struct ParseError {
  std::size_t line = 0;
  std::string message;
};

// RFC 4180 reader. Accepts CRLF or LF record separators. Throws
// Error(kValidation, "csv-parse") with the offending line.
std::vector<Row> parse(std::string_view text);

// Quotes a field only when it contains a separator, quote, CR or LF.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace modelforge::csv
