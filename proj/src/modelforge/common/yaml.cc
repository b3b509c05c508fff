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

#include "modelforge/common/yaml.h"

#include <yaml-cpp/eventhandler.h>
#include <yaml-cpp/exceptions.h>
#include <yaml-cpp/parser.h>

#include <charconv>
#include <regex>
#include <sstream>
#include <vector>

#include "modelforge/common/error.h"

namespace modelforge {
namespace {

using nlohmann::json;

[[noreturn]] void yaml_error(const std::string& source, int line, const std::string& message) {
  fail(ErrorCode::kValidation, "yaml-parse", source + ":" + std::to_string(line) + ": " + message,
       {{{"file", source}, {"line", line}}});
}

json resolve_plain(const std::string& s) {
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  static const std::regex kInt(R"([-+]?[0-9]+)");
  static const std::regex kFloat(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
  if (std::regex_match(s, kInt)) {
    std::int64_t v = 0;
    const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  }
  if (std::regex_match(s, kFloat)) {
    double v = 0;
    const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  }
  return s;
}

class JsonBuilder final : public YAML::EventHandler {
 public:
  explicit JsonBuilder(std::string source) : source_(std::move(source)) {}

  json take() { return std::move(root_); }
  bool done() const { return done_; }

  void OnDocumentStart(const YAML::Mark&) override {}
  void OnDocumentEnd() override { done_ = true; }

  void OnNull(const YAML::Mark& mark, YAML::anchor_t anchor) override {
    check_anchor(mark, anchor);
    add(mark, nullptr);
  }
  void OnAlias(const YAML::Mark& mark, YAML::anchor_t) override {
    yaml_error(source_, mark.line + 1, "aliases are not supported");
  }
  void OnScalar(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                const std::string& value) override {
    check_anchor(mark, anchor);
    check_tag(mark, tag);
    if (!stack_.empty() && stack_.back().value.is_object() && !stack_.back().key) {
      stack_.back().key = value;
      return;
    }
    add(mark, tag == "!" ? json(value) : resolve_plain(value));
  }
  void OnSequenceStart(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                       YAML::EmitterStyle::value) override {
    check_anchor(mark, anchor);
    check_tag(mark, tag);
    require_value_position(mark);
    stack_.push_back({json::array(), std::nullopt, mark.line});
  }
  void OnSequenceEnd() override { close(); }
  void OnMapStart(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                  YAML::EmitterStyle::value) override {
    check_anchor(mark, anchor);
    check_tag(mark, tag);
    require_value_position(mark);
    stack_.push_back({json::object(), std::nullopt, mark.line});
  }
  void OnMapEnd() override { close(); }
  void OnAnchor(const YAML::Mark& mark, const std::string&) override {
    yaml_error(source_, mark.line + 1, "anchors are not supported");
  }

 private:
  struct Frame {
    json value;
    std::optional<std::string> key;
    int line;
  };

  void check_anchor(const YAML::Mark& mark, YAML::anchor_t anchor) {
    if (anchor != YAML::NullAnchor) yaml_error(source_, mark.line + 1, "anchors are not supported");
  }
  void check_tag(const YAML::Mark& mark, const std::string& tag) {
    if (!tag.empty() && tag != "?" && tag != "!") {
      yaml_error(source_, mark.line + 1, "custom tags are not supported: " + tag);
    }
  }
  void require_value_position(const YAML::Mark& mark) {
    if (!stack_.empty() && stack_.back().value.is_object() && !stack_.back().key) {
      yaml_error(source_, mark.line + 1, "mapping keys must be scalars");
    }
  }
  void add(const YAML::Mark& mark, json v) { add(mark.line, std::move(v)); }
  void add(int line, json v) {
    if (stack_.empty()) {
      root_ = std::move(v);
      return;
    }
    auto& top = stack_.back();
    if (top.value.is_array()) {
      top.value.push_back(std::move(v));
    } else {
      if (!top.key) {
        if (!v.is_null()) yaml_error(source_, line + 1, "mapping keys must be scalars");
        top.key = "";
        return;
      }
      if (top.value.contains(*top.key)) {
        yaml_error(source_, line + 1, "duplicate key '" + *top.key + "'");
      }
      top.value[*top.key] = std::move(v);
      top.key.reset();
    }
  }
  void close() {
    Frame f = std::move(stack_.back());
    stack_.pop_back();
    add(f.line, std::move(f.value));
  }

  std::string source_;
  std::vector<Frame> stack_;
  json root_;
  bool done_ = false;
};

void emit(std::ostringstream& out, const json& v, int indent, bool inline_start);

std::string scalar(const json& v) {
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    // Quote anything a plain scalar would resolve differently or that YAML
    // would misparse.
    if (resolve_plain(s) != json(s) || s.find_first_of(":#{}[],&*!|>'\"%@`\n") != std::string::npos ||
        s.front() == ' ' || s.back() == ' ' || s.front() == '-' || s.front() == '?') {
      return json(s).dump();
    }
    return s;
  }
  return v.dump();
}

void emit(std::ostringstream& out, const json& v, int indent, bool) {
  const std::string pad(indent, ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out << "{}\n";
      return;
    }
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) out << pad;
      first = false;
      out << scalar(json(it.key())) << ":";
      if ((it->is_object() || it->is_array()) && !it->empty()) {
        out << "\n" << std::string(indent + 2, ' ');
        emit(out, *it, indent + 2, true);
      } else {
        out << " ";
        emit(out, *it, indent + 2, true);
      }
    }
  } else if (v.is_array()) {
    if (v.empty()) {
      out << "[]\n";
      return;
    }
    bool first = true;
    for (const auto& item : v) {
      if (!first) out << pad;
      first = false;
      out << "- ";
      emit(out, item, indent + 2, true);
    }
  } else {
    out << scalar(v) << "\n";
  }
}

}  // namespace

json parse_yaml(std::string_view text, const std::string& source_name) {
  std::istringstream in{std::string(text)};
  JsonBuilder builder(source_name);
  try {
    YAML::Parser parser(in);
    if (!parser.HandleNextDocument(builder)) return nullptr;
    JsonBuilder extra(source_name);
    if (parser.HandleNextDocument(extra)) {
      yaml_error(source_name, 0, "multiple documents are not supported");
    }
  } catch (const YAML::Exception& e) {
    yaml_error(source_name, e.mark.line + 1, e.msg);
  }
  return builder.take();
}

std::string to_yaml(const json& value) {
  std::ostringstream out;
  emit(out, value, 0, true);
  return out.str();
}

}  // namespace modelforge
