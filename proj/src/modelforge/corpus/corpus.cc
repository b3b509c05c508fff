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

#include "modelforge/corpus/corpus.h"

#include <cstdio>
#include <cstdlib>

#include "modelforge/common/csv.h"
#include "modelforge/common/error.h"
#include "modelforge/common/random.h"

namespace modelforge::corpus {
using nlohmann::json;

namespace {

struct Theme {
  const char* code;
  std::vector<const char*> words;
};

// Hand-named codes first; the rest get generated pseudo-words.
const std::vector<Theme>& themes() {
  static const std::vector<Theme> t = {
      {"PLUMB", {"water", "pipe", "leak", "drain", "faucet"}},
      {"ELEC", {"outlet", "breaker", "wiring", "socket", "spark"}},
      {"HVAC", {"heating", "cooling", "thermostat", "vent", "duct"}},
      {"DOOR", {"door", "hinge", "lock", "handle", "latch"}},
      {"ROOF", {"roof", "shingle", "gutter", "ceiling", "drip"}},
      {"LIGHT", {"lamp", "bulb", "fixture", "dim", "flicker"}},
      {"ELEV", {"elevator", "lift", "cabin", "shaft", "floorbutton"}},
      {"PEST", {"mouse", "insect", "ants", "droppings", "nest"}},
      {"GLASS", {"window", "pane", "crack", "glazing", "shatter"}},
      {"FIRE", {"alarm", "smoke", "sprinkler", "extinguisher", "detector"}},
      {"CLEAN", {"stain", "spill", "odor", "dust", "trash"}},
      {"PAINT", {"paint", "peeling", "wall", "graffiti", "chipped"}},
  };
  return t;
}

const char* const kFiller[] = {"reported", "near", "room", "floor", "tenant", "urgent", "please", "check",
                               "again", "since", "morning", "area", "unit", "office", "noticed", "issue"};
const char* const kPriorities[] = {"low", "medium", "high", "critical"};
const char* const kStatuses[] = {"open", "closed", "completed"};

constexpr std::size_t kWordsPerCode = 5;

// Pronounceable, collision-free words derived from the code index.
std::string pseudo_word(std::size_t code, std::size_t k) {
  static const char* const kOnset[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static const char* const kVowel[] = {"a", "e", "i", "o", "u"};
  std::size_t n = code * kWordsPerCode + k;
  std::string w = "q";  // no hand-named keyword starts with q
  for (int i = 0; i < 3; ++i) {
    w += kOnset[n % 14];
    n /= 14;
    w += kVowel[n % 5];
    n /= 5;
  }
  return w;
}

std::vector<std::string> keywords(std::size_t code) {
  std::vector<std::string> out;
  if (code < themes().size()) {
    for (const char* w : themes()[code].words) out.emplace_back(w);
  } else {
    for (std::size_t k = 0; k < kWordsPerCode; ++k) out.push_back(pseudo_word(code, k));
  }
  return out;
}

int priority_rank(const std::string& p) {
  for (int i = 0; i < 4; ++i) {
    if (p == kPriorities[i]) return i;
  }
  fail(ErrorCode::kValidation, "invalid-priority", "unknown priority '" + p + "'");
}

constexpr std::int64_t kRuleBudget = 3000;
constexpr std::int64_t kRankWeight = 800;
constexpr std::int64_t kMargin = 150;

std::int64_t rule_score(std::int64_t cost, int rank) { return kRuleBudget - cost - kRankWeight * rank; }

}  // namespace

std::vector<std::string> failure_codes(std::size_t n_codes) {
  std::vector<std::string> codes;
  for (std::size_t i = 0; i < n_codes; ++i) {
    if (i < themes().size()) {
      codes.emplace_back(themes()[i].code);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "FC%03zu", i);
      codes.emplace_back(buf);
    }
  }
  return codes;
}

bool approval_rule(std::int64_t cost, const std::string& priority) {
  return rule_score(cost, priority_rank(priority)) > 0;
}

std::vector<WorkOrderRecord> generate_corpus(const CorpusOptions& o) {
  json issues = json::array();
  if (o.n_codes < 2 || o.n_codes > 200) issues.push_back({{"field", "n_codes"}, {"message", "must be within [2, 200]"}});
  if (o.n_rows < o.n_codes) issues.push_back({{"field", "n_rows"}, {"message", "must be at least n_codes"}});
  if (!(o.approval_noise >= 0.0 && o.approval_noise <= 1.0)) {
    issues.push_back({{"field", "approval_noise"}, {"message", "must be within [0, 1]"}});
  }
  if (o.sites.empty()) issues.push_back({{"field", "sites"}, {"message", "must not be empty"}});
  if (!issues.empty()) fail(ErrorCode::kValidation, "invalid-corpus-options", "invalid corpus options", issues);

  Rng rng(o.seed);
  const auto codes = failure_codes(o.n_codes);
  // Noise as parts per million keeps the flip decision integer-only.
  const auto noise_ppm = static_cast<std::uint64_t>(o.approval_noise * 1e6 + 0.5);

  std::vector<WorkOrderRecord> out;
  out.reserve(o.n_rows);
  for (std::size_t i = 0; i < o.n_rows; ++i) {
    WorkOrderRecord r;
    char id[24];
    std::snprintf(id, sizeof id, "WO-%06zu", i + 1);
    r.id = id;
    // Round-robin over the first n_codes rows guarantees every code appears.
    const std::size_t code = i < o.n_codes ? i : rng.below(o.n_codes);
    r.failure_code = codes[code];

    const auto words = keywords(code);
    std::vector<std::string> tokens;
    const std::size_t n_key = 2 + rng.below(2);
    for (std::size_t k = 0; k < n_key; ++k) tokens.push_back(words[rng.below(words.size())]);
    const std::size_t n_fill = 1 + rng.below(3);
    for (std::size_t k = 0; k < n_fill; ++k) tokens.emplace_back(kFiller[rng.below(std::size(kFiller))]);
    rng.shuffle(tokens);
    for (const auto& t : tokens) r.description += (r.description.empty() ? "" : " ") + t;

    r.site = o.sites[rng.below(o.sites.size())];
    r.opened_at = o.base_time - static_cast<Timestamp>(rng.below(90 * 24 * 60)) * kMinute;
    r.status = kStatuses[rng.below(3)];
    if (r.status != "open") r.closed_at = r.opened_at + static_cast<Timestamp>(rng.below(10 * 24 * 60)) * kMinute;

    const int rank = static_cast<int>(rng.below(4));
    r.priority = kPriorities[rank];
    // Resample costs that fall inside the margin around the decision boundary.
    do {
      r.cost = 50 + static_cast<std::int64_t>(rng.below(4951));
    } while (std::llabs(rule_score(r.cost, rank)) < kMargin);
    bool approved = rule_score(r.cost, rank) > 0;
    if (noise_ppm > 0 && rng.below(1000000) < noise_ppm) approved = !approved;
    r.approved = approved;
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_csv(const std::vector<WorkOrderRecord>& records) {
  std::string out = std::string(kCorpusHeader) + "\n";
  for (const auto& r : records) {
    out += csv::format_row({r.id, r.description, r.site, format_rfc3339(r.opened_at),
                            r.closed_at ? format_rfc3339(*r.closed_at) : "", r.status, std::to_string(r.cost),
                            r.priority, r.failure_code.value_or(""),
                            r.approved ? (*r.approved ? "true" : "false") : ""});
    out += "\n";
  }
  return out;
}

}  // namespace modelforge::corpus
