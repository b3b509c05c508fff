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

#include <map>
#include <set>

#include "doctest.h"
#include "modelforge/common/csv.h"
#include "modelforge/common/error.h"
#include "modelforge/corpus/corpus.h"
#include "modelforge/models/tokenize.h"

using namespace modelforge;
using namespace modelforge::corpus;

TEST_CASE("same seed, same corpus") {
  CHECK(to_csv(generate_corpus({})) == to_csv(generate_corpus({})));
  CHECK(to_csv(generate_corpus({.seed = 1})) != to_csv(generate_corpus({.seed = 2})));
}

TEST_CASE("shape of the default corpus") {
  const auto rows = generate_corpus({});
  REQUIRE(rows.size() == 500);
  const auto codes = failure_codes(40);
  CHECK(codes.size() == 40);
  CHECK(std::set<std::string>(codes.begin(), codes.end()).size() == 40);
  std::set<std::string> seen_codes, seen_sites, ids;
  for (const auto& r : rows) {
    seen_codes.insert(*r.failure_code);
    seen_sites.insert(r.site);
    ids.insert(r.id);
    CHECK(r.opened_at <= CorpusOptions().base_time);
    CHECK(r.cost >= 50);
    CHECK(r.cost <= 5000);
    CHECK(r.closed_at.has_value() == (r.status != "open"));
    if (r.closed_at) CHECK(*r.closed_at >= r.opened_at);
    REQUIRE(r.approved);
    CHECK(*r.approved == approval_rule(r.cost, r.priority));
  }
  CHECK(seen_codes.size() == 40);
  CHECK(seen_sites == std::set<std::string>{"A", "B", "C", "D"});
  CHECK(ids.size() == rows.size());
}

TEST_CASE("keyword vocabularies are disjoint across codes") {
  // A token is a keyword when it appears under only one code; every
  // description carries at least two of them.
  const auto rows = generate_corpus({.n_rows = 2000});
  std::map<std::string, std::set<std::string>> codes_of;
  for (const auto& r : rows) {
    for (const auto& t : models::tokenize(r.description)) codes_of[t].insert(*r.failure_code);
  }
  for (const auto& r : rows) {
    std::size_t keywords = 0;
    for (const auto& t : models::tokenize(r.description)) {
      if (codes_of[t].size() == 1) {
        CHECK(*codes_of[t].begin() == *r.failure_code);
        ++keywords;
      }
    }
    CHECK(keywords >= 2);
  }
}

TEST_CASE("approval noise flips labels at about the requested rate") {
  const auto rows = generate_corpus({.n_rows = 4000, .approval_noise = 0.1});
  std::size_t flipped = 0;
  for (const auto& r : rows) flipped += *r.approved != approval_rule(r.cost, r.priority);
  const double rate = static_cast<double>(flipped) / rows.size();
  CHECK(rate > 0.07);
  CHECK(rate < 0.13);
}

TEST_CASE("csv output parses back") {
  const auto rows = generate_corpus({.n_rows = 60, .n_codes = 5});
  const auto table = csv::parse(to_csv(rows));
  REQUIRE(table.size() == 61);
  CHECK(csv::format_row(table[0]) == kCorpusHeader);
  CHECK(table[1][0] == rows[0].id);
  CHECK(table[1][1] == rows[0].description);
}

TEST_CASE("invalid options") {
  CHECK_THROWS_AS(generate_corpus({.n_rows = 10, .n_codes = 40}), Error);
  CHECK_THROWS_AS(generate_corpus({.approval_noise = 2}), Error);
  CHECK_THROWS_AS(generate_corpus({.n_codes = 1}), Error);
  CHECK_THROWS_AS(approval_rule(100, "whenever"), Error);
}
