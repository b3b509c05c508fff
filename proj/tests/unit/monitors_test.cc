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

#include <cmath>

#include "doctest.h"
#include "modelforge/common/error.h"
#include "modelforge/common/random.h"
#include "modelforge/monitors/inference_log.h"
#include "modelforge/monitors/monitor.h"
#include "modelforge/monitors/psi.h"
#include "support/support.h"

using namespace modelforge;
using namespace modelforge::monitors;
using mftest::TempDir;

namespace {

// Direct evaluation with epsilon raised empty bins, written independently.
double psi_oracle(std::vector<double> p, std::vector<double> q) {
  auto norm = [](std::vector<double>& v) {
    double t = 0;
    for (double x : v) t += x;
    for (double& x : v) x = x / t;
    t = 0;
    for (double& x : v) {
      if (x == 0) x = kPsiEpsilon;
      t += x;
    }
    for (double& x : v) x /= t;
  };
  norm(p);
  norm(q);
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (q[i] - p[i]) * std::log(q[i] / p[i]);
  return s;
}

connectors::DatasetSnapshot cost_reference(std::size_t n, double lo, double hi) {
  connectors::DatasetSnapshot s;
  s.schema = {{"cost", tmpl::FieldKind::kNumeric, true}};
  for (std::size_t i = 0; i < n; ++i) s.rows.push_back({std::to_string(lo + (hi - lo) * i / (n - 1))});
  s.digest = connectors::snapshot_digest(s);
  return s;
}

std::vector<InferenceRecord> cost_window(std::size_t n, double lo, double hi) {
  std::vector<InferenceRecord> w;
  for (std::size_t i = 0; i < n; ++i) {
    InferenceRecord r;
    r.inference_id = "i" + std::to_string(i);
    r.seq = i + 1;
    r.inputs = {{"cost", std::to_string(lo + (hi - lo) * i / (n - 1))}};
    w.push_back(r);
  }
  return w;
}

}  // namespace

TEST_CASE("psi of identical histograms is exactly zero") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> h(1 + rng.below(12));
    for (auto& v : h) v = static_cast<double>(rng.below(5));
    h[0] += 1;
    CHECK(compute_psi(h, h) == 0.0);
  }
}

TEST_CASE("psi matches the direct formula and is symmetric and non-negative") {
  CHECK(compute_psi({1, 1}, {1, 0}) == doctest::Approx(psi_oracle({1, 1}, {1, 0})).epsilon(1e-12));
  CHECK(compute_psi({1, 1}, {1, 0}) > 0.2);
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(5), b(5);
    for (auto& v : a) v = static_cast<double>(rng.below(20));
    for (auto& v : b) v = static_cast<double>(rng.below(20));
    a[1] += 1;
    b[2] += 1;
    const double psi = compute_psi(a, b);
    CHECK(psi >= 0);
    CHECK(psi == doctest::Approx(compute_psi(b, a)).epsilon(1e-12));
    CHECK(psi == doctest::Approx(psi_oracle(a, b)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(compute_psi({1, 2}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(compute_psi({0, 0}, {1, 1}), Error);
}

TEST_CASE("smoothed proportions sum to one") {
  const auto p = smoothed_proportions({0, 3, 0, 1});
  double s = 0;
  for (double v : p) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p[0] > 0);
}

TEST_CASE("binning") {
  const auto nb = Binning::numeric_from("cost", {0, 10});
  CHECK(nb.bins() == kNumericBins);
  CHECK(nb.bin_of("-5") == 0);
  CHECK(nb.bin_of("0") == 0);
  CHECK(nb.bin_of("10") == kNumericBins - 1);
  CHECK(nb.bin_of("99") == kNumericBins - 1);
  const auto cb = Binning::categorical_from("p", {"low", "high", "low"});
  CHECK(cb.bin_of("high") != cb.bin_of("low"));
  CHECK(cb.bin_of("urgent") == cb.bin_of(kOtherBin));
  double total = 0;
  for (double v : cb.histogram({"low", "x"})) total += v;
  CHECK(total == 2);
}

TEST_CASE("drift needs a minimum window and flags shifted inputs") {
  const auto ref = cost_reference(200, 0, 100);
  DriftInput in;
  in.model_id = "m";
  in.model_version = 1;
  in.reference = &ref;
  in.features = {{"cost", true}};
  MonitorSettings settings;
  settings.min_window = 50;

  in.window = cost_window(10, 0, 100);
  CHECK(compute_drift(in, settings, 0).status == "insufficient_data");
  CHECK_FALSE(compute_drift(in, settings, 0).drifted);

  in.window = cost_window(200, 0, 100);
  const auto same = compute_drift(in, settings, 0);
  CHECK(same.status == "ok");
  CHECK(same.per_feature.at("cost") < 0.05);
  CHECK_FALSE(same.drifted);

  in.window = cost_window(200, 80, 100);
  const auto shifted = compute_drift(in, settings, 0);
  CHECK(shifted.per_feature.at("cost") > settings.drift_threshold);
  CHECK(shifted.drifted);
}

TEST_CASE("drift events fire on the rising edge only") {
  TempDir tmp;
  VirtualClock clock(0);
  Monitor mon(tmp / "mon", clock);
  const auto ref = cost_reference(100, 0, 100);
  DriftInput in;
  in.model_id = "m";
  in.reference = &ref;
  in.features = {{"cost", true}};
  in.window = cost_window(100, 90, 100);
  CHECK(mon.evaluate_drift(in, {}).emit_event);
  CHECK_FALSE(mon.evaluate_drift(in, {}).emit_event);
  in.window = cost_window(100, 0, 100);
  CHECK_FALSE(mon.evaluate_drift(in, {}).emit_event);
  in.window = cost_window(100, 90, 100);
  CHECK(mon.evaluate_drift(in, {}).emit_event);
  REQUIRE(mon.last_drift("m"));
  CHECK(mon.last_drift("m")->drifted);
}

TEST_CASE("accuracy over labeled feedback degrades once") {
  TempDir tmp;
  VirtualClock clock(0);
  Monitor mon(tmp / "mon", clock);
  InferenceLog log;
  MonitorSettings settings;
  settings.degrade_threshold = 0.6;
  settings.accuracy_min_labeled = 20;
  for (int i = 0; i < 30; ++i) {
    InferenceRecord r;
    r.inference_id = "i" + std::to_string(i);
    r.prediction = "A";
    const auto stored = log.append(r);
    mon.record_feedback({"m", r.inference_id, i % 2 ? "A" : "B", clock.now()}, stored);
  }
  const auto acc = mon.accuracy("m", 100);
  CHECK(acc.labeled == 30);
  CHECK(acc.correct == 15);
  REQUIRE(acc.accuracy);
  CHECK(*acc.accuracy == 0.5);

  CHECK(mon.evaluate_accuracy("m", settings).emit_event);
  CHECK_FALSE(mon.evaluate_accuracy("m", settings).emit_event);
  mon.reset_edges("m");
  CHECK(mon.evaluate_accuracy("m", settings).emit_event);
}

TEST_CASE("feedback is last-write-wins and persisted") {
  TempDir tmp;
  VirtualClock clock(0);
  InferenceLog log;
  InferenceRecord r;
  r.inference_id = "i1";
  r.prediction = "A";
  const auto stored = log.append(r);
  {
    Monitor mon(tmp / "mon", clock);
    CHECK_FALSE(mon.record_feedback({"m", "i1", "B", 0}, stored).overwritten);
    const auto again = mon.record_feedback({"m", "i1", "A", 1}, stored);
    CHECK(again.overwritten);
    CHECK(again.previous == "B");
    CHECK(*mon.accuracy("m", 10).accuracy == 1.0);
  }
  Monitor reopened(tmp / "mon", clock);
  CHECK(reopened.accuracy("m", 10).labeled == 1);
  CHECK(*reopened.accuracy("m", 10).accuracy == 1.0);
}

TEST_CASE("inference log ring keeps the newest records") {
  InferenceLog log(3);
  for (int i = 0; i < 5; ++i) {
    InferenceRecord r;
    r.inference_id = "i" + std::to_string(i);
    r.model_version = i < 3 ? 1 : 2;
    CHECK(log.append(r).seq == static_cast<std::uint64_t>(i + 1));
  }
  CHECK(log.size() == 3);
  CHECK(log.total() == 5);
  CHECK_FALSE(log.find("i0"));
  CHECK(log.find("i4"));
  const auto recent = log.recent(10);
  REQUIRE(recent.size() == 3);
  CHECK(recent.front().inference_id == "i2");
  CHECK(log.recent(10, 2).size() == 2);
}

TEST_CASE("monitor settings parse with defaults") {
  const auto s = MonitorSettings::from_json({{"drift_threshold", 0.3}});
  CHECK(s.drift_threshold == 0.3);
  CHECK(s.min_window == MonitorSettings().min_window);
  CHECK(MonitorSettings::from_json(s.to_json()).to_json() == s.to_json());
}
