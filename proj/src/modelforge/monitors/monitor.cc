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

#include "modelforge/monitors/monitor.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "modelforge/common/error.h"
#include "modelforge/common/fs.h"
#include "modelforge/monitors/psi.h"

namespace modelforge::monitors {
namespace {

std::size_t get_size(const json& j, const char* key, std::size_t fallback) {
  return j.contains(key) && j[key].is_number_unsigned() ? j[key].get<std::size_t>()
         : j.contains(key) && j[key].is_number_integer() && j[key].get<std::int64_t>() >= 0
             ? static_cast<std::size_t>(j[key].get<std::int64_t>())
             : fallback;
}

double get_double(const json& j, const char* key, double fallback) {
  return j.contains(key) && j[key].is_number() ? j[key].get<double>() : fallback;
}

std::string file_stamp(Timestamp ts) {
  std::string s = format_rfc3339(ts);
  std::replace(s.begin(), s.end(), ':', '-');
  return s;
}

}  // namespace

MonitorSettings MonitorSettings::from_json(const json& j, const MonitorSettings& d) {
  MonitorSettings s;
  if (!j.is_object()) return d;
  s.drift_threshold = get_double(j, "drift_threshold", d.drift_threshold);
  s.min_window = get_size(j, "min_window", d.min_window);
  s.drift_window = get_size(j, "drift_window", d.drift_window);
  s.degrade_threshold = get_double(j, "degrade_threshold", d.degrade_threshold);
  s.accuracy_window = get_size(j, "accuracy_window", d.accuracy_window);
  s.accuracy_min_labeled = get_size(j, "accuracy_min_labeled", d.accuracy_min_labeled);
  return s;
}

json MonitorSettings::to_json() const {
  return {{"drift_threshold", drift_threshold},     {"min_window", min_window},
          {"drift_window", drift_window},           {"degrade_threshold", degrade_threshold},
          {"accuracy_window", accuracy_window},     {"accuracy_min_labeled", accuracy_min_labeled}};
}

Binning Binning::numeric_from(const std::string& field, const std::vector<double>& reference) {
  Binning b;
  b.field = field;
  b.numeric = true;
  if (!reference.empty()) {
    auto [mn, mx] = std::minmax_element(reference.begin(), reference.end());
    b.lo = *mn;
    b.hi = *mx;
  }
  return b;
}

Binning Binning::categorical_from(const std::string& field, const std::vector<std::string>& reference) {
  Binning b;
  b.field = field;
  std::set<std::string> cats(reference.begin(), reference.end());
  cats.erase(kOtherBin);
  b.categories.assign(cats.begin(), cats.end());
  return b;
}

std::size_t Binning::bin_of(std::string_view value) const {
  if (numeric) {
    auto v = connectors::parse_number(value);
    if (!v || *v <= lo) return 0;
    if (*v >= hi) return kNumericBins - 1;
    const double width = (hi - lo) / static_cast<double>(kNumericBins);
    const auto i = static_cast<std::size_t>(std::floor((*v - lo) / width));
    return std::min(i, kNumericBins - 1);
  }
  auto it = std::lower_bound(categories.begin(), categories.end(), value);
  if (it != categories.end() && *it == value) return static_cast<std::size_t>(it - categories.begin());
  return categories.size();
}

std::vector<double> Binning::histogram(const std::vector<std::string>& values) const {
  std::vector<double> h(bins(), 0.0);
  for (const auto& v : values) h[bin_of(v)] += 1;
  return h;
}

json DriftReport::to_json() const {
  json j = {{"model_id", model_id},
            {"model_version", model_version},
            {"computed_at", format_rfc3339(computed_at)},
            {"status", status},
            {"window_size", window_size},
            {"per_feature", per_feature},
            {"drifted", drifted},
            {"threshold", threshold}};
  j["prediction_psi"] = prediction_psi ? json(*prediction_psi) : json(nullptr);
  return j;
}

DriftReport compute_drift(const DriftInput& in, const MonitorSettings& settings, Timestamp now) {
  DriftReport r;
  r.model_id = in.model_id;
  r.model_version = in.model_version;
  r.computed_at = now;
  r.threshold = settings.drift_threshold;
  r.window_size = in.window.size();
  if (in.window.size() < settings.min_window || !in.reference || in.reference->empty()) {
    r.status = "insufficient_data";
    return r;
  }
  r.status = "ok";
  double worst = 0;
  for (const auto& [field, numeric] : in.features) {
    const int col = in.reference->column(field);
    if (col < 0) continue;
    std::vector<std::string> ref_values, cur_values;
    for (const auto& row : in.reference->rows) ref_values.push_back(row[col]);
    for (const auto& rec : in.window) {
      auto it = rec.inputs.find(field);
      cur_values.push_back(it == rec.inputs.end() ? std::string() : it->second);
    }
    Binning b;
    if (numeric) {
      std::vector<double> nums;
      for (const auto& v : ref_values) {
        if (auto n = connectors::parse_number(v)) nums.push_back(*n);
      }
      b = Binning::numeric_from(field, nums);
    } else {
      b = Binning::categorical_from(field, ref_values);
    }
    const double psi = compute_psi(b.histogram(ref_values), b.histogram(cur_values));
    r.per_feature[field] = psi;
    worst = std::max(worst, psi);
  }
  if (!in.reference_predictions.empty()) {
    std::vector<std::string> cur;
    for (const auto& rec : in.window) cur.push_back(rec.prediction);
    const auto b = Binning::categorical_from("prediction", in.reference_predictions);
    r.prediction_psi = compute_psi(b.histogram(in.reference_predictions), b.histogram(cur));
    worst = std::max(worst, *r.prediction_psi);
  }
  r.drifted = worst >= settings.drift_threshold;
  return r;
}

json AccuracyStatus::to_json() const {
  return {{"accuracy", accuracy ? json(*accuracy) : json(nullptr)},
          {"labeled", labeled},
          {"correct", correct},
          {"window", window}};
}

Monitor::Monitor(fs::path root, const Clock& clock) : root_(std::move(root)), clock_(clock) {
  fs::create_directories(root_);
  load();
}

void Monitor::load() {
  for (const auto& dir : fs::directory_iterator(root_)) {
    if (!dir.is_directory()) continue;
    const auto path = dir.path() / "feedback.jsonl";
    if (!fs::is_regular_file(path)) continue;
    auto& st = models_[dir.path().filename().string()];
    const std::string text = read_file(path);
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      const auto line = text.substr(start, end - start);
      start = end + 1;
      if (line.empty()) continue;
      try {
        const auto j = json::parse(line);
        st.feedback[j.at("inference_id").get<std::string>()] =
            Labeled{j.at("seq").get<std::uint64_t>(), j.at("predicted").get<std::string>(),
                    j.at("truth").get<std::string>(), j.at("submitted_at").get<Timestamp>()};
      } catch (const json::exception&) {
        // A torn final line from a crash is skipped.
      }
    }
  }
}

Monitor::State& Monitor::state(const std::string& model_id) { return models_[model_id]; }

Monitor::DriftOutcome Monitor::evaluate_drift(const DriftInput& input, const MonitorSettings& settings) {
  DriftOutcome out;
  out.report = compute_drift(input, settings, clock_.now());
  std::lock_guard lock(mu_);
  auto& st = state(input.model_id);
  if (out.report.status == "ok") {
    if (out.report.drifted && !st.drift_active) out.emit_event = true;
    st.drift_active = out.report.drifted;
    const auto dir = root_ / input.model_id / "drift";
    fs::create_directories(dir);
    write_file_atomic(dir / (file_stamp(out.report.computed_at) + ".json"), out.report.to_json().dump(2));
  }
  st.last_drift = out.report;
  return out;
}

std::optional<DriftReport> Monitor::last_drift(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  auto it = models_.find(model_id);
  if (it == models_.end()) return std::nullopt;
  return it->second.last_drift;
}

Monitor::FeedbackOutcome Monitor::record_feedback(const FeedbackRecord& record, const InferenceRecord& inference) {
  std::lock_guard lock(mu_);
  auto& st = state(record.model_id);
  FeedbackOutcome out;
  auto it = st.feedback.find(record.inference_id);
  if (it != st.feedback.end()) {
    out.overwritten = true;
    out.previous = it->second.truth;
  }
  Labeled entry{inference.seq, inference.prediction, record.ground_truth, record.submitted_at};
  st.feedback[record.inference_id] = entry;
  const auto dir = root_ / record.model_id;
  fs::create_directories(dir);
  append_line(dir / "feedback.jsonl", json{{"inference_id", record.inference_id},
                                           {"seq", entry.seq},
                                           {"predicted", entry.predicted},
                                           {"truth", entry.truth},
                                           {"submitted_at", entry.submitted_at}}
                                          .dump());
  return out;
}

AccuracyStatus Monitor::accuracy(const std::string& model_id, std::size_t window) const {
  std::lock_guard lock(mu_);
  AccuracyStatus s;
  s.window = window;
  auto it = models_.find(model_id);
  if (it == models_.end()) return s;
  std::vector<const Labeled*> entries;
  for (const auto& [_, e] : it->second.feedback) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->seq > b->seq; });
  for (std::size_t i = 0; i < entries.size() && i < window; ++i) {
    ++s.labeled;
    if (entries[i]->predicted == entries[i]->truth) ++s.correct;
  }
  if (s.labeled > 0) s.accuracy = static_cast<double>(s.correct) / static_cast<double>(s.labeled);
  return s;
}

Monitor::AccuracyOutcome Monitor::evaluate_accuracy(const std::string& model_id, const MonitorSettings& settings) {
  AccuracyOutcome out;
  out.status = accuracy(model_id, settings.accuracy_window);
  std::lock_guard lock(mu_);
  auto& st = state(model_id);
  if (out.status.accuracy && out.status.labeled >= settings.accuracy_min_labeled) {
    const bool degraded = *out.status.accuracy < settings.degrade_threshold;
    if (degraded && !st.degraded_active) out.emit_event = true;
    st.degraded_active = degraded;
  }
  return out;
}

void Monitor::reset_edges(const std::string& model_id) {
  std::lock_guard lock(mu_);
  auto& st = state(model_id);
  st.drift_active = false;
  st.degraded_active = false;
}

void Monitor::forget(const std::string& model_id) {
  std::lock_guard lock(mu_);
  models_.erase(model_id);
}

}  // namespace modelforge::monitors
