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
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "modelforge/common/time.h"
#include "modelforge/connectors/snapshot.h"
#include "modelforge/monitors/inference_log.h"

namespace modelforge::monitors {

namespace fs = std::filesystem;
using nlohmann::json;

struct MonitorSettings {
  double drift_threshold = 0.2;
  std::size_t min_window = 50;
  std::size_t drift_window = 500;  // newest inferences considered
  double degrade_threshold = 0.6;
  std::size_t accuracy_window = 100;
  std::size_t accuracy_min_labeled = 20;

  // Reads drift_threshold, min_window, drift_window, degrade_threshold,
  // accuracy_window and accuracy_min_labeled, falling back to `defaults`.
  static MonitorSettings from_json(const json& j, const MonitorSettings& defaults);
  static MonitorSettings from_json(const json& j) { return from_json(j, MonitorSettings()); }
  json to_json() const;
};

constexpr std::size_t kNumericBins = 10;
constexpr const char* kOtherBin = "__other__";

// How one feature is bucketed, fixed from the reference data.
struct Binning {
  std::string field;
  bool numeric = false;
  double lo = 0, hi = 0;                // numeric: equal-width bins over [lo, hi]
  std::vector<std::string> categories;  // categorical: sorted, plus kOtherBin

  static Binning numeric_from(const std::string& field, const std::vector<double>& reference);
  static Binning categorical_from(const std::string& field, const std::vector<std::string>& reference);
  std::size_t bins() const { return numeric ? kNumericBins : categories.size() + 1; }
  // Out-of-range numbers go to the edge bins; unknown categories to kOtherBin.
  std::size_t bin_of(std::string_view value) const;
  std::vector<double> histogram(const std::vector<std::string>& values) const;
};

struct DriftReport {
  std::string model_id;
  int model_version = 0;
  Timestamp computed_at = 0;
  std::string status;  // ok | insufficient_data
  std::size_t window_size = 0;
  std::map<std::string, double> per_feature;
  std::optional<double> prediction_psi;
  bool drifted = false;
  double threshold = 0.2;

  json to_json() const;
};

struct DriftInput {
  std::string model_id;
  int model_version = 0;
  const connectors::DatasetSnapshot* reference = nullptr;
  // Monitored fields: numeric ones are binned by value, the rest by category.
  std::vector<std::pair<std::string, bool>> features;  // (field, numeric)
  std::vector<std::string> reference_predictions;
  std::vector<InferenceRecord> window;
};

// Pure drift computation.
DriftReport compute_drift(const DriftInput& input, const MonitorSettings& settings, Timestamp now);

struct AccuracyStatus {
  std::optional<double> accuracy;  // empty with no labeled inferences
  std::size_t labeled = 0;
  std::size_t correct = 0;
  std::size_t window = 0;
  json to_json() const;
};

struct FeedbackRecord {
  std::string model_id;
  std::string inference_id;
  std::string ground_truth;
  Timestamp submitted_at = 0;
};

// Feedback store, drift report history and edge-trigger state per model.
// Reports and feedback are persisted under `root/<model_id>/`.
class Monitor {
 public:
  Monitor(fs::path root, const Clock& clock);

  struct DriftOutcome {
    DriftReport report;
    bool emit_event = false;  // rising edge of `drifted`
  };
  DriftOutcome evaluate_drift(const DriftInput& input, const MonitorSettings& settings);
  std::optional<DriftReport> last_drift(const std::string& model_id) const;

  struct FeedbackOutcome {
    bool overwritten = false;
    std::string previous;
  };
  // Last write wins per inference id.
  FeedbackOutcome record_feedback(const FeedbackRecord& record, const InferenceRecord& inference);

  // Newest `window` labeled inferences by inference order.
  AccuracyStatus accuracy(const std::string& model_id, std::size_t window) const;

  struct AccuracyOutcome {
    AccuracyStatus status;
    bool emit_event = false;  // rising edge of degradation
  };
  AccuracyOutcome evaluate_accuracy(const std::string& model_id, const MonitorSettings& settings);

  // Clears edge-trigger state, e.g. after a new version goes live.
  void reset_edges(const std::string& model_id);
  void forget(const std::string& model_id);

 private:
  struct Labeled {
    std::uint64_t seq = 0;
    std::string predicted;
    std::string truth;
    Timestamp submitted_at = 0;
  };
  struct State {
    std::map<std::string, Labeled> feedback;  // inference id -> entry
    std::optional<DriftReport> last_drift;
    bool drift_active = false;
    bool degraded_active = false;
  };
  State& state(const std::string& model_id);
  void load();

  fs::path root_;
  const Clock& clock_;
  mutable std::mutex mu_;
  std::map<std::string, State> models_;
};

}  // namespace modelforge::monitors
