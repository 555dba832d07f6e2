#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wifisense/core.hpp"
#include "wifisense/features.hpp"
#include "wifisense/isolation_forest.hpp"

namespace wifisense {

/// Per-detector noise baseline: detector j votes for presence when its window
/// std exceeds f * sigma_bar[j].
struct Method1Model {
  std::vector<DetectorId> detectors;
  Vector sigma_bar;
  Real f = 2.2;
};

/// Product of whole-calibration-period stds across detectors.
struct Method2aModel {
  std::vector<DetectorId> detectors;
  Real correlated_noise_dev = 0;
  Real factor = 3;
};

/// Std of the per-timestamp product of the raw aligned calibration series.
struct Method2bModel {
  std::vector<DetectorId> detectors;
  Real sigma_product_series = 0;
  Real factor = 3;
};

struct IsolationForestModel {
  IsolationForest forest;
  FeatureLayout layout;
  Real score_threshold = 0.5;
  Real quantile = 0.98;
};

using PresenceModel = std::variant<Method1Model, Method2aModel, Method2bModel, IsolationForestModel>;

enum class PresenceMethod { Method1, Method2a, Method2b, IsolationForest };

PresenceMethod method_of(const PresenceModel& model);
std::string method_name(PresenceMethod method);
PresenceMethod parse_method(const std::string& name);

struct PresenceDecision {
  int label = 0;                    // 0 noise, 1 someone present
  std::vector<int> detector_votes;  // Method 1 only
  Real score = 0;
};

Method1Model calibrate_method1(std::span<const WindowSet> noise_windows, Real f = 2.2);
PresenceDecision detect_method1(const Method1Model& model, const WindowSet& ws);

Method2aModel calibrate_method2a(const Session& noise_session, Real factor = 3);
/// Product of window stds over the model's detectors.
Real method2a_score(const Method2aModel& model, const WindowSet& ws);
PresenceDecision decide_method2a(const Method2aModel& model, Real score);
PresenceDecision detect_method2a(const Method2aModel& model, const WindowSet& ws);

/// Requires an aligned session (see align_series).
Method2bModel calibrate_method2b(const Session& noise_session, Real factor = 3);
/// Element-wise product across detectors of equally sampled series.
Vector product_series(std::span<const Vector* const> series);
PresenceDecision detect_method2b(const Method2bModel& model, const WindowSet& ws);

struct IsolationForestConfig {
  IsolationForestParams forest;
  Real quantile = 0.98;
};

IsolationForestModel fit_isolation_forest(std::span<const FeatureVector> noise_features,
                                          const IsolationForestConfig& config, std::uint64_t seed);
PresenceDecision detect_isolation_forest(const IsolationForestModel& model, const FeatureVector& fv);
PresenceDecision detect_isolation_forest(const IsolationForestModel& model, const WindowSet& ws);

/// Dispatches on the model alternative.
PresenceDecision detect(const PresenceModel& model, const WindowSet& ws);

struct TraceEntry {
  Real start = 0;
  int truth = 0;
  int predicted = 0;
  Real score = 0;
};

struct PresenceReport {
  std::string method;
  std::size_t windows = 0;
  std::size_t correct = 0;
  Real accuracy = 0;
  std::vector<TraceEntry> trace;
};

/// Window sets must carry labels; truth is the binary presence label.
PresenceReport evaluate_presence(const PresenceModel& model, std::span<const WindowSet> labeled);

}  // namespace wifisense
