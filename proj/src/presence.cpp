#include "wifisense/presence.hpp"

#include <algorithm>
#include <cmath>

#include "wifisense/error.hpp"
#include "wifisense/moments.hpp"

namespace wifisense {

namespace {

constexpr std::size_t kMinCalibrationWindows = 10;

void require_noise(const std::optional<Label>& label, const char* what) {
  if (!label || !label->is_noise()) {
    throw Error(Errc::LabelMismatch, std::string(what) + " must be labeled as noise");
  }
}

const Window& window_for(const WindowSet& ws, DetectorId id) {
  const Window* w = ws.find(id);
  if (w == nullptr) throw Error(Errc::DetectorMismatch, "window set lacks detector " + std::to_string(id));
  return *w;
}

}  // namespace

PresenceMethod method_of(const PresenceModel& model) { return static_cast<PresenceMethod>(model.index()); }

std::string method_name(PresenceMethod method) {
  switch (method) {
    case PresenceMethod::Method1: return "m1";
    case PresenceMethod::Method2a: return "m2a";
    case PresenceMethod::Method2b: return "m2b";
    case PresenceMethod::IsolationForest: return "iforest";
  }
  return "unknown";
}

PresenceMethod parse_method(const std::string& name) {
  for (auto m : {PresenceMethod::Method1, PresenceMethod::Method2a, PresenceMethod::Method2b,
                 PresenceMethod::IsolationForest}) {
    if (method_name(m) == name) return m;
  }
  throw Error(Errc::InvalidArgument, "unknown presence method '" + name + "'");
}

Method1Model calibrate_method1(std::span<const WindowSet> noise_windows, Real f) {
  if (noise_windows.size() < kMinCalibrationWindows) {
    throw Error(Errc::InsufficientCalibration, "need at least " + std::to_string(kMinCalibrationWindows) +
                                                   " noise windows, got " + std::to_string(noise_windows.size()));
  }
  if (!(f > 1)) throw Error(Errc::InvalidArgument, "threshold factor f must exceed 1");

  Method1Model model;
  model.f = f;
  model.detectors = noise_windows.front().detector_ids();
  model.sigma_bar = Vector::Zero(static_cast<Eigen::Index>(model.detectors.size()));
  for (const auto& ws : noise_windows) {
    require_noise(ws.label, "Method 1 calibration window");
    for (std::size_t j = 0; j < model.detectors.size(); ++j) {
      model.sigma_bar[static_cast<Eigen::Index>(j)] += window_stats(window_for(ws, model.detectors[j])).std;
    }
  }
  model.sigma_bar /= static_cast<Real>(noise_windows.size());
  if ((model.sigma_bar.array() <= 0).any()) {
    throw Error(Errc::InsufficientCalibration, "a detector shows zero noise deviation");
  }
  return model;
}

PresenceDecision detect_method1(const Method1Model& model, const WindowSet& ws) {
  PresenceDecision d;
  int votes = 0;
  for (std::size_t j = 0; j < model.detectors.size(); ++j) {
    const Real s = window_stats(window_for(ws, model.detectors[j])).std;
    const int vote = s > model.f * model.sigma_bar[static_cast<Eigen::Index>(j)] ? 1 : 0;
    d.detector_votes.push_back(vote);
    votes += vote;
  }
  const auto total = static_cast<int>(model.detectors.size());
  // At least half of the detectors must vote; an even split counts as presence.
  d.label = 2 * votes >= total ? 1 : 0;
  d.score = total > 0 ? static_cast<Real>(votes) / total : 0;
  return d;
}

Method2aModel calibrate_method2a(const Session& noise_session, Real factor) {
  require_noise(noise_session.label, "Method 2a calibration session");
  if (noise_session.series.empty()) throw Error(Errc::InsufficientCalibration, "empty calibration session");
  Method2aModel model;
  model.factor = factor;
  model.correlated_noise_dev = 1;
  for (const auto& s : noise_session.series) {
    model.detectors.push_back(s.detector_id);
    model.correlated_noise_dev *= sample_std(s.rssi);
  }
  if (!(model.correlated_noise_dev > 0)) {
    throw Error(Errc::InsufficientCalibration, "a detector shows zero noise deviation");
  }
  return model;
}

Real method2a_score(const Method2aModel& model, const WindowSet& ws) {
  Real score = 1;
  for (DetectorId id : model.detectors) score *= window_stats(window_for(ws, id)).std;
  return score;
}

PresenceDecision decide_method2a(const Method2aModel& model, Real score) {
  PresenceDecision d;
  d.score = score;
  d.label = score >= model.factor * model.correlated_noise_dev ? 1 : 0;
  return d;
}

PresenceDecision detect_method2a(const Method2aModel& model, const WindowSet& ws) {
  return decide_method2a(model, method2a_score(model, ws));
}

Vector product_series(std::span<const Vector* const> series) {
  if (series.empty()) return Vector();
  Vector out = *series.front();
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i]->size() != out.size()) throw Error(Errc::AlignmentRequired, "series lengths differ");
    out.array() *= series[i]->array();
  }
  return out;
}

Method2bModel calibrate_method2b(const Session& noise_session, Real factor) {
  require_noise(noise_session.label, "Method 2b calibration session");
  if (noise_session.series.empty()) throw Error(Errc::InsufficientCalibration, "empty calibration session");
  if (!is_aligned(noise_session)) throw Error(Errc::AlignmentRequired, "calibration session is not aligned");

  Method2bModel model;
  model.factor = factor;
  std::vector<const Vector*> parts;
  for (const auto& s : noise_session.series) {
    model.detectors.push_back(s.detector_id);
    parts.push_back(&s.rssi);
  }
  model.sigma_product_series = sample_std(product_series(parts));
  if (!(model.sigma_product_series > 0)) {
    throw Error(Errc::InsufficientCalibration, "product series has zero deviation");
  }
  return model;
}

PresenceDecision detect_method2b(const Method2bModel& model, const WindowSet& ws) {
  std::vector<const Vector*> parts;
  const Vector* ref_times = nullptr;
  for (DetectorId id : model.detectors) {
    const Window& w = window_for(ws, id);
    w.require_accepted();
    if (ref_times != nullptr && (w.times.size() != ref_times->size() || w.times != *ref_times)) {
      throw Error(Errc::AlignmentRequired, "window samples are not on a shared time grid");
    }
    ref_times = &w.times;
    parts.push_back(&w.values);
  }
  PresenceDecision d;
  d.score = sample_std(product_series(parts));
  d.label = d.score >= model.factor * model.sigma_product_series ? 1 : 0;
  return d;
}

IsolationForestModel fit_isolation_forest(std::span<const FeatureVector> noise_features,
                                          const IsolationForestConfig& config, std::uint64_t seed) {
  if (noise_features.size() < 2) throw Error(Errc::InsufficientCalibration, "need at least two noise vectors");
  if (!(config.quantile > 0 && config.quantile < 1)) throw Error(Errc::InvalidArgument, "quantile must be in (0, 1)");

  IsolationForestModel model;
  model.layout = noise_features.front().layout;
  model.quantile = config.quantile;
  Matrix data(static_cast<Eigen::Index>(noise_features.size()), model.layout.size());
  for (std::size_t i = 0; i < noise_features.size(); ++i) {
    const auto& fv = noise_features[i];
    if (!(fv.layout == model.layout)) throw Error(Errc::LayoutMismatch, "training vectors disagree on layout");
    if (!fv.values.allFinite()) throw Error(Errc::MalformedFeature, "non-finite training feature");
    data.row(static_cast<Eigen::Index>(i)) = fv.values.transpose();
  }
  model.forest = IsolationForest::fit(data, config.forest, seed);

  std::vector<Real> scores(noise_features.size());
  for (std::size_t i = 0; i < noise_features.size(); ++i) scores[i] = model.forest.score(noise_features[i].values);
  std::sort(scores.begin(), scores.end());
  // Smallest training score with at least a `quantile` share of scores <= it.
  const auto rank = static_cast<std::size_t>(std::ceil(config.quantile * static_cast<Real>(scores.size())));
  model.score_threshold = scores[std::clamp<std::size_t>(rank, 1, scores.size()) - 1];
  return model;
}

PresenceDecision detect_isolation_forest(const IsolationForestModel& model, const FeatureVector& fv) {
  if (!(fv.layout == model.layout)) throw Error(Errc::LayoutMismatch, "feature layout differs from the model's");
  PresenceDecision d;
  d.score = model.forest.score(fv.values);
  d.label = d.score > model.score_threshold ? 1 : 0;
  return d;
}

PresenceDecision detect_isolation_forest(const IsolationForestModel& model, const WindowSet& ws) {
  FeatureConfig config;
  config.spectrum_bins = model.layout.bins();
  config.detectors = model.layout.detectors();
  return detect_isolation_forest(model, feature_vector(ws, config));
}

PresenceDecision detect(const PresenceModel& model, const WindowSet& ws) {
  return std::visit(
      [&](const auto& m) -> PresenceDecision {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Method1Model>) return detect_method1(m, ws);
        else if constexpr (std::is_same_v<M, Method2aModel>) return detect_method2a(m, ws);
        else if constexpr (std::is_same_v<M, Method2bModel>) return detect_method2b(m, ws);
        else return detect_isolation_forest(m, ws);
      },
      model);
}

PresenceReport evaluate_presence(const PresenceModel& model, std::span<const WindowSet> labeled) {
  PresenceReport report;
  report.method = method_name(method_of(model));
  for (const auto& ws : labeled) {
    if (!ws.label) throw Error(Errc::LabelMismatch, "evaluation window lacks a label");
    const PresenceDecision d = detect(model, ws);
    const int truth = ws.label->presence();
    report.trace.push_back({ws.start(), truth, d.label, d.score});
    report.correct += d.label == truth ? 1 : 0;
  }
  report.windows = labeled.size();
  report.accuracy = report.windows > 0 ? static_cast<Real>(report.correct) / static_cast<Real>(report.windows) : 0;
  return report;
}

}  // namespace wifisense
