#pragma once

#include <string>
#include <vector>

#include "wifisense/core.hpp"

namespace wifisense {

struct WindowStats {
  Real mean = 0;
  Real std = 0;       // sample (n - 1) standard deviation
  Real skewness = 0;  // 0 when std == 0
  Real kurtosis = 0;  // excess; 0 when std == 0
  Real min = 0;
  Real max = 0;
  Real median = 0;
  Real iqr = 0;
  Real abs_sum_changes = 0;
};

struct SpectrumSummary {
  Vector bin_energies;  // |X_k|^2 / N for k = 1..K of the mean-removed window
  Real spectral_centroid = 0;  // Hz, over the one-sided spectrum
};

/// Statistics of a raw sample vector; no fill check.
WindowStats compute_stats(const Eigen::Ref<const Vector>& values);

/// Throws UnderfilledWindow for windows below the 50% fill floor.
WindowStats window_stats(const Window& window);

/// All N bins of |DFT(x - mean)|^2 / N. Sums to the time-domain energy of the
/// mean-removed signal.
Vector power_spectrum(const Eigen::Ref<const Vector>& values);

SpectrumSummary spectrum(const Window& window, int bins);

struct FeatureName {
  DetectorId detector_id = 0;
  std::string feature;
  friend bool operator==(const FeatureName&, const FeatureName&) = default;
};

/// Fixed column layout: per detector (ascending id) the nine window
/// statistics, `bins` spectrum energies and the spectral centroid.
class FeatureLayout {
 public:
  FeatureLayout() = default;
  FeatureLayout(std::vector<DetectorId> detectors, int bins);

  const std::vector<DetectorId>& detectors() const { return detectors_; }
  int bins() const { return bins_; }
  int per_detector() const { return 10 + bins_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(detectors_.size()) * per_detector(); }
  std::vector<FeatureName> names() const;

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;

 private:
  std::vector<DetectorId> detectors_;
  int bins_ = 8;
};

struct FeatureVector {
  Vector values;
  FeatureLayout layout;
};

struct FeatureConfig {
  int spectrum_bins = 8;
  std::vector<DetectorId> detectors;  // empty: every detector in the window set
};

FeatureLayout layout_for(const WindowSet& ws, const FeatureConfig& config);

FeatureVector feature_vector(const WindowSet& ws, const FeatureConfig& config = {});

}  // namespace wifisense
