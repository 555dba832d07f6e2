#include "wifisense/features.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

#include "wifisense/error.hpp"
#include "wifisense/moments.hpp"

namespace wifisense {

namespace {

const char* const kStatNames[] = {"mean", "std", "skewness", "kurtosis", "min",
                                  "max",  "median", "iqr",   "abs_sum_changes"};

}  // namespace

WindowStats compute_stats(const Eigen::Ref<const Vector>& values) {
  WindowStats s;
  if (values.size() == 0) return s;
  const auto m = running_moments(values);
  s.mean = m.mean();
  s.std = m.sample_std();
  s.skewness = m.skewness();
  s.kurtosis = m.excess_kurtosis();

  std::vector<Real> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = sorted_quantile(sorted, 0.5);
  s.iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  if (values.size() > 1) {
    s.abs_sum_changes = (values.tail(values.size() - 1) - values.head(values.size() - 1)).cwiseAbs().sum();
  }
  return s;
}

WindowStats window_stats(const Window& window) {
  window.require_accepted();
  return compute_stats(window.values);
}

Vector power_spectrum(const Eigen::Ref<const Vector>& values) {
  const Eigen::Index n = values.size();
  if (n == 0) return Vector();
  std::vector<Real> centered(static_cast<std::size_t>(n));
  const Real mean = values.mean();
  for (Eigen::Index i = 0; i < n; ++i) centered[static_cast<std::size_t>(i)] = values[i] - mean;

  Eigen::FFT<Real> fft;
  std::vector<std::complex<Real>> bins;
  fft.fwd(bins, centered);

  Vector power(n);
  for (Eigen::Index k = 0; k < n; ++k) power[k] = std::norm(bins[static_cast<std::size_t>(k)]) / static_cast<Real>(n);
  return power;
}

SpectrumSummary spectrum(const Window& window, int bins) {
  window.require_accepted();
  if (bins < 1) throw Error(Errc::InvalidArgument, "spectrum needs at least one bin");
  if (window.values.size() < 2 * static_cast<Eigen::Index>(bins)) {
    throw Error(Errc::WindowTooShort, "window of " + std::to_string(window.values.size()) +
                                          " samples cannot provide " + std::to_string(bins) + " bins");
  }
  const Vector power = power_spectrum(window.values);
  SpectrumSummary out;
  out.bin_energies = power.segment(1, bins);

  // Bin k sits at k / length Hz regardless of the sample count.
  const Eigen::Index half = power.size() / 2;
  Real weighted = 0;
  Real total = 0;
  for (Eigen::Index k = 1; k <= half; ++k) {
    weighted += static_cast<Real>(k) / window.length * power[k];
    total += power[k];
  }
  out.spectral_centroid = total > 0 ? weighted / total : 0;
  return out;
}

FeatureLayout::FeatureLayout(std::vector<DetectorId> detectors, int bins)
    : detectors_(std::move(detectors)), bins_(bins) {
  std::sort(detectors_.begin(), detectors_.end());
  detectors_.erase(std::unique(detectors_.begin(), detectors_.end()), detectors_.end());
}

std::vector<FeatureName> FeatureLayout::names() const {
  std::vector<FeatureName> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (DetectorId id : detectors_) {
    for (const char* name : kStatNames) out.push_back({id, name});
    for (int k = 1; k <= bins_; ++k) out.push_back({id, "bin" + std::to_string(k)});
    out.push_back({id, "spectral_centroid"});
  }
  return out;
}

FeatureLayout layout_for(const WindowSet& ws, const FeatureConfig& config) {
  std::vector<DetectorId> ids = config.detectors.empty() ? ws.detector_ids() : config.detectors;
  if (ids.empty()) throw Error(Errc::LayoutMismatch, "no detectors selected");
  return FeatureLayout(std::move(ids), config.spectrum_bins);
}

FeatureVector feature_vector(const WindowSet& ws, const FeatureConfig& config) {
  FeatureVector fv;
  fv.layout = layout_for(ws, config);
  fv.values.resize(fv.layout.size());
  Eigen::Index col = 0;
  for (DetectorId id : fv.layout.detectors()) {
    const Window* w = ws.find(id);
    if (w == nullptr) throw Error(Errc::LayoutMismatch, "window set has no detector " + std::to_string(id));
    const WindowStats s = window_stats(*w);
    const SpectrumSummary sp = spectrum(*w, config.spectrum_bins);
    for (Real v : {s.mean, s.std, s.skewness, s.kurtosis, s.min, s.max, s.median, s.iqr, s.abs_sum_changes}) {
      fv.values[col++] = v;
    }
    fv.values.segment(col, sp.bin_energies.size()) = sp.bin_energies;
    col += sp.bin_energies.size();
    fv.values[col++] = sp.spectral_centroid;
  }
  if (!fv.values.allFinite()) throw Error(Errc::MalformedFeature, "non-finite feature value");
  return fv;
}

}  // namespace wifisense
