#pragma once

#include <random>
#include <vector>

#include "wifisense/core.hpp"

namespace testing_helpers {

using namespace wifisense;

// Detector i gets values[i] sampled at `rate`, starting at t = 0.
inline Session session_from(const std::vector<std::vector<Real>>& values, Real rate = 20, Label label = Label::noise()) {
  std::vector<RssiRecord> records;
  for (std::size_t d = 0; d < values.size(); ++d) {
    for (std::size_t k = 0; k < values[d].size(); ++k) {
      records.push_back({static_cast<Real>(k) / rate, static_cast<DetectorId>(d + 1), values[d][k]});
    }
  }
  return assemble_session(records, 0, label);
}

inline std::vector<Real> gaussian(std::size_t n, Real mean, Real sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> dist(mean, sigma);
  std::vector<Real> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline Session noise_session(int detectors, Real sigma, Real duration, std::uint64_t seed, Real rate = 20) {
  std::vector<std::vector<Real>> values;
  const auto n = static_cast<std::size_t>(duration * rate);
  for (int d = 0; d < detectors; ++d) values.push_back(gaussian(n, -40 - d, sigma, seed * 31 + static_cast<std::uint64_t>(d)));
  return session_from(values, rate);
}

inline Window window_of(const std::vector<Real>& values, Real rate = 20) {
  Window w;
  w.detector_id = 1;
  w.values = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  w.times = Vector::LinSpaced(w.values.size(), 0, static_cast<Real>(w.values.size() - 1) / rate);
  w.length = static_cast<Real>(values.size()) / rate;
  w.expected_count = static_cast<Real>(values.size());
  return w;
}

}  // namespace testing_helpers
