#pragma once

// Slow, obviously-correct reference implementations. They share no code with
// the library beyond the Eigen aliases.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "wifisense/core.hpp"

namespace oracle {

using wifisense::Matrix;
using wifisense::Real;
using wifisense::Vector;

struct Moments {
  Real mean = 0;
  Real sample_std = 0;
  Real skewness = 0;
  Real excess_kurtosis = 0;
};

// Two passes: mean first, then central sums.
inline Moments two_pass(const std::vector<Real>& x) {
  Moments m;
  const auto n = static_cast<Real>(x.size());
  for (Real v : x) m.mean += v;
  m.mean /= n;
  Real s2 = 0, s3 = 0, s4 = 0;
  for (Real v : x) {
    const Real d = v - m.mean;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
  }
  m.sample_std = x.size() > 1 ? std::sqrt(s2 / (n - 1)) : 0;
  if (s2 > 0) {
    const Real m2 = s2 / n;
    m.skewness = (s3 / n) / std::pow(m2, 1.5);
    m.excess_kurtosis = (s4 / n) / (m2 * m2) - 3;
  }
  return m;
}

// O(N^2) DFT power of the mean-removed signal, |X_k|^2 / N for all k.
inline std::vector<Real> naive_power(const std::vector<Real>& x) {
  const std::size_t n = x.size();
  Real mean = 0;
  for (Real v : x) mean += v;
  mean /= static_cast<Real>(n);
  std::vector<Real> p(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<Real> acc = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const Real angle = -2 * std::numbers::pi * static_cast<Real>(k * t % n) / static_cast<Real>(n);
      acc += (x[t] - mean) * std::polar(1.0, angle);
    }
    p[k] = std::norm(acc) / static_cast<Real>(n);
  }
  return p;
}

// Every distance computed, ordered by (distance, index).
inline std::vector<std::pair<Real, Eigen::Index>> exhaustive_knn(const Matrix& rows, const Vector& q, int k) {
  std::vector<std::pair<Real, Eigen::Index>> all;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Real d2 = 0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) d2 += (rows(i, j) - q[j]) * (rows(i, j) - q[j]);
    all.emplace_back(std::sqrt(d2), i);
  }
  std::sort(all.begin(), all.end());
  all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(k)));
  return all;
}

inline Real c_factor(std::size_t n) {
  if (n <= 1) return 0;
  Real h = 0;
  for (std::size_t i = 1; i < n; ++i) h += 1.0 / static_cast<Real>(i);
  return 2 * h - 2 * static_cast<Real>(n - 1) / static_cast<Real>(n);
}

// Expected isolation path length of `x` in one random tree grown on `points`
// (all of them, no subsampling). Enumerates the split feature and every
// interval of the uniform split value between consecutive distinct values,
// cutting the interval again where x itself falls.
inline Real expected_path(const std::vector<Vector>& points, const Vector& x, int depth, int limit) {
  if (depth >= limit || points.size() <= 1) return depth + c_factor(points.size());
  std::vector<Eigen::Index> varying;
  for (Eigen::Index f = 0; f < x.size(); ++f) {
    const bool varies = std::any_of(points.begin(), points.end(), [&](const Vector& p) { return p[f] != points[0][f]; });
    if (varies) varying.push_back(f);
  }
  if (varying.empty()) return depth + c_factor(points.size());

  Real total = 0;
  for (Eigen::Index f : varying) {
    std::vector<Real> v;
    for (const auto& p : points) v.push_back(p[f]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    const Real range = v.back() - v.front();
    Real feature_total = 0;
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
      std::vector<Vector> left, right;
      for (const auto& p : points) (p[f] <= v[j] ? left : right).push_back(p);
      // Split s in [v[j], v[j+1]); x goes left when x[f] <= s.
      const Real a = v[j], b = v[j + 1];
      const Real cut = std::clamp(x[f], a, b);
      const Real p_right = (cut - a) / range;  // s < x[f]
      const Real p_left = (b - cut) / range;   // s >= x[f]
      if (p_left > 0) feature_total += p_left * expected_path(left, x, depth + 1, limit);
      if (p_right > 0) feature_total += p_right * expected_path(right, x, depth + 1, limit);
    }
    total += feature_total;
  }
  return total / static_cast<Real>(varying.size());
}

inline Real gini(const std::vector<int>& labels) {
  if (labels.empty()) return 0;
  std::vector<int> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  Real sum = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const Real p = static_cast<Real>(j - i) / static_cast<Real>(sorted.size());
    sum += p * p;
    i = j;
  }
  return 1 - sum;
}

struct Split {
  Eigen::Index feature = -1;
  Real threshold = 0;
  Real weighted_impurity = 0;
};

// Best root split by brute force over every feature and every midpoint.
inline Split best_split(const Matrix& x, const std::vector<int>& y) {
  Split best;
  best.weighted_impurity = gini(y);
  const auto n = static_cast<Real>(y.size());
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::vector<Real> v(x.col(f).data(), x.col(f).data() + x.rows());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
      const Real t = (v[j] + v[j + 1]) / 2;
      std::vector<int> l, r;
      for (Eigen::Index i = 0; i < x.rows(); ++i) (x(i, f) <= t ? l : r).push_back(y[static_cast<std::size_t>(i)]);
      const Real w = (static_cast<Real>(l.size()) * gini(l) + static_cast<Real>(r.size()) * gini(r)) / n;
      if (w < best.weighted_impurity - 1e-12) best = {f, t, w};
    }
  }
  return best;
}

}  // namespace oracle
