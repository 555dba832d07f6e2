#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

namespace wifisense {

/// Single-pass accumulator for the first four central moments
/// (Welford / Terriberry update). Numerically stable for long windows.
template <typename Scalar>
class RunningMoments {
 public:
  void push(Scalar x) {
    const Scalar n1 = static_cast<Scalar>(n_);
    ++n_;
    const Scalar n = static_cast<Scalar>(n_);
    const Scalar delta = x - mean_;
    const Scalar delta_n = delta / n;
    const Scalar delta_n2 = delta_n * delta_n;
    const Scalar term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
    m2_ += term1;
  }

  long count() const { return n_; }
  Scalar mean() const { return mean_; }

  /// Unbiased (n - 1) variance; zero for fewer than two samples.
  Scalar sample_variance() const { return n_ > 1 ? m2_ / static_cast<Scalar>(n_ - 1) : Scalar(0); }
  Scalar sample_std() const { return std::sqrt(sample_variance()); }

  /// Standardized third central moment; 0 for a constant sequence.
  Scalar skewness() const {
    if (n_ < 2 || m2_ <= 0) return 0;
    const Scalar n = static_cast<Scalar>(n_);
    return std::sqrt(n) * m3_ / std::pow(m2_, Scalar(1.5));
  }

  /// Standardized fourth central moment minus 3; 0 for a constant sequence.
  Scalar excess_kurtosis() const {
    if (n_ < 2 || m2_ <= 0) return 0;
    const Scalar n = static_cast<Scalar>(n_);
    return n * m4_ / (m2_ * m2_) - 3;
  }

 private:
  long n_ = 0;
  Scalar mean_ = 0;
  Scalar m2_ = 0;
  Scalar m3_ = 0;
  Scalar m4_ = 0;
};

template <typename Derived>
RunningMoments<typename Derived::Scalar> running_moments(const Eigen::DenseBase<Derived>& x) {
  RunningMoments<typename Derived::Scalar> acc;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc.push(x.derived().coeff(i));
  return acc;
}

template <typename Derived>
typename Derived::Scalar sample_std(const Eigen::DenseBase<Derived>& x) {
  return running_moments(x).sample_std();
}

/// Linear-interpolation quantile of already sorted data (p in [0, 1]).
template <typename Scalar>
Scalar sorted_quantile(const std::vector<Scalar>& sorted, Scalar p) {
  if (sorted.empty()) return 0;
  const Scalar pos = p * static_cast<Scalar>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const Scalar frac = pos - static_cast<Scalar>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

template <typename Derived>
typename Derived::Scalar quantile(const Eigen::DenseBase<Derived>& x, typename Derived::Scalar p) {
  std::vector<typename Derived::Scalar> v(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) v[static_cast<std::size_t>(i)] = x.derived().coeff(i);
  std::sort(v.begin(), v.end());
  return sorted_quantile(v, p);
}

}  // namespace wifisense
