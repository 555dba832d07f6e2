#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wifisense/core.hpp"

namespace wifisense {

/// H(n) = 1 + 1/2 + ... + 1/n, with H(0) = 0.
Real harmonic_number(long n);

/// Expected path length of an unsuccessful BST search among n points:
/// c(n) = 2 H(n - 1) - 2 (n - 1) / n, c(1) = c(0) = 0.
Real average_path_length(long n);

struct IsolationForestParams {
  int trees = 100;
  int subsample = 256;              // clipped to the training size
  std::optional<int> height_limit;  // default ceil(log2(subsample))
};

/// Ensemble of random axis-aligned isolation trees. At every node a feature
/// is drawn uniformly among those that still vary inside the node, and the
/// split value uniformly in [min, max) of that feature; values <= split go left.
class IsolationForest {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    Real threshold = 0;
    int left = -1;
    int right = -1;
    int size = 0;  // training points that reached the node
  };
  using Tree = std::vector<Node>;

  IsolationForest() = default;
  IsolationForest(std::vector<Tree> trees, int subsample, int height_limit, Eigen::Index dimension);

  /// Rows of `data` are samples.
  static IsolationForest fit(const Matrix& data, const IsolationForestParams& params, std::uint64_t seed);

  /// Mean over trees of depth + c(leaf size).
  Real path_length(const Eigen::Ref<const Vector>& x) const;
  /// Mean over trees of the raw leaf depth, without the c(size) correction.
  Real isolation_depth(const Eigen::Ref<const Vector>& x) const;
  /// 2^(-E[h(x)] / c(subsample)), in (0, 1).
  Real score(const Eigen::Ref<const Vector>& x) const;

  const std::vector<Tree>& trees() const { return trees_; }
  int subsample() const { return subsample_; }
  int height_limit() const { return height_limit_; }
  Eigen::Index dimension() const { return dimension_; }

 private:
  const Node& leaf_for(const Tree& tree, const Eigen::Ref<const Vector>& x, int& depth) const;

  std::vector<Tree> trees_;
  int subsample_ = 0;
  int height_limit_ = 0;
  Eigen::Index dimension_ = 0;
};

}  // namespace wifisense
