#include "wifisense/isolation_forest.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "wifisense/error.hpp"

namespace wifisense {

namespace {

struct TreeBuilder {
  const Matrix& data;
  int height_limit;
  std::mt19937_64& rng;
  IsolationForest::Tree nodes;

  int grow(std::vector<Eigen::Index>& rows, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[id].size = static_cast<int>(rows.size());
    if (depth >= height_limit || rows.size() <= 1) return id;

    // Features that still vary inside this node, with their ranges.
    std::vector<int> candidates;
    std::vector<std::pair<Real, Real>> ranges;
    for (Eigen::Index f = 0; f < data.cols(); ++f) {
      Real lo = data(rows.front(), f);
      Real hi = lo;
      for (Eigen::Index r : rows) {
        lo = std::min(lo, data(r, f));
        hi = std::max(hi, data(r, f));
      }
      if (lo < hi) {
        candidates.push_back(static_cast<int>(f));
        ranges.emplace_back(lo, hi);
      }
    }
    if (candidates.empty()) return id;

    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::size_t c = pick(rng);
    const auto [lo, hi] = ranges[c];
    std::uniform_real_distribution<Real> split(lo, hi);
    Real threshold = split(rng);
    if (!(threshold < hi)) threshold = lo;  // guard against rounding to hi

    std::vector<Eigen::Index> left;
    std::vector<Eigen::Index> right;
    for (Eigen::Index r : rows) (data(r, candidates[c]) <= threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(left, depth + 1);
    const int rgt = grow(right, depth + 1);
    nodes[id].feature = candidates[c];
    nodes[id].threshold = threshold;
    nodes[id].left = l;
    nodes[id].right = rgt;
    return id;
  }
};

}  // namespace

Real harmonic_number(long n) {
  Real h = 0;
  for (long i = 1; i <= n; ++i) h += 1.0 / static_cast<Real>(i);
  return h;
}

Real average_path_length(long n) {
  if (n <= 1) return 0;
  return 2 * harmonic_number(n - 1) - 2 * static_cast<Real>(n - 1) / static_cast<Real>(n);
}

IsolationForest::IsolationForest(std::vector<Tree> trees, int subsample, int height_limit, Eigen::Index dimension)
    : trees_(std::move(trees)), subsample_(subsample), height_limit_(height_limit), dimension_(dimension) {}

IsolationForest IsolationForest::fit(const Matrix& data, const IsolationForestParams& params, std::uint64_t seed) {
  if (params.trees < 1) throw Error(Errc::InvalidArgument, "isolation forest needs at least one tree");
  if (data.rows() < 2) throw Error(Errc::InsufficientCalibration, "isolation forest needs at least two samples");
  if (!data.allFinite()) throw Error(Errc::MalformedFeature, "non-finite training feature");

  const auto n = static_cast<int>(data.rows());
  const int psi = std::max(2, std::min(params.subsample, n));
  const int limit = params.height_limit.value_or(static_cast<int>(std::ceil(std::log2(static_cast<Real>(psi)))));

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);

  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(params.trees));
  for (int t = 0; t < params.trees; ++t) {
    // Partial Fisher-Yates: the first psi entries become the subsample.
    for (int i = 0; i < psi; ++i) {
      std::uniform_int_distribution<int> j(i, n - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j(rng))]);
    }
    std::vector<Eigen::Index> rows(all.begin(), all.begin() + psi);
    TreeBuilder builder{data, limit, rng, {}};
    builder.grow(rows, 0);
    trees.push_back(std::move(builder.nodes));
  }
  return IsolationForest(std::move(trees), psi, limit, data.cols());
}

const IsolationForest::Node& IsolationForest::leaf_for(const Tree& tree, const Eigen::Ref<const Vector>& x,
                                                       int& depth) const {
  int id = 0;
  depth = 0;
  while (tree[static_cast<std::size_t>(id)].feature >= 0) {
    const Node& node = tree[static_cast<std::size_t>(id)];
    id = x[node.feature] <= node.threshold ? node.left : node.right;
    ++depth;
  }
  return tree[static_cast<std::size_t>(id)];
}

Real IsolationForest::path_length(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dimension_) throw Error(Errc::LayoutMismatch, "feature dimension mismatch");
  Real total = 0;
  for (const auto& tree : trees_) {
    int depth = 0;
    const Node& leaf = leaf_for(tree, x, depth);
    total += depth + average_path_length(leaf.size);
  }
  return total / static_cast<Real>(trees_.size());
}

Real IsolationForest::isolation_depth(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dimension_) throw Error(Errc::LayoutMismatch, "feature dimension mismatch");
  Real total = 0;
  for (const auto& tree : trees_) {
    int depth = 0;
    leaf_for(tree, x, depth);
    total += depth;
  }
  return total / static_cast<Real>(trees_.size());
}

Real IsolationForest::score(const Eigen::Ref<const Vector>& x) const {
  return std::exp2(-path_length(x) / average_path_length(subsample_));
}

}  // namespace wifisense
