#include "wifisense/counting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <queue>
#include <random>

#include "wifisense/error.hpp"

namespace wifisense {

namespace {

std::vector<int> distinct_sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

int class_index(const std::vector<int>& class_set, int label) {
  auto it = std::lower_bound(class_set.begin(), class_set.end(), label);
  return it != class_set.end() && *it == label ? static_cast<int>(it - class_set.begin()) : -1;
}

// Largest count wins; ties go to the smaller label (class_set is sorted).
int majority(const std::vector<int>& counts, const std::vector<int>& class_set) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return class_set[best];
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void require_nonempty(const LabeledDataset& data) {
  if (data.size() == 0) throw Error(Errc::EmptyDataset, "dataset has no samples");
}

// Grows one CART tree over `rows` (duplicates allowed, as in a bootstrap).
// With `features_per_node` set, each node evaluates a uniform sample of that
// many features, scanned in ascending index order.
class CartBuilder {
 public:
  CartBuilder(const LabeledDataset& data, std::optional<int> max_depth, int min_leaf,
              std::optional<int> features_per_node, std::mt19937_64* rng)
      : data_(data), max_depth_(max_depth), min_leaf_(std::max(1, min_leaf)),
        features_per_node_(features_per_node), rng_(rng) {
    for (int label : data.labels) targets_.push_back(class_index(data.class_set, label));
    all_features_.resize(static_cast<std::size_t>(data.features.cols()));
    std::iota(all_features_.begin(), all_features_.end(), 0);
  }

  std::vector<DecisionTree::Node> build(std::vector<Eigen::Index> rows) {
    nodes_.clear();
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    Real threshold = 0;
    Real impurity = std::numeric_limits<Real>::infinity();
  };

  std::vector<int> counts_of(const std::vector<Eigen::Index>& rows) const {
    std::vector<int> counts(data_.class_set.size(), 0);
    for (Eigen::Index r : rows) ++counts[static_cast<std::size_t>(targets_[static_cast<std::size_t>(r)])];
    return counts;
  }

  static Real gini(const std::vector<int>& counts, int n) {
    if (n == 0) return 0;
    Real sum = 0;
    for (int c : counts) {
      const Real p = static_cast<Real>(c) / n;
      sum += p * p;
    }
    return 1 - sum;
  }

  std::vector<int> candidate_features() {
    if (!features_per_node_ || *features_per_node_ >= static_cast<int>(all_features_.size())) return all_features_;
    std::vector<int> pool = all_features_;
    const auto m = static_cast<std::size_t>(std::max(1, *features_per_node_));
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(*rng_)]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split best_split(const std::vector<Eigen::Index>& rows, const std::vector<int>& parent_counts) {
    Split best;
    const int n = static_cast<int>(rows.size());
    std::vector<std::pair<Real, int>> column(rows.size());
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {data_.features(rows[i], f), targets_[static_cast<std::size_t>(rows[i])]};
      }
      std::sort(column.begin(), column.end());
      std::vector<int> left(parent_counts.size(), 0);
      std::vector<int> right = parent_counts;
      for (int i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(column[static_cast<std::size_t>(i)].second);
        ++left[c];
        --right[c];
        const Real v = column[static_cast<std::size_t>(i)].first;
        const Real next = column[static_cast<std::size_t>(i) + 1].first;
        if (!(v < next)) continue;
        const int nl = i + 1;
        const int nr = n - nl;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const Real impurity = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (impurity < best.impurity) {
          best.feature = f;
          best.threshold = v + (next - v) / 2;
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  int grow(const std::vector<Eigen::Index>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    const std::vector<int> counts = counts_of(rows);
    nodes_[static_cast<std::size_t>(id)].label = majority(counts, data_.class_set);

    const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
    const bool too_deep = max_depth_ && depth >= *max_depth_;
    if (pure || too_deep || static_cast<int>(rows.size()) < 2 * min_leaf_) return id;

    const Split split = best_split(rows, counts);
    if (split.feature < 0) return id;

    std::vector<Eigen::Index> left;
    std::vector<Eigen::Index> right;
    for (Eigen::Index r : rows) (data_.features(r, split.feature) <= split.threshold ? left : right).push_back(r);
    const int l = grow(left, depth + 1);
    const int rgt = grow(right, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rgt;
    return id;
  }

  const LabeledDataset& data_;
  std::optional<int> max_depth_;
  int min_leaf_;
  std::optional<int> features_per_node_;
  std::mt19937_64* rng_;
  std::vector<int> targets_;
  std::vector<int> all_features_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

LabeledDataset make_dataset(Matrix features, std::vector<int> labels, FeatureLayout layout) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw Error(Errc::InvalidArgument, "feature rows and labels differ in length");
  }
  if (features.rows() > 0 && features.cols() != layout.size()) {
    throw Error(Errc::LayoutMismatch, "feature columns do not match the layout");
  }
  if (!features.allFinite()) throw Error(Errc::MalformedFeature, "non-finite feature value");
  LabeledDataset out;
  out.class_set = distinct_sorted(labels);
  out.features = std::move(features);
  out.labels = std::move(labels);
  out.layout = std::move(layout);
  return out;
}

LabeledDataset select_rows(const LabeledDataset& data, std::span<const Eigen::Index> rows) {
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    out.labels.push_back(data.labels[static_cast<std::size_t>(rows[i])]);
  }
  out.layout = data.layout;
  out.class_set = distinct_sorted(out.labels);
  return out;
}

LabeledDataset build_dataset(std::span<const Session> sessions, std::span<const DetectorId> detector_subset,
                             const DatasetOptions& options) {
  if (detector_subset.empty()) throw Error(Errc::LayoutMismatch, "empty detector subset");
  FeatureConfig config;
  config.spectrum_bins = options.spectrum_bins;
  config.detectors.assign(detector_subset.begin(), detector_subset.end());
  const FeatureLayout layout(config.detectors, config.spectrum_bins);

  std::vector<Vector> rows;
  std::vector<int> labels;
  for (const auto& session : sessions) {
    if (session.label.is_noise() && !options.include_noise) continue;
    for (DetectorId id : layout.detectors()) {
      if (session.find(id) == nullptr) {
        throw Error(Errc::LayoutMismatch, "session '" + session.metadata + "' lacks detector " + std::to_string(id));
      }
    }
    for (const auto& ws : split_windows(session, options.tau)) {
      rows.push_back(feature_vector(ws, config).values);
      labels.push_back(session.label.count);
    }
  }
  if (rows.empty()) throw Error(Errc::EmptyDataset, "no labeled windows");
  Matrix features(static_cast<Eigen::Index>(rows.size()), layout.size());
  for (std::size_t i = 0; i < rows.size(); ++i) features.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return make_dataset(std::move(features), std::move(labels), layout);
}

// k-nearest neighbours ------------------------------------------------------

KnnModel fit_knn(const LabeledDataset& data, const KnnParams& params) {
  require_nonempty(data);
  if (params.neighbors < 1) throw Error(Errc::InvalidArgument, "neighbors must be at least 1");
  KnnModel model;
  // Small training sets vote with every sample they have.
  model.neighbors = static_cast<int>(std::min<Eigen::Index>(params.neighbors, data.size()));
  model.layout = data.layout;
  model.class_set = data.class_set;
  model.labels = data.labels;
  model.mean = data.features.colwise().mean().transpose();
  const Matrix centered = data.features.rowwise() - model.mean.transpose();
  const auto n = static_cast<Real>(data.size());
  model.scale = (centered.colwise().squaredNorm() / std::max<Real>(1, n - 1)).cwiseSqrt().transpose();
  for (Eigen::Index j = 0; j < model.scale.size(); ++j) {
    if (!(model.scale[j] > 0)) model.scale[j] = 1;  // constant column
  }
  model.train = centered.array().rowwise() / model.scale.transpose().array();
  return model;
}

Vector standardize(const KnnModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.mean.size()) throw Error(Errc::LayoutMismatch, "feature dimension mismatch");
  return ((x - model.mean).array() / model.scale.array()).matrix();
}

std::vector<Neighbor> nearest_neighbors(const KnnModel& model, const Eigen::Ref<const Vector>& query, int k) {
  const Eigen::Index n = model.train.rows();
  const Eigen::Index d = model.train.cols();
  const auto kk = static_cast<std::size_t>(std::clamp<Eigen::Index>(k, 0, n));
  if (kk == 0) return {};

  // Max-heap on (squared distance, index) holding the current k best.
  using Entry = std::pair<Real, Eigen::Index>;
  std::priority_queue<Entry> heap;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool full = heap.size() == kk;
    const Real bound = full ? heap.top().first : std::numeric_limits<Real>::infinity();
    Real sum = 0;
    Eigen::Index j = 0;
    for (; j < d; ++j) {
      const Real diff = model.train(i, j) - query[j];
      sum += diff * diff;
      if (sum > bound) break;
    }
    if (j < d) continue;
    const Entry e{sum, i};
    if (!full) {
      heap.push(e);
    } else if (e < heap.top()) {
      heap.pop();
      heap.push(e);
    }
  }
  std::vector<Neighbor> out(heap.size());
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    *it = {heap.top().second, std::sqrt(heap.top().first)};
    heap.pop();
  }
  return out;
}

int predict_knn(const KnnModel& model, const Eigen::Ref<const Vector>& x) {
  if (model.train.rows() == 0) throw Error(Errc::EmptyDataset, "empty KNN model");
  const auto neighbors = nearest_neighbors(model, standardize(model, x), model.neighbors);
  std::map<int, std::pair<int, Real>> tally;  // label -> (votes, summed distance)
  for (const auto& nb : neighbors) {
    auto& t = tally[model.labels[static_cast<std::size_t>(nb.index)]];
    ++t.first;
    t.second += nb.distance;
  }
  // Most votes; then smaller summed distance; then smaller label (map order).
  auto best = tally.begin();
  for (auto it = tally.begin(); it != tally.end(); ++it) {
    const auto& [votes, dist] = it->second;
    if (votes > best->second.first || (votes == best->second.first && dist < best->second.second)) best = it;
  }
  return best->first;
}

// CART decision tree ----------------------------------------------------------

DecisionTree fit_tree(const LabeledDataset& data, const TreeParams& params, std::uint64_t /*seed*/) {
  require_nonempty(data);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.size()));
  std::iota(rows.begin(), rows.end(), 0);
  CartBuilder builder(data, params.max_depth, params.min_leaf, std::nullopt, nullptr);
  DecisionTree tree;
  tree.nodes = builder.build(std::move(rows));
  tree.layout = data.layout;
  tree.class_set = data.class_set;
  return tree;
}

int predict_tree(const DecisionTree& tree, const Eigen::Ref<const Vector>& x) {
  if (tree.nodes.empty()) throw Error(Errc::EmptyDataset, "empty tree");
  std::size_t id = 0;
  while (tree.nodes[id].feature >= 0) {
    const auto& node = tree.nodes[id];
    if (node.feature >= x.size()) throw Error(Errc::LayoutMismatch, "feature dimension mismatch");
    id = static_cast<std::size_t>(x[node.feature] <= node.threshold ? node.left : node.right);
  }
  return tree.nodes[id].label;
}

// Random forest ---------------------------------------------------------------

RandomForest fit_forest(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed) {
  require_nonempty(data);
  if (params.trees < 1) throw Error(Errc::InvalidArgument, "forest needs at least one tree");
  const auto d = static_cast<int>(data.features.cols());
  const int m = params.max_features.value_or(static_cast<int>(std::ceil(std::sqrt(static_cast<Real>(d)))));

  RandomForest forest;
  forest.layout = data.layout;
  forest.class_set = data.class_set;
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::size_t>(data.size());
  for (int t = 0; t < params.trees; ++t) {
    std::vector<Eigen::Index> rows(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<Eigen::Index> draw(0, static_cast<Eigen::Index>(n) - 1);
      for (auto& r : rows) r = draw(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    CartBuilder builder(data, params.max_depth, params.min_leaf, m, &rng);
    DecisionTree tree;
    tree.nodes = builder.build(std::move(rows));
    tree.layout = data.layout;
    tree.class_set = data.class_set;
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

int predict_forest(const RandomForest& forest, const Eigen::Ref<const Vector>& x) {
  if (forest.trees.empty()) throw Error(Errc::EmptyDataset, "empty forest");
  std::vector<int> votes(forest.class_set.size(), 0);
  for (const auto& tree : forest.trees) ++votes[static_cast<std::size_t>(class_index(forest.class_set, predict_tree(tree, x)))];
  return majority(votes, forest.class_set);
}

// Shared model surface ---------------------------------------------------------

std::string algorithm_name(const AlgorithmSpec& spec) {
  switch (spec.index()) {
    case 0: return "knn";
    case 1: return "tree";
    default: return "forest";
  }
}

std::string model_kind(const CountModel& model) {
  switch (model.index()) {
    case 0: return "knn";
    case 1: return "tree";
    default: return "forest";
  }
}

AlgorithmSpec parse_algorithm(const std::string& name) {
  if (name == "knn") return KnnParams{};
  if (name == "tree") return TreeParams{};
  if (name == "forest") return ForestParams{};
  throw Error(Errc::InvalidArgument, "unknown counting algorithm '" + name + "'");
}

CountModel fit_count_model(const AlgorithmSpec& spec, const LabeledDataset& data, std::uint64_t seed) {
  return std::visit(
      [&](const auto& p) -> CountModel {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) return fit_knn(data, p);
        else if constexpr (std::is_same_v<P, TreeParams>) return fit_tree(data, p, seed);
        else return fit_forest(data, p, seed);
      },
      spec);
}

int predict_count(const CountModel& model, const Eigen::Ref<const Vector>& x) {
  return std::visit(
      [&](const auto& m) -> int {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, KnnModel>) return predict_knn(m, x);
        else if constexpr (std::is_same_v<M, DecisionTree>) return predict_tree(m, x);
        else return predict_forest(m, x);
      },
      model);
}

int predict_count(const CountModel& model, const FeatureVector& fv) {
  if (!(fv.layout == layout_of(model))) throw Error(Errc::LayoutMismatch, "feature layout differs from the model's");
  return predict_count(model, fv.values);
}

const FeatureLayout& layout_of(const CountModel& model) {
  return std::visit([](const auto& m) -> const FeatureLayout& { return m.layout; }, model);
}

const std::vector<int>& class_set_of(const CountModel& model) {
  return std::visit([](const auto& m) -> const std::vector<int>& { return m.class_set; }, model);
}

// Cross-validation ------------------------------------------------------------

FoldAssignment assign_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error(Errc::InvalidArgument, "cross-validation needs k >= 2");
  if (labels.size() < static_cast<std::size_t>(k)) throw Error(Errc::EmptyDataset, "fewer samples than folds");

  std::mt19937_64 rng(seed);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  FoldAssignment out;
  out.stratified = std::all_of(by_class.begin(), by_class.end(),
                               [k](const auto& kv) { return kv.second.size() >= static_cast<std::size_t>(k); });
  std::vector<std::size_t> order;
  order.reserve(labels.size());
  if (out.stratified) {
    for (auto& [label, members] : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      order.insert(order.end(), members.begin(), members.end());
    }
  } else {
    order.resize(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
  }
  out.fold_of.assign(labels.size(), 0);
  for (std::size_t p = 0; p < order.size(); ++p) out.fold_of[order[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
  return out;
}

CvReport cross_validate(const Learner& learner, const LabeledDataset& data, int k, std::uint64_t seed) {
  require_nonempty(data);
  const FoldAssignment folds = assign_folds(data.labels, k, seed);

  CvReport report;
  report.folds = k;
  report.seed = seed;
  report.stratified = folds.stratified;
  report.fold_of = folds.fold_of;
  report.class_set = data.class_set;
  const auto classes = static_cast<Eigen::Index>(data.class_set.size());

  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    for (std::size_t i = 0; i < folds.fold_of.size(); ++i) {
      (folds.fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    }
    const Predictor predict = learner(select_rows(data, train), mix_seed(seed, static_cast<std::uint64_t>(f)));
    Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(classes, classes);
    std::size_t correct = 0;
    for (Eigen::Index row : test) {
      const int truth = data.labels[static_cast<std::size_t>(row)];
      const int guess = predict(data.features.row(row).transpose());
      correct += guess == truth ? 1 : 0;
      const int ti = class_index(data.class_set, truth);
      const int gi = class_index(data.class_set, guess);
      if (ti >= 0 && gi >= 0) ++confusion(ti, gi);
    }
    report.fold_accuracy.push_back(static_cast<Real>(correct) / static_cast<Real>(test.size()));
    report.confusion.push_back(std::move(confusion));
  }
  report.mean_accuracy =
      std::accumulate(report.fold_accuracy.begin(), report.fold_accuracy.end(), 0.0) / static_cast<Real>(k);
  return report;
}

CvReport cross_validate(const AlgorithmSpec& spec, const LabeledDataset& data, int k, std::uint64_t seed) {
  const Learner learner = [&spec](const LabeledDataset& train, std::uint64_t s) -> Predictor {
    auto model = std::make_shared<CountModel>(fit_count_model(spec, train, s));
    return [model](const Eigen::Ref<const Vector>& x) { return predict_count(*model, x); };
  };
  return cross_validate(learner, data, k, seed);
}

SweepReport detector_sweep(std::span<const Session> sessions, std::span<const AlgorithmSpec> specs,
                           std::span<const DetectorId> order, int k, std::uint64_t seed,
                           const DatasetOptions& options) {
  if (order.empty()) throw Error(Errc::LayoutMismatch, "empty detector order");
  SweepReport report;
  report.order.assign(order.begin(), order.end());
  for (std::size_t n = 1; n <= order.size(); ++n) {
    const LabeledDataset data = build_dataset(sessions, order.first(n), options);
    for (const auto& spec : specs) {
      const CvReport cv = cross_validate(spec, data, k, seed);
      report.rows.push_back({algorithm_name(spec), static_cast<int>(n), cv.mean_accuracy, cv.fold_accuracy});
    }
  }
  return report;
}

}  // namespace wifisense
