#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <map>

#include "helpers.hpp"
#include "oracles.hpp"
#include "wifisense/counting.hpp"
#include "wifisense/error.hpp"

using namespace wifisense;
using testing_helpers::noise_session;

namespace {

// Layout of one detector whose width is d columns, for hand-built matrices.
FeatureLayout width(int d) { return FeatureLayout({1}, d - 10); }

// Gaussian blobs, one per class, in d dimensions.
LabeledDataset blobs(const std::vector<int>& classes, int per_class, int d, Real spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> g;
  Matrix x(static_cast<Eigen::Index>(classes.size()) * per_class, d);
  std::vector<int> y;
  Eigen::Index row = 0;
  for (int c : classes) {
    for (int i = 0; i < per_class; ++i, ++row) {
      for (int j = 0; j < d; ++j) x(row, j) = c * (j % 2 == 0 ? 1.0 : -0.5) + spread * g(rng);
      y.push_back(c);
    }
  }
  return make_dataset(std::move(x), std::move(y), width(d));
}

Session labeled(Session s, int count) {
  s.label = Label::persons(count);
  return s;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no wifisense::Error thrown";
  return Errc::InvalidArgument;
}

}  // namespace

TEST(BuildDataset, ThreeHundredWindows) {
  std::vector<Session> sessions;
  for (int c : {1, 3, 5, 7, 9}) sessions.push_back(labeled(noise_session(3, 0.43 * c, 1200, static_cast<std::uint64_t>(c)), c));
  const std::vector<DetectorId> all{1, 2, 3};
  const LabeledDataset data = build_dataset(sessions, all);
  EXPECT_EQ(data.size(), 300);
  EXPECT_EQ(data.features.cols(), 54);
  EXPECT_EQ(data.class_set, (std::vector<int>{1, 3, 5, 7, 9}));
  EXPECT_EQ(std::count(data.labels.begin(), data.labels.end(), 7), 60);
}

TEST(BuildDataset, SubsetAndErrors) {
  const std::vector<Session> sessions{labeled(noise_session(9, 0.43, 60, 1), 1), noise_session(9, 0.43, 60, 2)};
  const std::vector<DetectorId> four{1, 2, 3, 4};
  const LabeledDataset data = build_dataset(sessions, four);
  EXPECT_EQ(data.features.cols(), 72);
  EXPECT_EQ(data.size(), 3);  // the noise session is skipped by default
  DatasetOptions with_noise;
  with_noise.include_noise = true;
  EXPECT_EQ(build_dataset(sessions, four, with_noise).class_set, (std::vector<int>{0, 1}));

  const std::vector<DetectorId> none;
  EXPECT_EQ(code_of([&] { build_dataset(sessions, none); }), Errc::LayoutMismatch);
  const std::vector<DetectorId> missing{1, 12};
  EXPECT_EQ(code_of([&] { build_dataset(sessions, missing); }), Errc::LayoutMismatch);
}

TEST(Knn, SingleSample) {
  const LabeledDataset data = make_dataset(Matrix::Constant(1, 18, 2.0), {7}, FeatureLayout({1}, 8));
  const KnnModel m = fit_knn(data, {5});
  EXPECT_EQ(m.neighbors, 1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(predict_knn(m, Vector::Random(18)), 7);
}

TEST(Knn, ExactTrainingVector) {
  const LabeledDataset data = blobs({1, 3, 5}, 20, 12, 3.0, 1);
  const KnnModel m = fit_knn(data, {1});
  for (Eigen::Index i = 0; i < data.size(); ++i) EXPECT_EQ(predict_knn(m, data.features.row(i).transpose()), data.labels[static_cast<std::size_t>(i)]);
}

TEST(Knn, OptimizedSearchEqualsExhaustiveScan) {
  const LabeledDataset data = blobs({1, 2, 3, 4}, 50, 16, 2.0, 2);
  const KnnModel m = fit_knn(data, {5});
  std::mt19937_64 rng(3);
  std::normal_distribution<Real> g(0, 3);
  for (int q = 0; q < 200; ++q) {
    Vector raw = q < 100 ? Vector(data.features.row(q * 2).transpose()) : Vector(data.features.row(q).transpose());
    for (Eigen::Index j = 0; j < raw.size(); ++j) raw[j] += q < 100 ? 0 : g(rng);
    const Vector z = standardize(m, raw);
    for (int k : {1, 5, 17}) {
      const auto got = nearest_neighbors(m, z, k);
      const auto want = oracle::exhaustive_knn(m.train, z, k);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_EQ(got[i].index, want[i].second) << "query " << q << " k " << k;
        ASSERT_NEAR(got[i].distance, want[i].first, 1e-9);
      }
    }
  }
}

TEST(Knn, InvariantUnderPerFeatureAffineMaps) {
  const LabeledDataset data = blobs({1, 3, 5}, 30, 12, 2.5, 4);
  Vector scale(12), shift(12);
  for (Eigen::Index j = 0; j < 12; ++j) {
    scale[j] = 0.01 + 3.0 * static_cast<Real>(j);
    shift[j] = -50 + 7.0 * static_cast<Real>(j);
  }
  Matrix mapped = (data.features.array().rowwise() * scale.transpose().array()).rowwise() + shift.transpose().array();
  const KnnModel a = fit_knn(data, {5});
  const KnnModel b = fit_knn(make_dataset(mapped, data.labels, data.layout), {5});
  const LabeledDataset probes = blobs({1, 3, 5}, 20, 12, 4.0, 5);
  for (Eigen::Index i = 0; i < probes.size(); ++i) {
    const Vector x = probes.features.row(i).transpose();
    const Vector y = x.cwiseProduct(scale) + shift;
    EXPECT_EQ(predict_knn(a, x), predict_knn(b, y));
  }
}

TEST(Knn, TieGoesToCloserClassThenSmallerLabel) {
  Matrix x(4, 1);
  x << -1, 1, -3, 3;  // zero mean, so the origin stays equidistant after z-scoring
  const LabeledDataset data = make_dataset(x, {2, 1, 2, 1}, width(1));
  const KnnModel m = fit_knn(data, {2});
  // Two neighbours, one vote each; label 2 is nearer.
  EXPECT_EQ(predict_knn(m, Vector::Constant(1, -0.1)), 2);
  // Equidistant neighbours: fall back to the smaller label.
  EXPECT_EQ(predict_knn(m, Vector::Constant(1, 0.0)), 1);
}

TEST(Knn, EmptyDataset) {
  const LabeledDataset empty = make_dataset(Matrix(0, 3), {}, width(3));
  EXPECT_EQ(code_of([&] { fit_knn(empty); }), Errc::EmptyDataset);
  EXPECT_EQ(code_of([&] { fit_tree(empty); }), Errc::EmptyDataset);
}

TEST(Tree, PureDatasetIsOneLeaf) {
  const LabeledDataset data = make_dataset(Matrix::Random(20, 5), std::vector<int>(20, 4), width(5));
  const DecisionTree t = fit_tree(data);
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(predict_tree(t, Vector::Random(5)), 4);
}

TEST(Tree, OneDimensionalSplit) {
  const LabeledDataset data = make_dataset((Matrix(4, 1) << 0, 1, 10, 11).finished(), {1, 1, 2, 2}, width(1));
  const DecisionTree t = fit_tree(data);
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_GT(t.nodes[0].threshold, 1);
  EXPECT_LT(t.nodes[0].threshold, 10);
  const auto split = oracle::best_split(data.features, data.labels);
  EXPECT_EQ(t.nodes[0].threshold, split.threshold);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(predict_tree(t, data.features.row(i).transpose()), data.labels[static_cast<std::size_t>(i)]);
}

TEST(Tree, DepthZeroIsMajorityStump) {
  const LabeledDataset data = make_dataset(Matrix::Random(7, 2), {3, 3, 3, 5, 5, 1, 1}, width(2));
  const DecisionTree t = fit_tree(data, {0, 1});
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].label, 3);
}

TEST(Tree, RootSplitIsExhaustiveOptimum) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LabeledDataset data = blobs({1, 2, 3}, 8, 11, 2.0 + static_cast<Real>(seed % 4), seed);
    const DecisionTree t = fit_tree(data);
    const auto best = oracle::best_split(data.features, data.labels);
    ASSERT_GE(t.nodes[0].feature, 0);
    std::vector<int> l, r;
    for (Eigen::Index i = 0; i < data.size(); ++i)
      (data.features(i, t.nodes[0].feature) <= t.nodes[0].threshold ? l : r).push_back(data.labels[static_cast<std::size_t>(i)]);
    const Real n = static_cast<Real>(data.size());
    const Real w = (static_cast<Real>(l.size()) * oracle::gini(l) + static_cast<Real>(r.size()) * oracle::gini(r)) / n;
    EXPECT_NEAR(w, best.weighted_impurity, 1e-12) << seed;
  }
}

TEST(Tree, FitsTrainingDataWithoutLimits) {
  const LabeledDataset data = blobs({1, 2, 3, 4, 5}, 15, 11, 3.0, 8);
  const DecisionTree t = fit_tree(data);
  for (Eigen::Index i = 0; i < data.size(); ++i) EXPECT_EQ(predict_tree(t, data.features.row(i).transpose()), data.labels[static_cast<std::size_t>(i)]);
}

TEST(Tree, InvariantUnderMonotoneFeatureTransforms) {
  // Midpoint thresholds move under a nonlinear map, but the chosen features
  // and the partition of the training rows do not.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LabeledDataset data = blobs({1, 3, 5}, 20, 11, 3.0, 9 + seed);
    const Matrix warped = ((data.features.array() / 4).exp() * 3 + 1).matrix();
    const DecisionTree a = fit_tree(data, {3, 1});
    const DecisionTree b = fit_tree(make_dataset(warped, data.labels, data.layout), {3, 1});
    ASSERT_EQ(a.nodes.size(), b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) EXPECT_EQ(a.nodes[i].feature, b.nodes[i].feature);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      EXPECT_EQ(predict_tree(a, data.features.row(i).transpose()), predict_tree(b, warped.row(i).transpose()));
    }
  }
}

TEST(Forest, SingleUnbaggedFullFeatureTreeEqualsCart) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LabeledDataset data = blobs({1, 3, 5, 7, 9}, 20, 14, 4.0, seed);
    ForestParams p;
    p.trees = 1;
    p.bootstrap = false;
    p.max_features = 14;
    const RandomForest f = fit_forest(data, p, seed);
    const DecisionTree t = fit_tree(data);
    const LabeledDataset probes = blobs({1, 3, 5, 7, 9}, 40, 14, 6.0, seed + 100);
    for (Eigen::Index i = 0; i < probes.size(); ++i) {
      const Vector x = probes.features.row(i).transpose();
      ASSERT_EQ(predict_forest(f, x), predict_tree(t, x));
    }
  }
}

TEST(Forest, SeedDeterminism) {
  const LabeledDataset data = blobs({1, 3, 5}, 20, 12, 3.0, 1);
  const RandomForest a = fit_forest(data, {}, 42);
  const RandomForest b = fit_forest(data, {}, 42);
  ASSERT_EQ(a.trees.size(), b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    ASSERT_EQ(a.trees[t].nodes.size(), b.trees[t].nodes.size());
    for (std::size_t i = 0; i < a.trees[t].nodes.size(); ++i) {
      EXPECT_EQ(a.trees[t].nodes[i].feature, b.trees[t].nodes[i].feature);
      EXPECT_EQ(a.trees[t].nodes[i].threshold, b.trees[t].nodes[i].threshold);
    }
  }
}

TEST(Folds, PartitionAndStratification) {
  std::vector<int> labels;
  for (int c : {1, 3, 5, 7, 9})
    for (int i = 0; i < 60; ++i) labels.push_back(c);
  const FoldAssignment f = assign_folds(labels, 3, 7);
  EXPECT_TRUE(f.stratified);
  std::vector<int> sizes(3, 0);
  for (int fold : f.fold_of) {
    ASSERT_GE(fold, 0);
    ASSERT_LT(fold, 3);
    ++sizes[static_cast<std::size_t>(fold)];
  }
  EXPECT_EQ(sizes, (std::vector<int>{100, 100, 100}));
  for (int c : {1, 3, 5, 7, 9}) {
    std::vector<int> per(3, 0);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) ++per[static_cast<std::size_t>(f.fold_of[i])];
    EXPECT_EQ(per, (std::vector<int>{20, 20, 20}));
  }
  EXPECT_EQ(assign_folds(labels, 3, 7).fold_of, f.fold_of);
  EXPECT_NE(assign_folds(labels, 3, 8).fold_of, f.fold_of);
}

TEST(Folds, UnevenSizesDifferByAtMostOne) {
  for (int n : {7, 11, 50, 301}) {
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) labels.push_back(i % 4);
    for (int k : {2, 3, 5}) {
      const FoldAssignment f = assign_folds(labels, k, 1);
      std::vector<int> sizes(static_cast<std::size_t>(k), 0);
      for (int fold : f.fold_of) ++sizes[static_cast<std::size_t>(fold)];
      EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1) << n << " " << k;
    }
  }
}

TEST(Folds, FallsBackWhenAClassIsTooSmall) {
  const std::vector<int> labels{1, 1, 1, 1, 2, 2, 2, 3};
  const FoldAssignment f = assign_folds(labels, 3, 1);
  EXPECT_FALSE(f.stratified);
  EXPECT_EQ(f.fold_of.size(), labels.size());
  EXPECT_EQ(code_of([&] { assign_folds(labels, 1, 1); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { assign_folds(std::vector<int>{1, 2}, 3, 1); }), Errc::EmptyDataset);
}

TEST(CrossValidate, EachSampleTestedOnce) {
  const LabeledDataset data = blobs({1, 3, 5, 7, 9}, 60, 11, 1.0, 3);
  const CvReport r = cross_validate(parse_algorithm("knn"), data, 3, 5);
  EXPECT_EQ(r.folds, 3);
  ASSERT_EQ(r.confusion.size(), 3u);
  for (const auto& c : r.confusion) EXPECT_EQ(c.sum(), 100);
  EXPECT_EQ(r.fold_accuracy.size(), 3u);
  EXPECT_NEAR(r.mean_accuracy, (r.fold_accuracy[0] + r.fold_accuracy[1] + r.fold_accuracy[2]) / 3, 1e-12);
}

TEST(CrossValidate, MemorizingOracleIsPerfect) {
  LabeledDataset data = blobs({1, 3, 5, 7, 9}, 60, 11, 50.0, 4);
  // Column 0 becomes a unique sample id.
  for (Eigen::Index i = 0; i < data.size(); ++i) data.features(i, 0) = static_cast<Real>(i);
  std::map<Real, int> truth;
  for (Eigen::Index i = 0; i < data.size(); ++i) truth[static_cast<Real>(i)] = data.labels[static_cast<std::size_t>(i)];
  const Learner memorize = [&](const LabeledDataset&, std::uint64_t) -> Predictor {
    return [&](const Eigen::Ref<const Vector>& x) { return truth.at(x[0]); };
  };
  EXPECT_DOUBLE_EQ(cross_validate(memorize, data, 3, 1).mean_accuracy, 1.0);
}

TEST(CrossValidate, ConstantPredictorIsChance) {
  const LabeledDataset data = blobs({1, 3, 5, 7, 9}, 60, 11, 1.0, 5);
  const Learner constant = [](const LabeledDataset&, std::uint64_t) -> Predictor {
    return [](const Eigen::Ref<const Vector>&) { return 5; };
  };
  EXPECT_NEAR(cross_validate(constant, data, 3, 1).mean_accuracy, 0.2, 1e-12);
}

TEST(CrossValidate, Deterministic) {
  const LabeledDataset data = blobs({1, 3, 5}, 30, 11, 4.0, 6);
  const CvReport a = cross_validate(parse_algorithm("forest"), data, 3, 17);
  const CvReport b = cross_validate(parse_algorithm("forest"), data, 3, 17);
  EXPECT_EQ(a.fold_accuracy, b.fold_accuracy);
  EXPECT_EQ(a.fold_of, b.fold_of);
}

TEST(Sweep, RowsPerAlgorithmAndDetectorCount) {
  std::vector<Session> sessions;
  for (int c : {1, 3, 5}) sessions.push_back(labeled(noise_session(4, 0.3 * c, 300, static_cast<std::uint64_t>(c)), c));
  const std::vector<AlgorithmSpec> specs{parse_algorithm("knn"), parse_algorithm("tree")};
  const std::vector<DetectorId> order{4, 2, 1, 3};
  const SweepReport r = detector_sweep(sessions, specs, order, 3, 1);
  ASSERT_EQ(r.rows.size(), 8u);
  EXPECT_EQ(r.rows[0].algorithm, "knn");
  EXPECT_EQ(r.rows[0].detectors, 1);
  EXPECT_EQ(r.rows[7].algorithm, "tree");
  EXPECT_EQ(r.rows[7].detectors, 4);
  EXPECT_EQ(r.order, order);
}

TEST(CountModel, LayoutMismatchOnPredict) {
  const LabeledDataset data = blobs({1, 3}, 10, 18, 1.0, 1);
  const CountModel m = fit_count_model(parse_algorithm("tree"), data, 1);
  FeatureVector fv{Vector::Zero(18), FeatureLayout({2}, 8)};
  EXPECT_EQ(code_of([&] { predict_count(m, fv); }), Errc::LayoutMismatch);
  fv.layout = layout_of(m);
  EXPECT_NO_THROW(predict_count(m, fv));
  EXPECT_THROW(parse_algorithm("svm"), Error);
}
