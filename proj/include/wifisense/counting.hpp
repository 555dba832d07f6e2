#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wifisense/core.hpp"
#include "wifisense/features.hpp"

namespace wifisense {

/// Feature matrix (one row per window) with person-count labels.
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  FeatureLayout layout;
  std::vector<int> class_set;  // sorted distinct labels

  Eigen::Index size() const { return features.rows(); }
};

/// Validates shapes and derives the class set.
LabeledDataset make_dataset(Matrix features, std::vector<int> labels, FeatureLayout layout);
LabeledDataset select_rows(const LabeledDataset& data, std::span<const Eigen::Index> rows);

struct DatasetOptions {
  Real tau = 20;
  int spectrum_bins = 8;
  bool include_noise = false;  // keep 0-person sessions as a class
};

LabeledDataset build_dataset(std::span<const Session> sessions, std::span<const DetectorId> detector_subset,
                             const DatasetOptions& options = {});

// k-nearest neighbours ------------------------------------------------------

struct KnnParams {
  int neighbors = 5;
};

struct KnnModel {
  int neighbors = 5;
  Matrix train;  // standardized rows
  Vector mean;
  Vector scale;
  std::vector<int> labels;
  FeatureLayout layout;
  std::vector<int> class_set;
};

struct Neighbor {
  Eigen::Index index = 0;
  Real distance = 0;
};

KnnModel fit_knn(const LabeledDataset& data, const KnnParams& params = {});
Vector standardize(const KnnModel& model, const Eigen::Ref<const Vector>& x);
/// k closest training rows to an already standardized query, ordered by
/// (distance, index). Bounded heap with partial-distance early exit.
std::vector<Neighbor> nearest_neighbors(const KnnModel& model, const Eigen::Ref<const Vector>& query, int k);
int predict_knn(const KnnModel& model, const Eigen::Ref<const Vector>& x);

// CART decision tree ----------------------------------------------------------

struct TreeParams {
  std::optional<int> max_depth;  // unlimited when empty
  int min_leaf = 1;
};

struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    Real threshold = 0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    int label = 0;
  };
  std::vector<Node> nodes;
  FeatureLayout layout;
  std::vector<int> class_set;
};

DecisionTree fit_tree(const LabeledDataset& data, const TreeParams& params = {}, std::uint64_t seed = 0);
int predict_tree(const DecisionTree& tree, const Eigen::Ref<const Vector>& x);

// Random forest ---------------------------------------------------------------

struct ForestParams {
  int trees = 100;
  std::optional<int> max_depth;
  int min_leaf = 1;
  std::optional<int> max_features;  // default ceil(sqrt(d))
  bool bootstrap = true;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  FeatureLayout layout;
  std::vector<int> class_set;
};

RandomForest fit_forest(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed);
int predict_forest(const RandomForest& forest, const Eigen::Ref<const Vector>& x);

// Shared model surface ---------------------------------------------------------

using AlgorithmSpec = std::variant<KnnParams, TreeParams, ForestParams>;
using CountModel = std::variant<KnnModel, DecisionTree, RandomForest>;

std::string algorithm_name(const AlgorithmSpec& spec);
std::string model_kind(const CountModel& model);
/// "knn", "tree" or "forest" with default parameters.
AlgorithmSpec parse_algorithm(const std::string& name);

CountModel fit_count_model(const AlgorithmSpec& spec, const LabeledDataset& data, std::uint64_t seed);
int predict_count(const CountModel& model, const Eigen::Ref<const Vector>& x);
/// Throws LayoutMismatch when the vector's layout is not the model's.
int predict_count(const CountModel& model, const FeatureVector& fv);
const FeatureLayout& layout_of(const CountModel& model);
const std::vector<int>& class_set_of(const CountModel& model);

// Cross-validation ------------------------------------------------------------

using Predictor = std::function<int(const Eigen::Ref<const Vector>&)>;
using Learner = std::function<Predictor(const LabeledDataset& train, std::uint64_t seed)>;

struct FoldAssignment {
  std::vector<int> fold_of;
  bool stratified = true;
};

/// Classes are shuffled independently and dealt round-robin, so fold sizes and
/// per-class counts each differ by at most one. Falls back to a plain shuffle
/// when some class has fewer than k members.
FoldAssignment assign_folds(std::span<const int> labels, int k, std::uint64_t seed);

struct CvReport {
  int folds = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::vector<int> fold_of;
  std::vector<int> class_set;
  std::vector<Real> fold_accuracy;
  std::vector<Eigen::MatrixXi> confusion;  // rows truth, cols prediction, indexed by class_set
  Real mean_accuracy = 0;
};

CvReport cross_validate(const Learner& learner, const LabeledDataset& data, int k, std::uint64_t seed);
CvReport cross_validate(const AlgorithmSpec& spec, const LabeledDataset& data, int k, std::uint64_t seed);

struct SweepRow {
  std::string algorithm;
  int detectors = 0;
  Real mean_accuracy = 0;
  std::vector<Real> fold_accuracy;
};

struct SweepReport {
  std::vector<DetectorId> order;
  std::vector<SweepRow> rows;
};

/// For n = 1..D uses the first n detectors of `order`.
SweepReport detector_sweep(std::span<const Session> sessions, std::span<const AlgorithmSpec> specs,
                           std::span<const DetectorId> order, int k, std::uint64_t seed,
                           const DatasetOptions& options = {});

}  // namespace wifisense
