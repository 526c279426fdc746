#pragma once

// CART trees shared by the forest and boosting learners.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace metaselect {

/// Dense row-major feature matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t n_features) : n_features_(n_features) {}

  void add_row(std::span<const double> row);
  std::size_t rows() const { return n_features_ == 0 ? 0 : data_.size() / n_features_; }
  std::size_t features() const { return n_features_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_features_, n_features_}; }
  double at(std::size_t i, std::size_t f) const { return data_[i * n_features_ + f]; }

 private:
  std::size_t n_features_ = 0;
  std::vector<double> data_;
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double weight = 0.0;        // weighted samples reaching the node
  std::vector<double> value;  // leaf payload: class weights, or {prediction}

  bool is_leaf() const { return feature == kLeaf; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;      // nodes[0] is the root
  std::vector<double> importance;   // summed weighted impurity decrease per feature

  std::size_t leaf_index(std::span<const double> x) const;
  const TreeNode& leaf(std::span<const double> x) const { return nodes[leaf_index(x)]; }
  std::size_t depth() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeParams {
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t max_features = 0;          // 0 selects ceil(sqrt(d))
  std::uint64_t seed = 0;
};

std::size_t sqrt_features(std::size_t n_features);

/// Gini impurity of a weighted class distribution.
double gini(std::span<const double> class_weights);

/// Weighted Gini CART over the rows with positive weight. Leaves store
/// weighted class counts.
DecisionTree fit_classification_tree(const FeatureMatrix& x, std::span<const std::size_t> labels,
                                     std::span<const double> weights, std::size_t n_classes,
                                     const TreeParams& params);

/// Weighted least-squares CART. Leaves store the weighted mean target.
DecisionTree fit_regression_tree(const FeatureMatrix& x, std::span<const double> targets,
                                 std::span<const double> weights, const TreeParams& params);

/// Averages per-tree importance vectors and normalizes them to sum 1; all
/// zeros when no tree has a split.
std::vector<double> mean_decrease_impurity(std::span<const DecisionTree> trees, std::size_t n_features);

}  // namespace metaselect
