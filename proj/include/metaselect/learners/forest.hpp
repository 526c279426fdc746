#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metaselect/learners/tree.hpp"

namespace metaselect {

struct ForestParams {
  std::size_t n_estimators = 100;
  std::size_t max_features = 0;  // 0: ceil(sqrt(d))
  std::uint64_t seed = 0;
  unsigned threads = 1;          // trees are seeded per index, so any value gives the same forest
};

/// Bagged Gini trees grown to purity.
struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  ForestParams params;

  friend bool operator==(const ForestModel& a, const ForestModel& b) {
    return a.trees == b.trees && a.n_classes == b.n_classes && a.n_features == b.n_features;
  }
};

/// Each tree sees a bootstrap resample of the rows (same size, with
/// replacement); duplicate draws become integer weights, which multiply the
/// per-class weights.
ForestModel fit_random_forest(const FeatureMatrix& x, std::span<const std::size_t> labels, std::size_t n_classes,
                              const ForestParams& params, std::span<const double> class_weights);

/// Mean of the trees' normalized leaf distributions.
std::vector<double> forest_probabilities(const ForestModel& model, std::span<const double> x);

/// Index of the largest entry; the lowest index wins ties.
std::size_t argmax_first(std::span<const double> values);

}  // namespace metaselect
