#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metaselect/learners/tree.hpp"

namespace metaselect {

struct BoostingParams {
  std::size_t n_estimators = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t max_features = 0;  // 0: ceil(sqrt(d))
  std::uint64_t seed = 0;

  friend bool operator==(const BoostingParams&, const BoostingParams&) = default;
};

/// Multiclass softmax gradient boosting. Only classes present in the
/// training labels get score functions; the rest have probability 0.
struct GradientBoostingModel {
  std::vector<std::size_t> classes;            // label ids with a score function
  std::vector<double> initial_scores;          // log weighted priors, per entry of `classes`
  std::vector<std::vector<DecisionTree>> stages;  // [stage][class entry]
  std::size_t n_labels = 0;                    // size of the full label space
  std::size_t n_features = 0;
  BoostingParams params;
  std::vector<double> training_loss;           // weighted cross-entropy after each stage

  friend bool operator==(const GradientBoostingModel&, const GradientBoostingModel&) = default;
};

/// Each stage fits one regression tree per class to the residuals
/// (one-hot - softmax) and sets leaf values with a Newton step,
/// (K-1)/K * sum(w r) / sum(w |r| (1-|r|)). Class weights scale row gradients.
GradientBoostingModel fit_gradient_boosting(const FeatureMatrix& x, std::span<const std::size_t> labels,
                                            std::size_t n_labels, const BoostingParams& params,
                                            std::span<const double> class_weights);

/// Raw per-class scores, one per entry of model.classes.
std::vector<double> boosting_scores(const GradientBoostingModel& model, std::span<const double> x);

/// Probabilities over the full label space.
std::vector<double> boosting_probabilities(const GradientBoostingModel& model, std::span<const double> x);

std::vector<const DecisionTree*> boosting_trees(const GradientBoostingModel& model);

}  // namespace metaselect
