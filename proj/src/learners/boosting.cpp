#include "metaselect/learners/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "metaselect/rng.hpp"

namespace metaselect {

namespace {

void softmax_in_place(std::vector<double>& scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

double weighted_cross_entropy(const std::vector<std::vector<double>>& scores, std::span<const std::size_t> class_of,
                              std::span<const double> weights) {
  double loss = 0.0, total = 0.0;
  std::vector<double> p;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p = scores[i];
    softmax_in_place(p);
    loss -= weights[i] * std::log(std::max(p[class_of[i]], 1e-300));
    total += weights[i];
  }
  return total > 0.0 ? loss / total : 0.0;
}

}  // namespace

GradientBoostingModel fit_gradient_boosting(const FeatureMatrix& x, std::span<const std::size_t> labels,
                                            std::size_t n_labels, const BoostingParams& params,
                                            std::span<const double> class_weights) {
  const std::size_t n = x.rows();
  if (n == 0) throw std::invalid_argument("gradient boosting needs training rows");
  if (labels.size() != n) throw std::invalid_argument("label count differs from row count");
  if (class_weights.size() != n_labels) throw std::invalid_argument("class weight vector does not match label count");
  if (params.learning_rate < 0.0) throw std::invalid_argument("learning rate must be non-negative");

  GradientBoostingModel model;
  model.n_labels = n_labels;
  model.n_features = x.features();
  model.params = params;

  std::vector<double> prior(n_labels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= n_labels) throw std::invalid_argument("label outside label space");
    prior[labels[i]] += class_weights[labels[i]];
  }
  std::vector<std::size_t> entry_of(n_labels, SIZE_MAX);
  double prior_total = 0.0;
  for (std::size_t c = 0; c < n_labels; ++c)
    if (prior[c] > 0.0) {
      entry_of[c] = model.classes.size();
      model.classes.push_back(c);
      prior_total += prior[c];
    }
  if (model.classes.size() < 2) throw std::invalid_argument("gradient boosting needs at least two classes in the training data");
  for (std::size_t c : model.classes) model.initial_scores.push_back(std::log(prior[c] / prior_total));

  const std::size_t k_classes = model.classes.size();
  std::vector<std::size_t> class_of(n);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    class_of[i] = entry_of[labels[i]];
    weights[i] = class_weights[labels[i]];
  }

  std::vector<std::vector<double>> scores(n, model.initial_scores);
  std::vector<std::vector<double>> proba(n);
  std::vector<double> residual(n);
  const double newton_scale = static_cast<double>(k_classes - 1) / static_cast<double>(k_classes);

  for (std::size_t stage = 0; stage < params.n_estimators; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      proba[i] = scores[i];
      softmax_in_place(proba[i]);
    }
    std::vector<DecisionTree> trees(k_classes);
    for (std::size_t k = 0; k < k_classes; ++k) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = (class_of[i] == k ? 1.0 : 0.0) - proba[i][k];
      TreeParams tp;
      tp.max_depth = params.max_depth;
      tp.max_features = params.max_features;
      tp.seed = derive_seed(params.seed, stage * k_classes + k);
      DecisionTree tree = fit_regression_tree(x, residual, weights, tp);

      std::vector<double> numerator(tree.nodes.size(), 0.0), denominator(tree.nodes.size(), 0.0);
      std::vector<std::size_t> leaf_of(n);
      for (std::size_t i = 0; i < n; ++i) {
        leaf_of[i] = tree.leaf_index(x.row(i));
        const double r = residual[i], a = std::abs(r);
        numerator[leaf_of[i]] += weights[i] * r;
        denominator[leaf_of[i]] += weights[i] * a * (1.0 - a);
      }
      for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
        if (!tree.nodes[node].is_leaf()) continue;
        const double gamma = denominator[node] < 1e-150 ? 0.0 : newton_scale * numerator[node] / denominator[node];
        tree.nodes[node].value = {gamma};
      }
      for (std::size_t i = 0; i < n; ++i) scores[i][k] += params.learning_rate * tree.nodes[leaf_of[i]].value[0];
      trees[k] = std::move(tree);
    }
    model.stages.push_back(std::move(trees));
    model.training_loss.push_back(weighted_cross_entropy(scores, class_of, weights));
  }
  return model;
}

std::vector<double> boosting_scores(const GradientBoostingModel& model, std::span<const double> x) {
  std::vector<double> scores = model.initial_scores;
  for (const auto& stage : model.stages)
    for (std::size_t k = 0; k < stage.size(); ++k) scores[k] += model.params.learning_rate * stage[k].leaf(x).value[0];
  return scores;
}

std::vector<double> boosting_probabilities(const GradientBoostingModel& model, std::span<const double> x) {
  std::vector<double> p = boosting_scores(model, x);
  softmax_in_place(p);
  std::vector<double> full(model.n_labels, 0.0);
  for (std::size_t k = 0; k < model.classes.size(); ++k) full[model.classes[k]] = p[k];
  return full;
}

std::vector<const DecisionTree*> boosting_trees(const GradientBoostingModel& model) {
  std::vector<const DecisionTree*> out;
  for (const auto& stage : model.stages)
    for (const DecisionTree& t : stage) out.push_back(&t);
  return out;
}

}  // namespace metaselect
