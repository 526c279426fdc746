#include "metaselect/learners/forest.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "metaselect/rng.hpp"

namespace metaselect {

ForestModel fit_random_forest(const FeatureMatrix& x, std::span<const std::size_t> labels, std::size_t n_classes,
                              const ForestParams& params, std::span<const double> class_weights) {
  const std::size_t n = x.rows();
  if (n == 0) throw std::invalid_argument("random forest needs at least one training row");
  if (labels.size() != n) throw std::invalid_argument("label count differs from row count");
  if (class_weights.size() != n_classes) throw std::invalid_argument("class weight vector does not match class count");
  if (params.n_estimators == 0) throw std::invalid_argument("n_estimators must be positive");

  ForestModel model;
  model.n_classes = n_classes;
  model.n_features = x.features();
  model.params = params;
  model.trees.resize(params.n_estimators);

  auto fit_one = [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, 2 * t));
    std::vector<double> weights(n, 0.0);
    for (std::size_t draw = 0; draw < n; ++draw) weights[rng.index(n)] += 1.0;
    for (std::size_t i = 0; i < n; ++i) weights[i] *= class_weights[labels[i]];
    TreeParams tp;
    tp.max_features = params.max_features;
    tp.seed = derive_seed(params.seed, 2 * t + 1);
    model.trees[t] = fit_classification_tree(x, labels, weights, n_classes, tp);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(params.n_estimators)));
  if (threads == 1) {
    for (std::size_t t = 0; t < params.n_estimators; ++t) fit_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t t; (t = next.fetch_add(1)) < params.n_estimators;) fit_one(t);
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return model;
}

std::vector<double> forest_probabilities(const ForestModel& model, std::span<const double> x) {
  std::vector<double> proba(model.n_classes, 0.0);
  for (const DecisionTree& tree : model.trees) {
    const std::vector<double>& counts = tree.leaf(x).value;
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0.0) continue;
    for (std::size_t c = 0; c < proba.size(); ++c) proba[c] += counts[c] / total;
  }
  const double sum = std::accumulate(proba.begin(), proba.end(), 0.0);
  if (sum > 0.0)
    for (double& p : proba) p /= sum;
  return proba;
}

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace metaselect
