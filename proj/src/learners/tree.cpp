#include "metaselect/learners/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "metaselect/rng.hpp"

namespace metaselect {

void FeatureMatrix::add_row(std::span<const double> row) {
  if (row.size() != n_features_)
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " features, expected " +
                                std::to_string(n_features_));
  data_.insert(data_.end(), row.begin(), row.end());
}

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
  std::size_t n = 0;
  while (!nodes[n].is_leaf()) {
    const TreeNode& node = nodes[n];
    n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return n;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    deepest = std::max(deepest, level[n]);
    if (!nodes[n].is_leaf()) level[nodes[n].left] = level[nodes[n].right] = level[n] + 1;
  }
  return deepest;
}

std::size_t sqrt_features(std::size_t n_features) {
  auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_features, 1));
}

double gini(std::span<const double> class_weights) {
  const double total = std::accumulate(class_weights.begin(), class_weights.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double w : class_weights) sum_sq += (w / total) * (w / total);
  return 1.0 - sum_sq;
}

namespace {

// Weighted impurity "sums": W * impurity, so that a split's decrease is
// parent - left - right.
struct GiniCriterion {
  std::span<const std::size_t> labels;
  std::span<const double> weights;
  std::size_t n_classes;

  struct Stats {
    std::vector<double> counts;
    double total = 0.0;
  };

  Stats empty() const { return {std::vector<double>(n_classes, 0.0), 0.0}; }
  void add(Stats& s, std::uint32_t i) const {
    s.counts[labels[i]] += weights[i];
    s.total += weights[i];
  }
  static double impurity_sum(const Stats& s) {
    if (s.total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double c : s.counts) sum_sq += c * c;
    return s.total - sum_sq / s.total;
  }
  static double impurity_sum_diff(const Stats& parent, const Stats& left) {
    double total = parent.total - left.total;
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c = 0; c < parent.counts.size(); ++c) {
      double v = parent.counts[c] - left.counts[c];
      sum_sq += v * v;
    }
    return total - sum_sq / total;
  }
  static bool pure(const Stats& s) {
    return std::count_if(s.counts.begin(), s.counts.end(), [](double c) { return c > 0.0; }) <= 1;
  }
  static std::vector<double> leaf_value(const Stats& s) { return s.counts; }
};

struct SquaredErrorCriterion {
  std::span<const double> targets;
  std::span<const double> weights;

  struct Stats {
    double total = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
  };

  Stats empty() const { return {}; }
  void add(Stats& s, std::uint32_t i) const {
    const double w = weights[i], y = targets[i];
    s.total += w;
    s.sum += w * y;
    s.sum_sq += w * y * y;
  }
  static double impurity_sum(const Stats& s) {
    if (s.total <= 0.0) return 0.0;
    return std::max(0.0, s.sum_sq - s.sum * s.sum / s.total);
  }
  static double impurity_sum_diff(const Stats& parent, const Stats& left) {
    return impurity_sum({parent.total - left.total, parent.sum - left.sum, parent.sum_sq - left.sum_sq});
  }
  static bool pure(const Stats& s) { return impurity_sum(s) <= 1e-14 * std::max(1.0, s.sum_sq); }
  static std::vector<double> leaf_value(const Stats& s) { return {s.total > 0.0 ? s.sum / s.total : 0.0}; }
};

template <typename Criterion>
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const double> weights, Criterion criterion, const TreeParams& params)
      : x_(x), criterion_(std::move(criterion)), params_(params), rng_(params.seed) {
    for (std::size_t i = 0; i < x.rows(); ++i)
      if (weights[i] > 0.0) samples_.push_back(static_cast<std::uint32_t>(i));
    if (samples_.empty()) throw std::invalid_argument("cannot fit a tree without weighted rows");
    max_features_ = params.max_features == 0 ? sqrt_features(x.features()) : std::min(params.max_features, x.features());
    features_.resize(x.features());
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  DecisionTree build() {
    tree_.importance.assign(x_.features(), 0.0);
    tree_.nodes.emplace_back();
    struct Task {
      std::uint32_t node;
      std::size_t begin, end, depth;
    };
    std::vector<Task> stack{{0, 0, samples_.size(), 0}};
    while (!stack.empty()) {
      Task task = stack.back();
      stack.pop_back();

      auto stats = criterion_.empty();
      for (std::size_t i = task.begin; i < task.end; ++i) criterion_.add(stats, samples_[i]);
      tree_.nodes[task.node].weight = stats.total;

      std::optional<Split> split;
      const bool depth_left = !params_.max_depth || task.depth < *params_.max_depth;
      if (depth_left && task.end - task.begin > 1 && !Criterion::pure(stats)) split = best_split(task.begin, task.end, stats);
      if (!split) {
        tree_.nodes[task.node].value = Criterion::leaf_value(stats);
        continue;
      }
      auto mid = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                samples_.begin() + static_cast<std::ptrdiff_t>(task.end),
                                [&](std::uint32_t i) { return x_.at(i, split->feature) <= split->threshold; });
      const std::size_t cut = static_cast<std::size_t>(mid - samples_.begin());
      const auto left = static_cast<std::uint32_t>(tree_.nodes.size());
      tree_.nodes.emplace_back();
      tree_.nodes.emplace_back();
      TreeNode& node = tree_.nodes[task.node];
      node.feature = static_cast<std::int32_t>(split->feature);
      node.threshold = split->threshold;
      node.left = left;
      node.right = left + 1;
      tree_.importance[split->feature] += split->gain;
      stack.push_back({left + 1, cut, task.end, task.depth + 1});
      stack.push_back({left, task.begin, cut, task.depth + 1});
    }
    return std::move(tree_);
  }

 private:
  struct Split {
    std::size_t feature;
    double threshold;
    double gain;
  };

  std::optional<Split> best_split(std::size_t begin, std::size_t end, const typename Criterion::Stats& parent) {
    // partial Fisher-Yates: the first max_features_ entries are the sample
    for (std::size_t k = 0; k < max_features_; ++k) std::swap(features_[k], features_[k + rng_.index(features_.size() - k)]);

    const double parent_impurity = Criterion::impurity_sum(parent);
    std::optional<Split> best;
    for (std::size_t k = 0; k < max_features_; ++k) {
      const std::size_t f = features_[k];
      sorted_.clear();
      for (std::size_t i = begin; i < end; ++i) sorted_.emplace_back(x_.at(samples_[i], f), samples_[i]);
      std::sort(sorted_.begin(), sorted_.end());
      if (sorted_.front().first == sorted_.back().first) continue;
      auto left = criterion_.empty();
      for (std::size_t i = 0; i + 1 < sorted_.size(); ++i) {
        criterion_.add(left, sorted_[i].second);
        const double v = sorted_[i].first, next = sorted_[i + 1].first;
        if (v == next) continue;
        const double gain =
            parent_impurity - Criterion::impurity_sum(left) - Criterion::impurity_sum_diff(parent, left);
        if (!best || gain > best->gain) {
          double threshold = v + (next - v) / 2.0;
          if (!(threshold < next)) threshold = v;
          best = Split{f, threshold, gain};
        }
      }
    }
    if (best && best->gain > 1e-12 * parent_impurity && best->gain > 0.0) return best;
    return std::nullopt;
  }

  const FeatureMatrix& x_;
  Criterion criterion_;
  TreeParams params_;
  Rng rng_;
  std::size_t max_features_ = 0;
  std::vector<std::uint32_t> samples_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, std::uint32_t>> sorted_;
  DecisionTree tree_;
};

void check_inputs(const FeatureMatrix& x, std::size_t n_targets, std::size_t n_weights) {
  if (x.rows() == 0) throw std::invalid_argument("cannot fit a tree on an empty training set");
  if (n_targets != x.rows() || n_weights != x.rows())
    throw std::invalid_argument("feature rows, targets and weights differ in length");
}

}  // namespace

DecisionTree fit_classification_tree(const FeatureMatrix& x, std::span<const std::size_t> labels,
                                     std::span<const double> weights, std::size_t n_classes,
                                     const TreeParams& params) {
  check_inputs(x, labels.size(), weights.size());
  for (std::size_t l : labels)
    if (l >= n_classes) throw std::invalid_argument("label outside class range");
  return TreeBuilder<GiniCriterion>(x, weights, GiniCriterion{labels, weights, n_classes}, params).build();
}

DecisionTree fit_regression_tree(const FeatureMatrix& x, std::span<const double> targets,
                                 std::span<const double> weights, const TreeParams& params) {
  check_inputs(x, targets.size(), weights.size());
  return TreeBuilder<SquaredErrorCriterion>(x, weights, SquaredErrorCriterion{targets, weights}, params).build();
}

std::vector<double> mean_decrease_impurity(std::span<const DecisionTree> trees, std::size_t n_features) {
  std::vector<double> total(n_features, 0.0);
  if (trees.empty()) return total;
  for (const DecisionTree& t : trees)
    for (std::size_t f = 0; f < n_features && f < t.importance.size(); ++f) total[f] += t.importance[f];
  for (double& v : total) v /= static_cast<double>(trees.size());
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  if (sum > 0.0)
    for (double& v : total) v /= sum;
  return total;
}

}  // namespace metaselect
