#include "metaselect/learners/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "metaselect/learners/forest.hpp"

namespace metaselect {

KnnModel fit_knn(const FeatureMatrix& x, std::span<const std::size_t> labels, std::size_t n_labels, std::size_t k,
                 bool standardize) {
  const std::size_t n = x.rows(), d = x.features();
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (k > n) throw std::invalid_argument("k = " + std::to_string(k) + " exceeds training size " + std::to_string(n));
  if (labels.size() != n) throw std::invalid_argument("label count differs from row count");

  KnnModel model;
  model.k = k;
  model.standardize = standardize;
  model.n_labels = n_labels;
  model.labels.assign(labels.begin(), labels.end());
  model.mean.assign(d, 0.0);
  model.stdev.assign(d, 1.0);
  if (standardize) {
    for (std::size_t f = 0; f < d; ++f) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += x.at(i, f);
      const double mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += (x.at(i, f) - mean) * (x.at(i, f) - mean);
      const double sd = std::sqrt(ss / static_cast<double>(n));
      model.mean[f] = mean;
      model.stdev[f] = sd > 0.0 ? sd : 1.0;
    }
  }
  model.points = FeatureMatrix(d);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) row[f] = (x.at(i, f) - model.mean[f]) / model.stdev[f];
    model.points.add_row(row);
  }
  return model;
}

std::vector<double> knn_votes(const KnnModel& model, std::span<const double> x) {
  const std::size_t d = model.points.features();
  if (x.size() != d) throw std::invalid_argument("query has wrong feature count");
  std::vector<double> q(d);
  for (std::size_t f = 0; f < d; ++f) q[f] = (x[f] - model.mean[f]) / model.stdev[f];

  std::vector<std::pair<double, std::size_t>> dist(model.points.rows());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto p = model.points.row(i);
    double s = 0.0;
    for (std::size_t f = 0; f < d; ++f) s += (p[f] - q[f]) * (p[f] - q[f]);
    dist[i] = {s, i};
  }
  const auto kth = dist.begin() + static_cast<std::ptrdiff_t>(model.k);
  std::nth_element(dist.begin(), kth - 1, dist.end());
  std::vector<double> votes(model.n_labels, 0.0);
  for (auto it = dist.begin(); it != kth; ++it) votes[model.labels[it->second]] += 1.0;
  for (double& v : votes) v /= static_cast<double>(model.k);
  return votes;
}

std::size_t predict_knn(const KnnModel& model, std::span<const double> x) { return argmax_first(knn_votes(model, x)); }

}  // namespace metaselect
