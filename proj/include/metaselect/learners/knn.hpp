#pragma once

#include <span>
#include <vector>

#include "metaselect/learners/tree.hpp"

namespace metaselect {

/// Euclidean k-nearest-neighbours vote over (optionally) standardized features.
struct KnnModel {
  std::size_t k = 1;
  bool standardize = true;
  std::vector<double> mean;   // per feature
  std::vector<double> stdev;  // population stdev; 1 for constant features
  FeatureMatrix points;       // stored after standardization
  std::vector<std::size_t> labels;
  std::size_t n_labels = 0;

  friend bool operator==(const KnnModel& a, const KnnModel& b) {
    return a.k == b.k && a.standardize == b.standardize && a.mean == b.mean && a.stdev == b.stdev &&
           a.labels == b.labels && a.n_labels == b.n_labels;
  }
};

KnnModel fit_knn(const FeatureMatrix& x, std::span<const std::size_t> labels, std::size_t n_labels, std::size_t k,
                 bool standardize = true);

/// Vote shares over the label space among the k nearest rows. Equal distances
/// favour the earlier training row.
std::vector<double> knn_votes(const KnnModel& model, std::span<const double> x);

/// Majority label; vote ties go to the lowest label id.
std::size_t predict_knn(const KnnModel& model, std::span<const double> x);

}  // namespace metaselect
