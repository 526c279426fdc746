#pragma once

// A fitted selector: learner + feature schema + label vocabulary + grid.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "metaselect/dataset.hpp"
#include "metaselect/features.hpp"
#include "metaselect/learners/boosting.hpp"
#include "metaselect/learners/forest.hpp"
#include "metaselect/learners/knn.hpp"

namespace metaselect {

enum class ModelFamily { RandomForest, GradientBoosting, Knn };
enum class ClassWeightMode { Uniform, InverseFrequency };

std::string_view to_string(ModelFamily family);
ModelFamily parse_model_family(std::string_view name);  // "rf", "gb", "knn"
std::string_view to_string(ClassWeightMode mode);
ClassWeightMode parse_class_weight_mode(std::string_view name);

/// uniform: all 1. inverse-frequency: N / (K * count(c)) over the K classes
/// present; absent classes get 1.
std::vector<double> class_weights(std::span<const std::size_t> labels, std::size_t n_labels, ClassWeightMode mode);

struct LearnerParams {
  ModelFamily family = ModelFamily::RandomForest;
  std::size_t n_estimators = 100;
  double learning_rate = 0.1;  // gb
  std::size_t max_depth = 3;   // gb
  std::size_t n_neighbors = 21;
  bool standardize = true;     // knn

  friend bool operator==(const LearnerParams&, const LearnerParams&) = default;
};

/// Hyperparameters of the nine named variants (RF/GB/KNN x basic/nonlinear/linear).
LearnerParams variant_params(ModelFamily family, FeatureSchema schema);

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;  // over the vocabulary
};

class SchemaMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainedModel {
  static constexpr int kFormatVersion = 1;

  FeatureSchema schema = FeatureSchema::Nonlinear;
  TimestepEncoding encoding = TimestepEncoding::Index;
  TimestepGrid grid;
  LabelVocabulary vocabulary;
  LearnerParams params;
  std::uint64_t seed = 0;
  ClassWeightMode weight_mode = ClassWeightMode::InverseFrequency;
  std::vector<double> weights;  // per vocabulary label
  std::variant<ForestModel, GradientBoostingModel, KnnModel> learner;

  std::size_t input_size() const { return feature_count(schema) + 1; }
  std::string variant_name() const;  // e.g. "RF_nonlinear"

  /// Rejects vectors of another schema or without the timestep column.
  Prediction predict(const FeatureVector& fv) const;
  /// Raw row in dataset layout (schema features followed by the timestep column).
  Prediction predict_row(std::span<const double> row) const;

  /// Normalized mean decrease in impurity; empty for KNN.
  std::vector<double> importances() const;

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

struct TrainOptions {
  LearnerParams params;
  ClassWeightMode weight_mode = ClassWeightMode::InverseFrequency;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Fits on the dataset's train rows (all rows when no split is assigned).
TrainedModel train_model(const LabeledDataset& ds, const TrainOptions& options);

std::string format_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

/// Parameters as `key,value` lines followed by a `feature,mdi` table.
std::string describe_model(const TrainedModel& model);

}  // namespace metaselect
