#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metaselect/opb.hpp"

namespace metaselect {

class TimestepGrid;

/// Feature layouts. Column order is fixed; see feature_names().
enum class FeatureSchema { Basic, Nonlinear, Linear };

/// How the timestep column is encoded: the grid index or the grid point in seconds.
enum class TimestepEncoding { Index, Seconds };

inline constexpr int kFeatureSchemaVersion = 1;

std::string_view to_string(FeatureSchema schema);
FeatureSchema parse_feature_schema(std::string_view name);
std::string_view to_string(TimestepEncoding encoding);
TimestepEncoding parse_timestep_encoding(std::string_view name);

/// Number of instance features (without the timestep column): 2, 14 or 9.
std::size_t feature_count(FeatureSchema schema);

/// Column names, optionally followed by "timestep".
std::vector<std::string> feature_names(FeatureSchema schema, bool with_timestep);

struct FeatureVector {
  std::vector<double> values;
  FeatureSchema schema = FeatureSchema::Nonlinear;
  bool has_timestep = false;

  std::size_t expected_size() const { return feature_count(schema) + (has_timestep ? 1 : 0); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Raised for instances the feature stage cannot characterize (no objective).
class MissingObjectiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fourteen features, in this order:
//   n_constraints, n_variables, nonlinear,
//   c_terms_1, c_terms_2, c_terms_3, c_terms_4plus   (share of constraints by term count)
//   degree_1, degree_2, degree_3, degree_4plus       (share of all terms by literal count)
//   obj_size                                         (objective terms / all terms)
//   pos_constr, pos_obj                              (share of positive coefficients)
// Empty denominators give 0.
FeatureVector extract_nonlinear(const Instance& inst);

/// Linearizes first, then drops the nonlinear flag and the degree shares.
FeatureVector extract_linear(const Instance& inst);

/// n_constraints, n_variables. Never linearizes and does not need an objective.
FeatureVector extract_basic(const Instance& inst);

FeatureVector extract(const Instance& inst, FeatureSchema schema);

FeatureVector append_timestep(FeatureVector fv, std::size_t timestep_index, const TimestepGrid& grid,
                              TimestepEncoding encoding = TimestepEncoding::Index);

double encode_timestep(std::size_t timestep_index, const TimestepGrid& grid, TimestepEncoding encoding);

struct TimedFeatures {
  FeatureVector features;
  double seconds = 0.0;  // wall time of (linearize +) extraction
};

TimedFeatures extract_timed(const Instance& inst, FeatureSchema schema);

}  // namespace metaselect
