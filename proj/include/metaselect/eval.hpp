#pragma once

// Anytime selector evaluation: normalized cumulative scores against the
// single-best (SBS) and virtual-best (VBS) solvers.

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaselect/dataset.hpp"
#include "metaselect/learners/model.hpp"
#include "metaselect/runner.hpp"

namespace metaselect {

/// Extremes of every feasible objective any solver reported on the instance.
struct InstanceBounds {
  BigInt o_min;
  BigInt o_max;
  bool defined = false;
};

InstanceBounds instance_bounds(const RunArchive& archive, std::string_view instance_id);

/// 0 when o == o_min == o_max, 2 when o is undefined, otherwise
/// (o - o_min) / (o_max - o_min). Requires bounds.defined.
double normalize(const std::optional<BigInt>& o, const InstanceBounds& bounds);

struct EvalPair {
  std::string instance_id;
  std::size_t timestep = 0;

  friend auto operator<=>(const EvalPair&, const EvalPair&) = default;
  friend bool operator==(const EvalPair&, const EvalPair&) = default;
};

/// Objective value a policy holds at each pair (nullopt = no solution).
using PolicyValues = std::map<EvalPair, std::optional<BigInt>>;
using BoundsTable = std::map<std::string, InstanceBounds, std::less<>>;

BoundsTable bounds_table(const RunArchive& archive, std::span<const std::string> instance_ids);

/// Pairs of the given instances at which at least one solver is feasible.
std::vector<EvalPair> evaluated_pairs(const RunArchive& archive, std::span<const std::string> instance_ids);

/// Sum of normalized values over `pairs`. Throws if the policy misses a pair.
double cumulative_metric(const PolicyValues& policy, std::span<const EvalPair> pairs, const BoundsTable& bounds);

class DegeneratePortfolioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (m_ms - m_VBS) / (m_SBS - m_VBS). Throws DegeneratePortfolioError unless m_SBS > m_VBS.
double m_hat(double m_ms, double m_sbs, double m_vbs);

PolicyValues solver_policy(const RunArchive& archive, std::string_view solver_id, std::span<const EvalPair> pairs);
PolicyValues vbs_policy(const RunArchive& archive, std::span<const EvalPair> pairs);

/// Values of a selector that picks `choice(pair)` (a vocabulary label) after
/// spending `overhead(pair)` seconds: the chosen solver's incumbent at the
/// largest grid point t_j with t_j + overhead <= t. NO_SOLUTION and overhead
/// past the first grid point give no value.
PolicyValues selector_policy(const RunArchive& archive, std::span<const EvalPair> pairs,
                             const std::function<std::size_t(const EvalPair&)>& choice,
                             const std::function<double(const EvalPair&)>& overhead);

struct Breakdown {
  std::size_t best_found = 0;
  std::size_t non_best = 0;
  std::size_t none = 0;

  std::size_t total() const { return best_found + non_best + none; }
  friend bool operator==(const Breakdown&, const Breakdown&) = default;
};

/// Classifies the policy's value at each pair against the best value any
/// solver holds there.
Breakdown sbs_breakdown(const PolicyValues& policy, const RunArchive& archive, std::span<const EvalPair> pairs);

struct EvalOptions {
  bool overhead = false;              // which m-hat is the headline figure
  std::optional<std::string> sbs;     // pinned single-best solver; automatic when empty
};

struct TimestepScore {
  std::size_t timestep = 0;
  std::size_t pairs = 0;
  double m_hat = 0.0;           // NaN when SBS and VBS coincide at this timestep
  double m_hat_overhead = 0.0;
};

struct EvalReport {
  std::vector<std::string> labels;      // vocabulary names
  std::vector<double> m_solver;         // per portfolio solver
  std::string sbs;
  double m_sbs = 0.0;
  double m_vbs = 0.0;
  double m_ms = 0.0;
  double m_ms_overhead = 0.0;
  double m_hat_no_overhead = 0.0;
  double m_hat_overhead = 0.0;
  double m_hat = 0.0;                   // headline, per EvalOptions::overhead
  bool overhead = false;
  std::size_t pair_count = 0;
  std::size_t test_rows = 0;
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true label][predicted label]
  Breakdown ms_breakdown;
  Breakdown ms_overhead_breakdown;
  Breakdown sbs_breakdown;
  Breakdown vbs_breakdown;
  std::vector<TimestepScore> per_timestep;
  double mean_overhead_seconds = 0.0;
};

/// Scores given predictions for the dataset's test rows. `predictions` and
/// `overhead_seconds` are indexed like ds.rows_in(Split::Test).
EvalReport evaluate_predictions(const RunArchive& archive, const LabeledDataset& ds,
                                std::span<const std::size_t> predictions, std::span<const double> overhead_seconds,
                                const EvalOptions& options);

/// Runs the model on every test row, timing each prediction; the overhead of a
/// row is the instance's recorded preparation time plus that prediction time.
EvalReport evaluate_selector(const TrainedModel& model, const RunArchive& archive, const LabeledDataset& ds,
                             const EvalOptions& options);

std::string format_report(const EvalReport& report);
std::string confusion_csv(const EvalReport& report);
std::string timestep_series_csv(const EvalReport& report);
std::string breakdown_csv(const EvalReport& report);

}  // namespace metaselect
