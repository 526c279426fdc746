#pragma once

// The runtime meta-solver: predict a solver for an instance and budget, then run it.

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaselect/learners/model.hpp"
#include "metaselect/runner.hpp"

namespace metaselect {

class BudgetExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NoSolutionPolicy { Report, Fallback };

std::string_view to_string(NoSolutionPolicy policy);
NoSolutionPolicy parse_no_solution_policy(std::string_view name);  // "report", "fallback"

/// Grid index for a budget: largest grid point <= budget, or 0 when the
/// budget is below the first point (`clamped` is then set).
std::size_t budget_timestep(const TimestepGrid& grid, double budget_seconds, bool* clamped = nullptr);

struct Choice {
  FeatureVector features;  // with the timestep column
  std::size_t timestep = 0;
  Prediction prediction;
  std::vector<std::string> warnings;
};

/// Feature extraction and prediction only; deterministic for a given model.
Choice choose(const TrainedModel& model, const Instance& inst, double budget_seconds);

/// Throws UnknownSolverError if a model label names a solver the portfolio lacks.
void check_portfolio(const TrainedModel& model, const PortfolioConfig& portfolio);

struct SolveOptions {
  NoSolutionPolicy on_no_solution = NoSolutionPolicy::Report;
  std::string fallback_solver;                // empty: the first portfolio solver
  std::filesystem::path assignment_path;      // empty: no assignment file
  RunOptions run;
};

enum class ExitCondition { Completed, Timeout, Crashed, Failed, NoSolutionPredicted };

std::string_view to_string(ExitCondition condition);

struct SolveOutcome {
  std::string predicted_label;
  std::string chosen_solver;                  // empty when nothing was launched
  std::size_t timestep = 0;
  double prep_ms = 0.0;
  double solver_seconds = 0.0;
  std::optional<BigInt> incumbent;
  std::optional<double> incumbent_seconds;    // since the start of solve
  ExitCondition exit = ExitCondition::Completed;
  std::filesystem::path assignment_file;      // empty when no assignment was printed
  std::vector<std::string> warnings;
};

/// Runs the full pipeline. Preparation time is measured from `start` and
/// deducted from the budget before the chosen solver is launched.
SolveOutcome solve(const std::filesystem::path& instance_path, double budget_seconds, const TrainedModel& model,
                   const PortfolioConfig& portfolio, const SolveOptions& options = {},
                   std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now());

/// Collects the `v` lines printed after the last incumbent line of a raw log.
std::vector<std::string> assignment_lines(std::string_view raw_log);

/// `key = value` record of the outcome.
std::string format_outcome(const SolveOutcome& outcome);

}  // namespace metaselect
