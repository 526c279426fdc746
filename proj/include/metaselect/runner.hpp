#pragma once

// Running solver adapters and recording their anytime behavior.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metaselect/grid.hpp"
#include "metaselect/opb.hpp"

namespace metaselect {

enum class ParseMode { EventStream, FinalOnly };

std::string_view to_string(ParseMode mode);
ParseMode parse_parse_mode(std::string_view name);

/// An external solver. The command template may use {instance}, {budget}
/// and {log}; tokens are split on whitespace and executed without a shell.
struct SolverAdapter {
  std::string solver_id;
  std::string command;
  ParseMode parse_mode = ParseMode::EventStream;
};

struct PortfolioConfig {
  std::vector<SolverAdapter> solvers;  // declaration order is the label order
  unsigned parallelism = 1;
  std::optional<std::size_t> grid_count;
  std::optional<double> horizon;
  std::optional<double> t_min;

  const SolverAdapter* find(std::string_view solver_id) const;
  std::vector<std::string> solver_ids() const;
};

/// INI-style text:
///
///   parallelism = 2
///   [solver rsat]
///   command = ./adapters/rsat.sh {instance} {budget}
///   parse_mode = event-stream
PortfolioConfig parse_portfolio_config(std::string_view text);
PortfolioConfig load_portfolio_config(const std::filesystem::path& path);

struct IncumbentEvent {
  double seconds = 0.0;
  BigInt objective;

  friend bool operator==(const IncumbentEvent&, const IncumbentEvent&) = default;
};

enum class RunStatus { Ok, Timeout, Crashed, Failed };

std::string_view to_string(RunStatus status);
RunStatus parse_run_status(std::string_view name);

struct Trajectory {
  std::string solver_id;
  std::string instance_id;
  std::vector<IncumbentEvent> events;         // strictly improving, time-sorted
  std::vector<std::optional<BigInt>> sampled;  // best at or before each grid point
  RunStatus status = RunStatus::Ok;

  /// Time of the event that produced sampled[j]; requires sampled[j].
  double achieved_at(std::size_t j) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Sorts by time and keeps strict improvements only.
std::vector<IncumbentEvent> strict_improvements(std::vector<IncumbentEvent> events);

/// Step-function sampling: entry j is the last improvement at or before grid[j].
std::vector<std::optional<BigInt>> sample_events(const std::vector<IncumbentEvent>& events,
                                                 const TimestepGrid& grid);

Trajectory make_trajectory(std::string solver_id, std::string instance_id, std::vector<IncumbentEvent> events,
                           const TimestepGrid& grid, RunStatus status = RunStatus::Ok);

/// Extracts events from a timestamped raw log ("<seconds> <stdout line>" per line).
/// Lines that are not `o <integer>` are ignored; malformed `o` lines are
/// reported through `warnings`.
std::vector<IncumbentEvent> parse_event_log(std::string_view raw_log, ParseMode mode,
                                            std::vector<std::string>* warnings = nullptr);

struct ProcessResult {
  std::string raw_log;  // "<seconds> <line>\n" for each stdout line
  double wall_seconds = 0.0;
  RunStatus status = RunStatus::Ok;
  int exit_code = 0;
};

struct RunOptions {
  double kill_grace_seconds = 1.0;
};

/// Spawns the adapter with the given budget and captures timestamped stdout.
/// SIGTERM at the budget, SIGKILL after the grace period. Throws
/// std::runtime_error if the executable cannot be found.
ProcessResult run_adapter(const SolverAdapter& adapter, const std::filesystem::path& instance, double budget_seconds,
                          const std::filesystem::path& log_path, const RunOptions& options = {});

Trajectory run_solver(const SolverAdapter& adapter, const std::filesystem::path& instance, const TimestepGrid& grid,
                      std::string* raw_log = nullptr, const RunOptions& options = {});

struct InstanceRecord {
  std::string instance_id;
  std::string benchmark_id;
  std::filesystem::path path;

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

/// Instance ids are file stems (".opb" and compression suffixes stripped).
/// The benchmark defaults to the parent directory name.
std::string instance_id_from_path(const std::filesystem::path& path);

/// One instance per line: `path` or `benchmark path`. Blank lines and `#` comments skipped.
std::vector<InstanceRecord> parse_instance_list(std::string_view text,
                                                const std::filesystem::path& base_dir = {});

/// Anytime recordings for a portfolio over a set of instances.
class RunArchive {
 public:
  RunArchive(TimestepGrid grid, std::vector<std::string> solver_ids, std::vector<InstanceRecord> instances);

  const TimestepGrid& grid() const { return grid_; }
  const std::vector<std::string>& solver_ids() const { return solver_ids_; }
  const std::vector<InstanceRecord>& instances() const { return instances_; }

  void put(Trajectory trajectory);
  const Trajectory* find(std::string_view instance_id, std::string_view solver_id) const;
  const Trajectory& at(std::string_view instance_id, std::string_view solver_id) const;
  std::size_t trajectory_count() const { return trajectories_.size(); }

 private:
  TimestepGrid grid_;
  std::vector<std::string> solver_ids_;
  std::vector<InstanceRecord> instances_;
  std::map<std::pair<std::string, std::string>, Trajectory, std::less<>> trajectories_;
};

// On-disk layout:
//   <root>/archive.meta                       grid + solver order
//   <root>/instances.tsv                      instance_id, benchmark_id, path
//   <root>/<instance>/<solver>.traj           metadata, events, sampled record
//   <root>/<instance>/<solver>.log            raw timestamped stdout
std::string format_trajectory(const Trajectory& t, const TimestepGrid& grid);
Trajectory parse_trajectory(std::string_view text, const TimestepGrid& grid);

void write_archive_header(const std::filesystem::path& root, const RunArchive& archive);
void write_trajectory_file(const std::filesystem::path& root, const Trajectory& t, const TimestepGrid& grid,
                           std::string_view raw_log = {});
void write_archive(const std::filesystem::path& root, const RunArchive& archive);
RunArchive load_archive(const std::filesystem::path& root);

struct PortfolioRunSummary {
  std::size_t executed = 0;
  std::size_t skipped = 0;  // already recorded
  std::size_t failed = 0;
};

/// Runs every (solver, instance) pair not yet recorded under `root`, with up to
/// `parallelism` concurrent child processes. Trajectory files are written
/// atomically as each pair finishes, so an interrupted run can be resumed.
PortfolioRunSummary run_portfolio(const std::vector<SolverAdapter>& adapters,
                                  const std::vector<InstanceRecord>& instances, const TimestepGrid& grid,
                                  unsigned parallelism, const std::filesystem::path& root,
                                  const RunOptions& options = {});

}  // namespace metaselect
