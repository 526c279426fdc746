#include "metaselect/solve.hpp"

#include <unistd.h>

#include <sstream>

#include "metaselect/text.hpp"

namespace metaselect {

namespace fs = std::filesystem;

std::string_view to_string(NoSolutionPolicy policy) {
  return policy == NoSolutionPolicy::Report ? "report" : "fallback";
}

NoSolutionPolicy parse_no_solution_policy(std::string_view name) {
  if (name == "report") return NoSolutionPolicy::Report;
  if (name == "fallback") return NoSolutionPolicy::Fallback;
  throw std::invalid_argument("unknown no-solution policy '" + std::string(name) + "' (expected report or fallback)");
}

std::string_view to_string(ExitCondition condition) {
  switch (condition) {
    case ExitCondition::Completed: return "completed";
    case ExitCondition::Timeout: return "timeout";
    case ExitCondition::Crashed: return "crashed";
    case ExitCondition::Failed: return "failed";
    case ExitCondition::NoSolutionPredicted: return "no-solution-predicted";
  }
  return "?";
}

std::size_t budget_timestep(const TimestepGrid& grid, double budget_seconds, bool* clamped) {
  const auto j = grid.floor_index(budget_seconds);
  if (clamped) *clamped = !j.has_value();
  return j.value_or(0);
}

Choice choose(const TrainedModel& model, const Instance& inst, double budget_seconds) {
  Choice c;
  bool clamped = false;
  c.timestep = budget_timestep(model.grid, budget_seconds, &clamped);
  if (clamped)
    c.warnings.push_back("budget " + format_double(budget_seconds) + " s is below the first grid point " +
                         format_double(model.grid[0]) + " s; using timestep 0");
  c.features = append_timestep(extract(inst, model.schema), c.timestep, model.grid, model.encoding);
  c.prediction = model.predict(c.features);
  return c;
}

void check_portfolio(const TrainedModel& model, const PortfolioConfig& portfolio) {
  for (const std::string& s : model.vocabulary.solvers())
    if (!portfolio.find(s)) throw UnknownSolverError("model label '" + s + "' is not a solver of the portfolio");
}

std::vector<std::string> assignment_lines(std::string_view raw_log) {
  std::vector<std::string> out;
  for (std::string_view line : split_lines(raw_log)) {
    const std::size_t sp = line.find(' ');
    if (sp == std::string_view::npos) continue;
    std::string_view body = trim(line.substr(sp + 1));
    if (body.starts_with("o ")) out.clear();
    else if (body.starts_with("v ") || body == "v") out.emplace_back(body);
  }
  return out;
}

SolveOutcome solve(const fs::path& instance_path, double budget_seconds, const TrainedModel& model,
                   const PortfolioConfig& portfolio, const SolveOptions& options,
                   std::chrono::steady_clock::time_point start) {
  if (!(budget_seconds > 0.0)) throw std::invalid_argument("budget must be positive");
  check_portfolio(model, portfolio);
  auto since_start = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const Instance inst = parse_opb_file(instance_path.string());
  Choice c = choose(model, inst, budget_seconds);

  SolveOutcome out;
  out.timestep = c.timestep;
  out.warnings = std::move(c.warnings);
  out.predicted_label = model.vocabulary.name(c.prediction.label);

  std::string solver = out.predicted_label;
  if (c.prediction.label == model.vocabulary.no_solution()) {
    if (options.on_no_solution == NoSolutionPolicy::Report) {
      out.prep_ms = since_start() * 1000.0;
      out.exit = ExitCondition::NoSolutionPredicted;
      return out;
    }
    solver = options.fallback_solver.empty() ? portfolio.solvers.at(0).solver_id : options.fallback_solver;
  }
  const SolverAdapter* adapter = portfolio.find(solver);
  if (!adapter) throw UnknownSolverError("solver '" + solver + "' is not in the portfolio");

  const double prep = since_start();
  out.prep_ms = prep * 1000.0;
  const double remaining = budget_seconds - prep;
  if (!(remaining > 0.0))
    throw BudgetExhaustedError("budget of " + format_double(budget_seconds) + " s exhausted after " +
                               format_double(out.prep_ms) + " ms of preparation");

  out.chosen_solver = solver;
  const fs::path log_path = fs::temp_directory_path() / ("metaselect-solve-" + std::to_string(::getpid()) + ".log");
  ProcessResult proc = run_adapter(*adapter, instance_path, remaining, log_path, options.run);
  std::error_code ec;
  fs::remove(log_path, ec);
  out.solver_seconds = proc.wall_seconds;
  switch (proc.status) {
    case RunStatus::Ok: out.exit = ExitCondition::Completed; break;
    case RunStatus::Timeout: out.exit = ExitCondition::Timeout; break;
    case RunStatus::Crashed: out.exit = ExitCondition::Crashed; break;
    case RunStatus::Failed: out.exit = ExitCondition::Failed; break;
  }

  auto events = strict_improvements(parse_event_log(proc.raw_log, adapter->parse_mode, &out.warnings));
  if (!events.empty()) {
    out.incumbent = events.back().objective;
    out.incumbent_seconds = prep + events.back().seconds;
  }
  if (!options.assignment_path.empty()) {
    const auto lines = assignment_lines(proc.raw_log);
    if (!lines.empty()) {
      write_file(options.assignment_path, join(lines, "\n") + "\n");
      out.assignment_file = options.assignment_path;
    }
  }
  return out;
}

std::string format_outcome(const SolveOutcome& o) {
  std::ostringstream out;
  out << "chosen_solver = " << (o.chosen_solver.empty() ? "none" : o.chosen_solver) << '\n'
      << "predicted_label = " << o.predicted_label << '\n'
      << "timestep = " << o.timestep << '\n'
      << "prep_ms = " << format_double(o.prep_ms) << '\n'
      << "solver_seconds = " << format_double(o.solver_seconds) << '\n';
  out << "incumbent = ";
  if (o.incumbent) out << *o.incumbent;
  else out << "none";
  out << "\nincumbent_seconds = " << (o.incumbent_seconds ? format_double(*o.incumbent_seconds) : std::string("none"))
      << '\n'
      << "exit = " << to_string(o.exit) << '\n'
      << "assignment_file = " << (o.assignment_file.empty() ? std::string("none") : o.assignment_file.string()) << '\n';
  return out.str();
}

}  // namespace metaselect
