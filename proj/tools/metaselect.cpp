// metaselect: anytime solver selection for pseudo-Boolean optimization.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "metaselect/dataset.hpp"
#include "metaselect/eval.hpp"
#include "metaselect/features.hpp"
#include "metaselect/learners/model.hpp"
#include "metaselect/opb.hpp"
#include "metaselect/runner.hpp"
#include "metaselect/solve.hpp"
#include "metaselect/text.hpp"

namespace fs = std::filesystem;
using namespace metaselect;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2, kNoSolutionExit = 3, kBudget = 4 };

std::string g_command = "metaselect";

void diagnostic(std::string_view level, std::string_view kind, std::string_view message,
                nlohmann::json extra = nlohmann::json::object()) {
  extra["level"] = level;
  extra["command"] = g_command;
  extra["kind"] = kind;
  extra["message"] = message;
  std::cerr << extra.dump() << '\n';
}

void warn(std::string_view message) { diagnostic("warning", "warning", message); }

struct Globals {
  std::optional<std::size_t> grid_count;
  std::optional<double> horizon;
  std::optional<double> t_min;
  std::uint64_t seed = 0;
  unsigned parallelism = 0;
  bool overhead = false;
  std::string sbs = "auto";
  std::string class_weights = "inverse-frequency";
};

TimestepGrid grid_for(const Globals& g, const PortfolioConfig* config) {
  auto pick = [](auto flag, auto cfg, auto fallback) { return flag ? *flag : cfg ? *cfg : fallback; };
  return TimestepGrid(pick(g.grid_count, config ? config->grid_count : std::nullopt, TimestepGrid::kDefaultCount),
                      pick(g.horizon, config ? config->horizon : std::nullopt, 3600.0),
                      pick(g.t_min, config ? config->t_min : std::nullopt, 0.01));
}

std::string portfolio_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("METASELECT_PORTFOLIO"); env && *env) return env;
  throw CLI::ValidationError("--config", "no portfolio config given and METASELECT_PORTFOLIO is unset");
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") std::cout << text;
  else write_file(output, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anytime algorithm selection for pseudo-Boolean optimization solvers"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--grid-count", g.grid_count, "Number of timestep grid points")->check(CLI::PositiveNumber);
  app.add_option("--horizon", g.horizon, "Time horizon in seconds")->check(CLI::PositiveNumber);
  app.add_option("--t-min", g.t_min, "First grid point in seconds")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--parallelism", g.parallelism, "Concurrent solver runs / training threads");
  app.add_flag("--overhead,!--no-overhead", g.overhead, "Headline m-hat with feature and prediction overhead");
  app.add_option("--sbs", g.sbs, "Single best solver id, or auto");
  app.add_option("--class-weights", g.class_weights, "Class weighting")
      ->check(CLI::IsMember({"uniform", "inverse-frequency"}));

  // parse
  auto* parse = app.add_subcommand("parse", "Validate an OPB file and print its canonical form");
  std::string parse_input, parse_output;
  bool parse_linearize = false;
  parse->add_option("instance", parse_input, "OPB file")->required()->check(CLI::ExistingFile);
  parse->add_option("-o,--output", parse_output, "Output file (default stdout)");
  parse->add_flag("--linearize", parse_linearize, "Replace product terms with auxiliary variables");

  // features
  auto* features = app.add_subcommand("features", "Print feature vectors as CSV");
  std::vector<std::string> feat_inputs;
  std::string feat_schema = "nonlinear", feat_output, feat_encoding = "index";
  std::optional<double> feat_budget;
  features->add_option("instances", feat_inputs, "OPB files")->required()->check(CLI::ExistingFile);
  features->add_option("--schema", feat_schema)->check(CLI::IsMember({"basic", "nonlinear", "linear"}));
  features->add_option("--budget", feat_budget, "Append the timestep column for this budget (seconds)");
  features->add_option("--encoding", feat_encoding)->check(CLI::IsMember({"index", "seconds"}));
  features->add_option("-o,--output", feat_output);

  // run-portfolio
  auto* run = app.add_subcommand("run-portfolio", "Record anytime trajectories of every solver on every instance");
  std::string run_config, run_instances, run_archive;
  run->add_option("--config", run_config, "Portfolio config (default $METASELECT_PORTFOLIO)");
  run->add_option("--instances", run_instances, "Instance list file")->required()->check(CLI::ExistingFile);
  run->add_option("--archive", run_archive, "Archive directory")->required();

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "Label every instance-timestep pair of an archive");
  std::string build_archive, build_output, build_schema = "nonlinear", build_encoding = "index";
  build->add_option("--archive", build_archive)->required()->check(CLI::ExistingDirectory);
  build->add_option("-o,--output", build_output)->required();
  build->add_option("--schema", build_schema)->check(CLI::IsMember({"basic", "nonlinear", "linear"}));
  build->add_option("--encoding", build_encoding)->check(CLI::IsMember({"index", "seconds"}));

  // split
  auto* split = app.add_subcommand("split", "Assign instances to train/test per benchmark");
  std::string split_dataset, split_output;
  double split_fraction = 0.7;
  split->add_option("--dataset", split_dataset)->required()->check(CLI::ExistingFile);
  split->add_option("--fraction", split_fraction, "Train fraction")->check(CLI::Range(0.0, 1.0));
  split->add_option("-o,--output", split_output, "Output dataset (default: rewrite in place)");

  // train
  auto* train = app.add_subcommand("train", "Fit a selector on the train split");
  std::string train_dataset, train_output, train_family = "rf", train_schema;
  train->add_option("--dataset", train_dataset)->required()->check(CLI::ExistingFile);
  train->add_option("--family", train_family)->check(CLI::IsMember({"rf", "gb", "knn"}));
  train->add_option("--schema", train_schema, "Must match the dataset")
      ->check(CLI::IsMember({"basic", "nonlinear", "linear"}));
  train->add_option("-o,--output", train_output)->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a selector on the test split");
  std::string eval_model, eval_archive, eval_dataset, eval_reports;
  evaluate->add_option("--model", eval_model)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--archive", eval_archive)->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--dataset", eval_dataset)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--report-dir", eval_reports, "Write confusion, per-timestep and breakdown CSVs here");

  // importance / describe
  auto* importance = app.add_subcommand("importance", "Print MDI feature importances as CSV");
  std::string imp_model;
  importance->add_option("--model", imp_model)->required()->check(CLI::ExistingFile);
  auto* describe = app.add_subcommand("describe", "Print model parameters and importances as CSV");
  std::string desc_model;
  describe->add_option("--model", desc_model)->required()->check(CLI::ExistingFile);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Pick a solver for an instance and budget, then run it");
  std::string solve_instance, solve_model, solve_config, solve_policy = "report", solve_fallback, solve_assignment,
                                                         solve_outcome;
  double solve_budget = 0.0;
  solve_cmd->add_option("instance", solve_instance)->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--budget", solve_budget, "Seconds")->required();
  solve_cmd->add_option("--model", solve_model)->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--config", solve_config, "Portfolio config (default $METASELECT_PORTFOLIO)");
  solve_cmd->add_option("--on-no-solution", solve_policy)->check(CLI::IsMember({"report", "fallback"}));
  solve_cmd->add_option("--fallback-solver", solve_fallback);
  solve_cmd->add_option("--assignment", solve_assignment, "Write the solver's v lines here");
  solve_cmd->add_option("--outcome", solve_outcome, "Write the outcome record here (default stdout)");

  // summary
  auto* summary = app.add_subcommand("summary", "Win counts per timestep and per benchmark");
  std::string sum_dataset, sum_dir;
  summary->add_option("--dataset", sum_dataset)->required()->check(CLI::ExistingFile);
  summary->add_option("--output-dir", sum_dir, "Write wins_by_timestep.csv, wins_by_benchmark.csv, best_solver.csv");

  const auto start = std::chrono::steady_clock::now();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    diagnostic("error", "usage", e.what());
    std::cerr << app.help() << '\n';
    return kUsage;
  }
  for (CLI::App* sub : app.get_subcommands()) g_command = sub->get_name();

  try {
    const ClassWeightMode weight_mode = parse_class_weight_mode(g.class_weights);

    if (parse->parsed()) {
      Instance inst = parse_opb_file(parse_input);
      if (parse_linearize) inst = linearize(inst);
      emit(serialize_opb(inst), parse_output);

    } else if (features->parsed()) {
      const FeatureSchema schema = parse_feature_schema(feat_schema);
      const TimestepGrid grid = grid_for(g, nullptr);
      std::string out = "instance," + join(feature_names(schema, feat_budget.has_value()), ",") + "\n";
      for (const std::string& path : feat_inputs) {
        FeatureVector fv = extract(parse_opb_file(path), schema);
        if (feat_budget) {
          bool clamped = false;
          const std::size_t j = budget_timestep(grid, *feat_budget, &clamped);
          if (clamped) warn("budget below the first grid point; using timestep 0");
          fv = append_timestep(std::move(fv), j, grid, parse_timestep_encoding(feat_encoding));
        }
        out += instance_id_from_path(path);
        for (double v : fv.values) out += "," + format_double(v);
        out += "\n";
      }
      emit(out, feat_output);

    } else if (run->parsed()) {
      const PortfolioConfig config = load_portfolio_config(portfolio_path(run_config));
      const TimestepGrid grid = grid_for(g, &config);
      const auto instances = parse_instance_list(read_file(run_instances), fs::path(run_instances).parent_path());
      std::vector<SolverAdapter> adapters = config.solvers;
      const unsigned parallelism = g.parallelism ? g.parallelism : config.parallelism;
      const PortfolioRunSummary s = run_portfolio(adapters, instances, grid, parallelism, run_archive);
      std::cout << "executed = " << s.executed << "\nskipped = " << s.skipped << "\nfailed = " << s.failed << '\n';

    } else if (build->parsed()) {
      const RunArchive archive = load_archive(build_archive);
      DatasetOptions opts;
      opts.schema = parse_feature_schema(build_schema);
      opts.encoding = parse_timestep_encoding(build_encoding);
      std::vector<SkippedInstance> skipped;
      const LabeledDataset ds = build_dataset(archive, opts, &skipped);
      for (const SkippedInstance& s : skipped)
        diagnostic("warning", "skipped-instance", s.reason, {{"instance", s.instance_id}});
      save_dataset(build_output, ds);
      std::string manifest;
      for (const SkippedInstance& s : skipped) manifest += s.instance_id + '\t' + s.reason + '\n';
      write_file(build_output + ".skipped", manifest);
      std::cout << "rows = " << ds.rows.size() << "\ninstances = " << ds.instance_ids().size()
                << "\nskipped = " << skipped.size() << '\n';

    } else if (split->parsed()) {
      LabeledDataset ds = load_dataset(split_dataset);
      split_by_benchmark(ds, g.seed, split_fraction);
      save_dataset(split_output.empty() ? split_dataset : split_output, ds);
      std::cout << "train_rows = " << ds.rows_in(Split::Train).size()
                << "\ntest_rows = " << ds.rows_in(Split::Test).size() << '\n';

    } else if (train->parsed()) {
      const LabeledDataset ds = load_dataset(train_dataset);
      if (!train_schema.empty() && parse_feature_schema(train_schema) != ds.schema)
        throw SchemaMismatchError("--schema " + train_schema + " does not match the dataset schema " +
                                  std::string(to_string(ds.schema)));
      TrainOptions opts;
      opts.params = variant_params(parse_model_family(train_family), ds.schema);
      opts.weight_mode = weight_mode;
      opts.seed = g.seed;
      opts.threads = g.parallelism ? g.parallelism : 1;
      const TrainedModel model = train_model(ds, opts);
      save_model(train_output, model);
      std::cout << "variant = " << model.variant_name() << '\n';

    } else if (evaluate->parsed()) {
      const TrainedModel model = load_model(eval_model);
      const RunArchive archive = load_archive(eval_archive);
      const LabeledDataset ds = load_dataset(eval_dataset);
      EvalOptions opts;
      opts.overhead = g.overhead;
      if (g.sbs != "auto") opts.sbs = g.sbs;
      const EvalReport report = evaluate_selector(model, archive, ds, opts);
      std::cout << format_report(report);
      if (!eval_reports.empty()) {
        fs::create_directories(eval_reports);
        write_file(fs::path(eval_reports) / "confusion.csv", confusion_csv(report));
        write_file(fs::path(eval_reports) / "per_timestep.csv", timestep_series_csv(report));
        write_file(fs::path(eval_reports) / "breakdown.csv", breakdown_csv(report));
      }

    } else if (importance->parsed()) {
      const TrainedModel model = load_model(imp_model);
      const std::vector<double> mdi = model.importances();
      if (mdi.empty()) throw std::invalid_argument("model " + model.variant_name() + " has no impurity importances");
      const auto names = feature_names(model.schema, true);
      std::cout << "feature,mdi\n";
      for (std::size_t f = 0; f < mdi.size(); ++f) std::cout << names[f] << ',' << format_double(mdi[f]) << '\n';

    } else if (describe->parsed()) {
      std::cout << describe_model(load_model(desc_model));

    } else if (solve_cmd->parsed()) {
      if (!(solve_budget > 0.0)) throw CLI::ValidationError("--budget", "must be positive");
      const TrainedModel model = load_model(solve_model);
      const PortfolioConfig config = load_portfolio_config(portfolio_path(solve_config));
      SolveOptions opts;
      opts.on_no_solution = parse_no_solution_policy(solve_policy);
      opts.fallback_solver = solve_fallback;
      opts.assignment_path = solve_assignment;
      const SolveOutcome outcome = solve(solve_instance, solve_budget, model, config, opts, start);
      for (const std::string& w : outcome.warnings) warn(w);
      emit(format_outcome(outcome), solve_outcome);
      if (outcome.exit == ExitCondition::NoSolutionPredicted) {
        diagnostic("error", "no-solution", "model predicts that no solver finds a solution within the budget");
        return kNoSolutionExit;
      }

    } else if (summary->parsed()) {
      const WinSummary s = win_summary(load_dataset(sum_dataset));
      if (sum_dir.empty()) {
        std::cout << wins_by_timestep_csv(s);
      } else {
        fs::create_directories(sum_dir);
        write_file(fs::path(sum_dir) / "wins_by_timestep.csv", wins_by_timestep_csv(s));
        write_file(fs::path(sum_dir) / "wins_by_benchmark.csv", wins_by_benchmark_csv(s));
        write_file(fs::path(sum_dir) / "best_solver.csv", best_solver_matrix_csv(s));
      }
    }
  } catch (const CLI::ValidationError& e) {
    diagnostic("error", "usage", e.what());
    return kUsage;
  } catch (const OpbError& e) {
    diagnostic("error", "opb-parse", e.what(), {{"line", e.line()}, {"column", e.column()}});
    return kRuntime;
  } catch (const BudgetExhaustedError& e) {
    diagnostic("error", "budget-exhausted", e.what());
    return kBudget;
  } catch (const UnknownSolverError& e) {
    diagnostic("error", "unknown-solver", e.what());
    return kRuntime;
  } catch (const SchemaMismatchError& e) {
    diagnostic("error", "schema-mismatch", e.what());
    return kRuntime;
  } catch (const DegeneratePortfolioError& e) {
    diagnostic("error", "degenerate-portfolio", e.what());
    return kRuntime;
  } catch (const MissingObjectiveError& e) {
    diagnostic("error", "missing-objective", e.what());
    return kRuntime;
  } catch (const std::exception& e) {
    diagnostic("error", "runtime", e.what());
    return kRuntime;
  }
  return kOk;
}
