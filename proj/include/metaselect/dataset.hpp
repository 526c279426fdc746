#pragma once

// Labeled (instance, timestep) rows built from a run archive.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metaselect/features.hpp"
#include "metaselect/grid.hpp"
#include "metaselect/runner.hpp"

namespace metaselect {

inline constexpr std::string_view kNoSolution = "NO_SOLUTION";

/// Portfolio solvers in declaration order followed by NO_SOLUTION. The index
/// of a label in this list is its class id and its tie-break rank.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  explicit LabelVocabulary(std::vector<std::string> solver_ids);

  std::size_t size() const { return solvers_.size() + 1; }
  std::size_t solver_count() const { return solvers_.size(); }
  std::size_t no_solution() const { return solvers_.size(); }
  bool is_solver(std::size_t label) const { return label < solvers_.size(); }
  const std::vector<std::string>& solvers() const { return solvers_; }

  std::string name(std::size_t label) const;
  std::size_t index_of(std::string_view name) const;  // throws for unknown labels
  std::vector<std::string> names() const;

  friend bool operator==(const LabelVocabulary&, const LabelVocabulary&) = default;

 private:
  std::vector<std::string> solvers_;
};

/// One solver's standing at a pair: sampled incumbent and when it was reached.
struct PairStanding {
  std::optional<BigInt> value;
  double achieved_at = 0.0;
};

/// Winner of an instance-timestep pair. Lowest objective wins; ties go to the
/// earliest achiever, then to declaration order. All undefined gives
/// `no_solution_label`.
std::size_t label_pair(std::span<const PairStanding> standings, std::size_t no_solution_label);

std::vector<PairStanding> standings_at(const RunArchive& archive, std::string_view instance_id, std::size_t timestep);

enum class Split { Unassigned, Train, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct DatasetRow {
  std::string benchmark_id;
  std::string instance_id;
  std::size_t timestep = 0;
  std::vector<double> features;  // schema features followed by the timestep column
  std::size_t label = 0;

  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

struct LabeledDataset {
  FeatureSchema schema = FeatureSchema::Nonlinear;
  TimestepEncoding encoding = TimestepEncoding::Index;
  TimestepGrid grid;
  LabelVocabulary vocabulary;
  std::vector<DatasetRow> rows;  // ordered by (benchmark, instance, timestep)
  std::map<std::string, Split, std::less<>> split;
  std::map<std::string, double, std::less<>> prep_seconds;  // parse + feature extraction wall time

  Split split_of(std::string_view instance_id) const;
  std::vector<std::size_t> rows_in(Split s) const;
  std::vector<std::string> instance_ids() const;  // in row order, unique

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

struct SkippedInstance {
  std::string instance_id;
  std::string reason;
};

struct DatasetOptions {
  FeatureSchema schema = FeatureSchema::Nonlinear;
  TimestepEncoding encoding = TimestepEncoding::Index;
};

/// Features are computed once per instance and repeated with the timestep
/// column varying. Unparsable, objective-free or incompletely recorded
/// instances are skipped and listed in `skipped`.
LabeledDataset build_dataset(const RunArchive& archive, const DatasetOptions& options,
                             std::vector<SkippedInstance>* skipped = nullptr);

/// Shuffles the instances of each benchmark with a seeded generator and sends
/// the first ceil(fraction * k) to train. Deterministic in `seed`.
void split_by_benchmark(LabeledDataset& ds, std::uint64_t seed, double train_fraction = 0.7);

std::size_t train_count(std::size_t benchmark_size, double train_fraction);

struct WinSummary {
  std::vector<std::string> labels;                             // vocabulary names
  std::vector<std::vector<std::size_t>> wins_by_timestep;      // [timestep][label]
  std::map<std::string, std::vector<std::size_t>> wins_by_benchmark;  // benchmark -> [label]
  struct InstanceLine {
    std::string benchmark_id;
    std::string instance_id;
    std::vector<std::size_t> labels;  // per timestep
  };
  std::vector<InstanceLine> best_solver_matrix;
};

WinSummary win_summary(const LabeledDataset& ds);
std::string wins_by_timestep_csv(const WinSummary& s);
std::string wins_by_benchmark_csv(const WinSummary& s);
std::string best_solver_matrix_csv(const WinSummary& s);

std::string format_dataset_csv(const LabeledDataset& ds);
LabeledDataset parse_dataset_csv(std::string_view text);
void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace metaselect
