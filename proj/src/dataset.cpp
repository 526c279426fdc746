#include "metaselect/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "metaselect/rng.hpp"
#include "metaselect/text.hpp"

namespace metaselect {

LabelVocabulary::LabelVocabulary(std::vector<std::string> solver_ids) : solvers_(std::move(solver_ids)) {
  std::set<std::string_view> seen;
  for (const std::string& s : solvers_) {
    if (s == kNoSolution) throw std::invalid_argument("solver id may not be " + std::string(kNoSolution));
    if (!seen.insert(s).second) throw std::invalid_argument("duplicate solver id: " + s);
  }
}

std::string LabelVocabulary::name(std::size_t label) const {
  if (label < solvers_.size()) return solvers_[label];
  if (label == solvers_.size()) return std::string(kNoSolution);
  throw std::out_of_range("label index out of range: " + std::to_string(label));
}

std::size_t LabelVocabulary::index_of(std::string_view name) const {
  if (name == kNoSolution) return no_solution();
  for (std::size_t i = 0; i < solvers_.size(); ++i)
    if (solvers_[i] == name) return i;
  throw std::out_of_range("label not in vocabulary: " + std::string(name));
}

std::vector<std::string> LabelVocabulary::names() const {
  std::vector<std::string> out = solvers_;
  out.emplace_back(kNoSolution);
  return out;
}

std::size_t label_pair(std::span<const PairStanding> standings, std::size_t no_solution_label) {
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < standings.size(); ++s) {
    const PairStanding& cur = standings[s];
    if (!cur.value) continue;
    if (!best) {
      best = s;
      continue;
    }
    const PairStanding& b = standings[*best];
    // strict comparisons keep the earlier-declared solver on a full tie
    if (*cur.value < *b.value || (*cur.value == *b.value && cur.achieved_at < b.achieved_at)) best = s;
  }
  return best.value_or(no_solution_label);
}

std::vector<PairStanding> standings_at(const RunArchive& archive, std::string_view instance_id, std::size_t timestep) {
  std::vector<PairStanding> out;
  out.reserve(archive.solver_ids().size());
  for (const std::string& s : archive.solver_ids()) {
    const Trajectory& t = archive.at(instance_id, s);
    PairStanding p;
    p.value = t.sampled.at(timestep);
    if (p.value) p.achieved_at = t.achieved_at(timestep);
    out.push_back(std::move(p));
  }
  return out;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Unassigned: return "none";
    case Split::Train: return "train";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "none") return Split::Unassigned;
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split: " + std::string(name));
}

Split LabeledDataset::split_of(std::string_view instance_id) const {
  auto it = split.find(instance_id);
  return it == split.end() ? Split::Unassigned : it->second;
}

std::vector<std::size_t> LabeledDataset::rows_in(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (split_of(rows[i].instance_id) == s) out.push_back(i);
  return out;
}

std::vector<std::string> LabeledDataset::instance_ids() const {
  std::vector<std::string> out;
  for (const DatasetRow& r : rows)
    if (out.empty() || out.back() != r.instance_id) out.push_back(r.instance_id);
  return out;
}

LabeledDataset build_dataset(const RunArchive& archive, const DatasetOptions& options,
                             std::vector<SkippedInstance>* skipped) {
  LabeledDataset ds;
  ds.schema = options.schema;
  ds.encoding = options.encoding;
  ds.grid = archive.grid();
  ds.vocabulary = LabelVocabulary(archive.solver_ids());

  std::vector<const InstanceRecord*> order;
  for (const InstanceRecord& r : archive.instances()) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const InstanceRecord* a, const InstanceRecord* b) {
    return std::tie(a->benchmark_id, a->instance_id) < std::tie(b->benchmark_id, b->instance_id);
  });

  auto skip = [&](const InstanceRecord& r, std::string reason) {
    if (skipped) skipped->push_back({r.instance_id, std::move(reason)});
  };

  for (const InstanceRecord* rec : order) {
    std::string missing;
    for (const std::string& s : archive.solver_ids())
      if (!archive.find(rec->instance_id, s)) missing += (missing.empty() ? "" : ",") + s;
    if (!missing.empty()) {
      skip(*rec, "no trajectory for solver(s) " + missing);
      continue;
    }
    FeatureVector fv;
    double prep = 0.0;
    try {
      const auto start = std::chrono::steady_clock::now();
      Instance inst = parse_opb_file(rec->path.string());
      if (!inst.has_objective()) throw MissingObjectiveError("instance has no objective function");
      fv = extract(inst, options.schema);
      prep = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } catch (const std::exception& e) {
      skip(*rec, e.what());
      continue;
    }
    ds.prep_seconds[rec->instance_id] = prep;
    ds.split[rec->instance_id] = Split::Unassigned;
    for (std::size_t t = 0; t < ds.grid.size(); ++t) {
      DatasetRow row;
      row.benchmark_id = rec->benchmark_id;
      row.instance_id = rec->instance_id;
      row.timestep = t;
      row.features = append_timestep(fv, t, ds.grid, ds.encoding).values;
      row.label = label_pair(standings_at(archive, rec->instance_id, t), ds.vocabulary.no_solution());
      ds.rows.push_back(std::move(row));
    }
  }
  return ds;
}

std::size_t train_count(std::size_t benchmark_size, double train_fraction) {
  if (benchmark_size == 0) return 0;
  // the epsilon absorbs representation error, e.g. 0.7 * 10 just above 7
  auto n = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(benchmark_size) - 1e-9));
  return std::clamp<std::size_t>(n, 1, benchmark_size);
}

void split_by_benchmark(LabeledDataset& ds, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw std::invalid_argument("train fraction must be in (0, 1]");
  std::map<std::string, std::vector<std::string>> by_benchmark;
  std::set<std::string> seen;
  for (const DatasetRow& r : ds.rows) {
    if (r.benchmark_id.empty()) throw std::invalid_argument("instance " + r.instance_id + " has no benchmark id");
    if (seen.insert(r.instance_id).second) by_benchmark[r.benchmark_id].push_back(r.instance_id);
  }
  Rng rng(seed);
  for (auto& [benchmark, ids] : by_benchmark) {
    std::sort(ids.begin(), ids.end());
    rng.shuffle(ids);
    const std::size_t n_train = train_count(ids.size(), train_fraction);
    for (std::size_t i = 0; i < ids.size(); ++i) ds.split[ids[i]] = i < n_train ? Split::Train : Split::Test;
  }
}

WinSummary win_summary(const LabeledDataset& ds) {
  WinSummary s;
  s.labels = ds.vocabulary.names();
  if (ds.rows.empty()) return s;
  s.wins_by_timestep.assign(ds.grid.size(), std::vector<std::size_t>(s.labels.size(), 0));
  for (const DatasetRow& r : ds.rows) {
    ++s.wins_by_timestep.at(r.timestep).at(r.label);
    auto& bench = s.wins_by_benchmark[r.benchmark_id];
    if (bench.empty()) bench.assign(s.labels.size(), 0);
    ++bench[r.label];
    if (s.best_solver_matrix.empty() || s.best_solver_matrix.back().instance_id != r.instance_id)
      s.best_solver_matrix.push_back({r.benchmark_id, r.instance_id, std::vector<std::size_t>(ds.grid.size(), 0)});
    s.best_solver_matrix.back().labels[r.timestep] = r.label;
  }
  return s;
}

std::string wins_by_timestep_csv(const WinSummary& s) {
  if (s.wins_by_timestep.empty()) return {};
  std::ostringstream out;
  out << "timestep," << join(s.labels, ",") << '\n';
  for (std::size_t t = 0; t < s.wins_by_timestep.size(); ++t) {
    out << t;
    for (std::size_t c : s.wins_by_timestep[t]) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

std::string wins_by_benchmark_csv(const WinSummary& s) {
  if (s.wins_by_benchmark.empty()) return {};
  std::ostringstream out;
  out << "benchmark," << join(s.labels, ",") << '\n';
  for (const auto& [bench, counts] : s.wins_by_benchmark) {
    out << bench;
    for (std::size_t c : counts) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

std::string best_solver_matrix_csv(const WinSummary& s) {
  if (s.best_solver_matrix.empty()) return {};
  std::ostringstream out;
  out << "benchmark,instance";
  for (std::size_t t = 0; t < s.best_solver_matrix.front().labels.size(); ++t) out << ",t" << t;
  out << '\n';
  for (const auto& line : s.best_solver_matrix) {
    out << line.benchmark_id << ',' << line.instance_id;
    for (std::size_t l : line.labels) out << ',' << s.labels[l];
    out << '\n';
  }
  return out.str();
}

namespace {

const std::vector<std::string> kMetaColumns = {"benchmark", "instance", "timestep_index", "label", "split"};

void check_field(const std::string& value, const char* what) {
  if (value.find_first_of(",\n\r") != std::string::npos)
    throw std::invalid_argument(std::string(what) + " may not contain commas or newlines: " + value);
}

}  // namespace

std::string format_dataset_csv(const LabeledDataset& ds) {
  std::ostringstream out;
  out << "# metaselect-dataset v1\n"
      << "# schema = " << to_string(ds.schema) << '\n'
      << "# schema_version = " << kFeatureSchemaVersion << '\n'
      << "# encoding = " << to_string(ds.encoding) << '\n'
      << "# grid = " << ds.grid.size() << ' ' << format_double(ds.grid.horizon()) << ' '
      << format_double(ds.grid.t_min()) << '\n'
      << "# solvers = " << join(ds.vocabulary.solvers(), ",") << '\n';
  for (const auto& [id, seconds] : ds.prep_seconds) out << "# prep_seconds = " << id << ' ' << format_double(seconds) << '\n';
  std::vector<std::string> header = feature_names(ds.schema, true);
  header.insert(header.end(), kMetaColumns.begin(), kMetaColumns.end());
  out << join(header, ",") << '\n';
  for (const DatasetRow& r : ds.rows) {
    check_field(r.instance_id, "instance id");
    check_field(r.benchmark_id, "benchmark id");
    for (double v : r.features) out << format_double(v) << ',';
    out << r.benchmark_id << ',' << r.instance_id << ',' << r.timestep << ',' << ds.vocabulary.name(r.label) << ','
        << to_string(ds.split_of(r.instance_id)) << '\n';
  }
  return out.str();
}

LabeledDataset parse_dataset_csv(std::string_view text) {
  LabeledDataset ds;
  auto lines = split_lines(text);
  std::size_t i = 0;
  if (lines.empty() || trim(lines[0]) != "# metaselect-dataset v1") throw std::runtime_error("not a metaselect dataset");
  std::optional<TimestepGrid> grid;
  for (++i; i < lines.size() && lines[i].starts_with("#"); ++i) {
    std::string_view body = trim(lines[i].substr(1));
    auto eq = body.find('=');
    if (eq == std::string_view::npos) continue;
    std::string_view key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    if (key == "schema") ds.schema = parse_feature_schema(value);
    else if (key == "schema_version" && value != std::to_string(kFeatureSchemaVersion))
      throw std::runtime_error("dataset feature schema version " + std::string(value) + " is not supported");
    else if (key == "encoding") ds.encoding = parse_timestep_encoding(value);
    else if (key == "grid") {
      auto w = split_whitespace(value);
      if (w.size() != 3) throw std::runtime_error("bad grid record in dataset");
      grid.emplace(std::stoul(std::string(w[0])), parse_double(w[1]), parse_double(w[2]));
    } else if (key == "solvers") {
      std::vector<std::string> ids;
      for (auto s : split(value, ',')) ids.emplace_back(s);
      ds.vocabulary = LabelVocabulary(ids);
    } else if (key == "prep_seconds") {
      auto w = split_whitespace(value);
      if (w.size() != 2) throw std::runtime_error("bad prep_seconds record in dataset");
      ds.prep_seconds[std::string(w[0])] = parse_double(w[1]);
    }
  }
  if (!grid) throw std::runtime_error("dataset lacks grid record");
  ds.grid = *grid;
  if (i >= lines.size()) throw std::runtime_error("dataset lacks column header");
  std::vector<std::string> expected = feature_names(ds.schema, true);
  expected.insert(expected.end(), kMetaColumns.begin(), kMetaColumns.end());
  if (trim(lines[i]) != join(expected, ",")) throw std::runtime_error("dataset column header does not match schema");
  const std::size_t n_features = feature_count(ds.schema) + 1;
  for (++i; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto cols = split(lines[i], ',');
    if (cols.size() != expected.size()) throw std::runtime_error("dataset row has wrong column count: line " + std::to_string(i + 1));
    DatasetRow r;
    for (std::size_t c = 0; c < n_features; ++c) r.features.push_back(parse_double(cols[c]));
    r.benchmark_id = cols[n_features];
    r.instance_id = cols[n_features + 1];
    r.timestep = std::stoul(std::string(cols[n_features + 2]));
    if (r.timestep >= ds.grid.size()) throw std::runtime_error("timestep index outside grid: line " + std::to_string(i + 1));
    r.label = ds.vocabulary.index_of(cols[n_features + 3]);
    ds.split[r.instance_id] = parse_split(trim(cols[n_features + 4]));
    ds.rows.push_back(std::move(r));
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds) { write_file(path, format_dataset_csv(ds)); }

LabeledDataset load_dataset(const std::filesystem::path& path) { return parse_dataset_csv(read_file(path)); }

}  // namespace metaselect
