#pragma once

// Generators and brute-force oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "metaselect/dataset.hpp"
#include "metaselect/grid.hpp"
#include "metaselect/opb.hpp"
#include "metaselect/rng.hpp"
#include "metaselect/runner.hpp"

namespace support {

using namespace metaselect;

inline Term term(long c, std::initializer_list<int> vars) {
  Term t;
  t.coefficient = c;
  for (int v : vars) t.literals.push_back({static_cast<std::uint32_t>(v < 0 ? -v : v), v < 0});
  std::sort(t.literals.begin(), t.literals.end());
  return t;
}

inline long uniform_int(Rng& rng, long lo, long hi) { return lo + static_cast<long>(rng.index(static_cast<std::size_t>(hi - lo + 1))); }

inline Term random_term(Rng& rng, std::uint32_t n, std::size_t max_degree) {
  Term t;
  long c = 0;
  while (c == 0) c = uniform_int(rng, -5, 5);
  t.coefficient = c;
  std::vector<std::uint32_t> vars(n);
  for (std::uint32_t i = 0; i < n; ++i) vars[i] = i + 1;
  rng.shuffle(vars);
  const std::size_t k = 1 + rng.index(std::min<std::size_t>(max_degree, n));
  for (std::size_t i = 0; i < k; ++i) t.literals.push_back({vars[i], rng.index(2) == 1});
  std::sort(t.literals.begin(), t.literals.end());
  return t;
}

struct InstanceShape {
  std::uint32_t max_variables = 8;
  std::size_t max_constraints = 6;
  std::size_t max_terms = 5;
  std::size_t max_degree = 3;
  bool objective = true;
};

inline Instance random_instance(Rng& rng, const InstanceShape& shape = {}) {
  Instance inst;
  const auto n = static_cast<std::uint32_t>(1 + rng.index(shape.max_variables));
  inst.declared_variables = n;
  if (shape.objective) {
    inst.objective.emplace();
    const std::size_t k = 1 + rng.index(shape.max_terms);
    for (std::size_t i = 0; i < k; ++i) inst.objective->push_back(random_term(rng, n, shape.max_degree));
  }
  const std::size_t m = rng.index(shape.max_constraints + 1);
  for (std::size_t i = 0; i < m; ++i) {
    Constraint c;
    const std::size_t k = 1 + rng.index(shape.max_terms);
    for (std::size_t j = 0; j < k; ++j) c.terms.push_back(random_term(rng, n, shape.max_degree));
    c.relation = rng.index(4) == 0 ? Relation::Equal : Relation::GreaterEqual;
    c.rhs = uniform_int(rng, -3, 4);
    inst.constraints.push_back(std::move(c));
  }
  inst.declared_constraints = static_cast<std::uint32_t>(m);
  return inst;
}

// ---------------------------------------------------------------------------
// Archives

struct ArchiveShape {
  std::size_t max_solvers = 3;
  std::size_t max_instances = 5;
  std::size_t max_timesteps = 10;
  std::size_t max_events = 4;
  long objective_range = 6;  // small ranges force ties
};

/// Random archive whose event times are drawn from the grid points (plus a few
/// off-grid times), so that ties in value and time both occur.
inline RunArchive random_archive(Rng& rng, const ArchiveShape& shape = {}, std::size_t min_solvers = 1) {
  const std::size_t n_solvers = min_solvers + rng.index(shape.max_solvers - min_solvers + 1);
  const std::size_t n_instances = 1 + rng.index(shape.max_instances);
  const std::size_t n_steps = 2 + rng.index(shape.max_timesteps - 1);
  TimestepGrid grid(n_steps, 10.0, 0.1);
  std::vector<std::string> solvers;
  for (std::size_t s = 0; s < n_solvers; ++s) solvers.push_back("s" + std::to_string(s));
  std::vector<InstanceRecord> instances;
  for (std::size_t i = 0; i < n_instances; ++i)
    instances.push_back({"i" + std::to_string(i), "b" + std::to_string(i % 2), "i" + std::to_string(i) + ".opb"});
  RunArchive archive(grid, solvers, instances);
  for (const InstanceRecord& inst : instances) {
    for (const std::string& s : solvers) {
      std::vector<IncumbentEvent> events;
      const std::size_t k = rng.index(shape.max_events + 1);
      long value = uniform_int(rng, 0, shape.objective_range);
      for (std::size_t e = 0; e < k; ++e) {
        double t = rng.index(3) == 0 ? rng.uniform() * 10.0 : grid[rng.index(grid.size())];
        events.push_back({t, BigInt(value)});
        value -= uniform_int(rng, 0, 2);
      }
      archive.put(make_trajectory(s, inst.instance_id, events, grid));
    }
  }
  return archive;
}

// ---------------------------------------------------------------------------
// Oracles, written from the definitions without reusing library code paths.

/// Best value at or before `t` and the time it was first reached.
struct OracleStanding {
  std::optional<long> value;
  double when = 0.0;
};

inline OracleStanding oracle_standing(const Trajectory& tr, double t) {
  OracleStanding out;
  for (const IncumbentEvent& e : tr.events) {
    if (e.seconds > t) continue;
    const long v = e.objective.convert_to<long>();
    if (!out.value || v < *out.value || (v == *out.value && e.seconds < out.when)) {
      out.value = v;
      out.when = e.seconds;
    }
  }
  return out;
}

/// Exhaustive argmin with first-achiever and declaration-order tie-breaks.
inline std::size_t oracle_label(const std::vector<OracleStanding>& st) {
  std::size_t best = st.size();
  for (std::size_t s = 0; s < st.size(); ++s) {
    if (!st[s].value) continue;
    bool better = true;
    for (std::size_t o = 0; o < st.size(); ++o) {
      if (o == s || !st[o].value) continue;
      const bool o_wins = *st[o].value < *st[s].value ||
                          (*st[o].value == *st[s].value &&
                           (st[o].when < st[s].when || (st[o].when == st[s].when && o < s)));
      if (o_wins) better = false;
    }
    if (better) best = s;
  }
  return best;
}

struct OracleBounds {
  long lo = 0, hi = 0;
  bool defined = false;
};

inline OracleBounds oracle_bounds(const RunArchive& a, const std::string& inst) {
  OracleBounds b;
  for (const std::string& s : a.solver_ids())
    for (const IncumbentEvent& e : a.at(inst, s).events) {
      const long v = e.objective.convert_to<long>();
      if (!b.defined) b = {v, v, true};
      b.lo = std::min(b.lo, v);
      b.hi = std::max(b.hi, v);
    }
  return b;
}

inline long double oracle_normalize(std::optional<long> o, const OracleBounds& b) {
  if (!o) return 2.0L;
  if (b.lo == b.hi) return 0.0L;
  return static_cast<long double>(*o - b.lo) / static_cast<long double>(b.hi - b.lo);
}

/// Oracle scores for one archive: per-solver m, VBS, and a fixed-choice policy.
struct OracleScores {
  std::vector<long double> m_solver;
  long double m_vbs = 0.0L;
  std::size_t pairs = 0;
};

inline OracleScores oracle_scores(const RunArchive& a) {
  OracleScores out;
  out.m_solver.assign(a.solver_ids().size(), 0.0L);
  for (const InstanceRecord& inst : a.instances()) {
    const OracleBounds b = oracle_bounds(a, inst.instance_id);
    for (std::size_t j = 0; j < a.grid().size(); ++j) {
      std::vector<std::optional<long>> v;
      for (const std::string& s : a.solver_ids()) v.push_back(oracle_standing(a.at(inst.instance_id, s), a.grid()[j]).value);
      if (std::none_of(v.begin(), v.end(), [](const auto& x) { return x.has_value(); })) continue;
      ++out.pairs;
      long double best = 2.0L;
      for (std::size_t s = 0; s < v.size(); ++s) {
        const long double n = oracle_normalize(v[s], b);
        out.m_solver[s] += n;
        best = std::min(best, n);
      }
      out.m_vbs += best;
    }
  }
  return out;
}

/// Basic-schema dataset over an archive without instance files: constant
/// features, labels from the archive, every instance in the test split.
inline LabeledDataset dataset_from_archive(const RunArchive& a) {
  LabeledDataset ds;
  ds.schema = FeatureSchema::Basic;
  ds.grid = a.grid();
  ds.vocabulary = LabelVocabulary(a.solver_ids());
  for (const InstanceRecord& inst : a.instances()) {
    ds.split[inst.instance_id] = Split::Test;
    ds.prep_seconds[inst.instance_id] = 0.0;
    for (std::size_t t = 0; t < a.grid().size(); ++t)
      ds.rows.push_back({inst.benchmark_id, inst.instance_id, t, {1.0, 1.0, double(t)},
                         label_pair(standings_at(a, inst.instance_id, t), ds.vocabulary.no_solution())});
  }
  return ds;
}

/// Value a selector holds at grid point `t` after `overhead` seconds, read
/// by scanning for the last grid point that still fits.
inline std::optional<long> oracle_selector_value(const RunArchive& a, const std::string& inst, const std::string& solver,
                                                 std::size_t t, double overhead) {
  std::optional<std::size_t> at;
  for (std::size_t j = 0; j <= t; ++j)
    if (a.grid()[j] + overhead <= a.grid()[t]) at = j;
  if (overhead == 0.0) at = t;
  if (!at) return std::nullopt;
  return oracle_standing(a.at(inst, solver), a.grid()[*at]).value;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("metaselect-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace support
