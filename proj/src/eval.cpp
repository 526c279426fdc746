#include "metaselect/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "metaselect/text.hpp"

namespace metaselect {

using boost::multiprecision::cpp_rational;

InstanceBounds instance_bounds(const RunArchive& archive, std::string_view instance_id) {
  InstanceBounds b;
  for (const std::string& s : archive.solver_ids()) {
    const Trajectory& t = archive.at(instance_id, s);
    for (const IncumbentEvent& e : t.events) {
      if (!b.defined) {
        b.o_min = b.o_max = e.objective;
        b.defined = true;
      } else {
        if (e.objective < b.o_min) b.o_min = e.objective;
        if (e.objective > b.o_max) b.o_max = e.objective;
      }
    }
  }
  return b;
}

double normalize(const std::optional<BigInt>& o, const InstanceBounds& bounds) {
  if (!bounds.defined) throw std::invalid_argument("normalize requires defined instance bounds");
  if (!o) return 2.0;
  if (*o == bounds.o_min && *o == bounds.o_max) return 0.0;
  const cpp_rational ratio(BigInt(*o - bounds.o_min), BigInt(bounds.o_max - bounds.o_min));
  return ratio.convert_to<double>();
}

BoundsTable bounds_table(const RunArchive& archive, std::span<const std::string> instance_ids) {
  BoundsTable table;
  for (const std::string& id : instance_ids) table[id] = instance_bounds(archive, id);
  return table;
}

std::vector<EvalPair> evaluated_pairs(const RunArchive& archive, std::span<const std::string> instance_ids) {
  std::vector<EvalPair> pairs;
  for (const std::string& id : instance_ids) {
    std::vector<const Trajectory*> ts;
    for (const std::string& s : archive.solver_ids()) ts.push_back(&archive.at(id, s));
    for (std::size_t t = 0; t < archive.grid().size(); ++t)
      if (std::any_of(ts.begin(), ts.end(), [&](const Trajectory* tr) { return tr->sampled[t].has_value(); }))
        pairs.push_back({id, t});
  }
  return pairs;
}

double cumulative_metric(const PolicyValues& policy, std::span<const EvalPair> pairs, const BoundsTable& bounds) {
  double sum = 0.0;
  for (const EvalPair& p : pairs) {
    auto v = policy.find(p);
    if (v == policy.end())
      throw std::invalid_argument("policy has no value for instance '" + p.instance_id + "' at timestep " +
                                  std::to_string(p.timestep));
    auto b = bounds.find(p.instance_id);
    if (b == bounds.end()) throw std::invalid_argument("no bounds for instance '" + p.instance_id + "'");
    sum += normalize(v->second, b->second);
  }
  return sum;
}

double m_hat(double m_ms, double m_sbs, double m_vbs) {
  if (!(m_sbs > m_vbs))
    throw DegeneratePortfolioError("m_SBS equals m_VBS: the single best solver is already virtual-best, m-hat is undefined");
  return (m_ms - m_vbs) / (m_sbs - m_vbs);
}

PolicyValues solver_policy(const RunArchive& archive, std::string_view solver_id, std::span<const EvalPair> pairs) {
  PolicyValues policy;
  for (const EvalPair& p : pairs) policy[p] = archive.at(p.instance_id, solver_id).sampled.at(p.timestep);
  return policy;
}

namespace {

std::optional<BigInt> best_value(const RunArchive& archive, const EvalPair& p) {
  std::optional<BigInt> best;
  for (const std::string& s : archive.solver_ids()) {
    const auto& v = archive.at(p.instance_id, s).sampled.at(p.timestep);
    if (v && (!best || *v < *best)) best = v;
  }
  return best;
}

}  // namespace

PolicyValues vbs_policy(const RunArchive& archive, std::span<const EvalPair> pairs) {
  PolicyValues policy;
  for (const EvalPair& p : pairs) policy[p] = best_value(archive, p);
  return policy;
}

PolicyValues selector_policy(const RunArchive& archive, std::span<const EvalPair> pairs,
                             const std::function<std::size_t(const EvalPair&)>& choice,
                             const std::function<double(const EvalPair&)>& overhead) {
  const TimestepGrid& grid = archive.grid();
  const auto& solvers = archive.solver_ids();
  PolicyValues policy;
  for (const EvalPair& p : pairs) {
    const std::size_t label = choice(p);
    if (label >= solvers.size()) {
      policy[p] = std::nullopt;
      continue;
    }
    const double spent = overhead ? overhead(p) : 0.0;
    std::optional<std::size_t> read_at = p.timestep;
    if (spent > 0.0) {
      read_at = grid.floor_index(grid[p.timestep] - spent);
      if (read_at && *read_at > p.timestep) read_at = p.timestep;
    }
    policy[p] = read_at ? archive.at(p.instance_id, solvers[label]).sampled.at(*read_at) : std::nullopt;
  }
  return policy;
}

Breakdown sbs_breakdown(const PolicyValues& policy, const RunArchive& archive, std::span<const EvalPair> pairs) {
  Breakdown b;
  for (const EvalPair& p : pairs) {
    auto v = policy.find(p);
    if (v == policy.end() || !v->second) {
      ++b.none;
      continue;
    }
    const auto best = best_value(archive, p);
    if (best && *v->second <= *best) ++b.best_found;
    else ++b.non_best;
  }
  return b;
}

EvalReport evaluate_predictions(const RunArchive& archive, const LabeledDataset& ds,
                                std::span<const std::size_t> predictions, std::span<const double> overhead_seconds,
                                const EvalOptions& options) {
  if (archive.solver_ids() != ds.vocabulary.solvers())
    throw std::invalid_argument("dataset labels and archive portfolio differ");
  if (!(archive.grid() == ds.grid)) throw std::invalid_argument("dataset and archive use different grids");
  const std::vector<std::size_t> test_rows = ds.rows_in(Split::Test);
  if (test_rows.empty()) throw std::invalid_argument("dataset has no test rows; run split first");
  if (predictions.size() != test_rows.size() || overhead_seconds.size() != test_rows.size())
    throw std::invalid_argument("one prediction and one overhead value are needed per test row");

  EvalReport r;
  r.overhead = options.overhead;
  r.labels = ds.vocabulary.names();
  r.test_rows = test_rows.size();

  // Accuracy and confusion over every test row, NO_SOLUTION rows included.
  r.confusion.assign(r.labels.size(), std::vector<std::size_t>(r.labels.size(), 0));
  std::map<EvalPair, std::size_t> choice;
  std::map<EvalPair, double> spent;
  std::size_t correct = 0;
  double overhead_total = 0.0;
  std::vector<std::string> instances;
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    const DatasetRow& row = ds.rows[test_rows[i]];
    if (predictions[i] >= r.labels.size()) throw std::invalid_argument("prediction outside the label vocabulary");
    ++r.confusion[row.label][predictions[i]];
    correct += row.label == predictions[i];
    EvalPair key{row.instance_id, row.timestep};
    choice[key] = predictions[i];
    spent[key] = overhead_seconds[i];
    overhead_total += overhead_seconds[i];
    if (instances.empty() || instances.back() != row.instance_id) instances.push_back(row.instance_id);
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(test_rows.size());
  r.mean_overhead_seconds = overhead_total / static_cast<double>(test_rows.size());

  const std::vector<EvalPair> pairs = evaluated_pairs(archive, instances);
  const BoundsTable bounds = bounds_table(archive, instances);
  r.pair_count = pairs.size();
  for (const EvalPair& p : pairs)
    if (!choice.count(p))
      throw std::invalid_argument("no prediction for instance '" + p.instance_id + "' at timestep " +
                                  std::to_string(p.timestep));

  std::vector<PolicyValues> per_solver;
  for (const std::string& s : archive.solver_ids()) {
    per_solver.push_back(solver_policy(archive, s, pairs));
    r.m_solver.push_back(cumulative_metric(per_solver.back(), pairs, bounds));
  }
  std::size_t sbs_index = 0;
  if (options.sbs && *options.sbs != "auto") {
    auto it = std::find(archive.solver_ids().begin(), archive.solver_ids().end(), *options.sbs);
    if (it == archive.solver_ids().end()) throw std::invalid_argument("SBS solver '" + *options.sbs + "' is not in the portfolio");
    sbs_index = static_cast<std::size_t>(it - archive.solver_ids().begin());
  } else {
    for (std::size_t s = 1; s < r.m_solver.size(); ++s)
      if (r.m_solver[s] < r.m_solver[sbs_index]) sbs_index = s;
  }
  r.sbs = archive.solver_ids()[sbs_index];
  r.m_sbs = r.m_solver[sbs_index];

  const PolicyValues vbs = vbs_policy(archive, pairs);
  const PolicyValues ms = selector_policy(
      archive, pairs, [&](const EvalPair& p) { return choice.at(p); }, {});
  const PolicyValues ms_overhead = selector_policy(
      archive, pairs, [&](const EvalPair& p) { return choice.at(p); }, [&](const EvalPair& p) { return spent.at(p); });
  r.m_vbs = cumulative_metric(vbs, pairs, bounds);
  r.m_ms = cumulative_metric(ms, pairs, bounds);
  r.m_ms_overhead = cumulative_metric(ms_overhead, pairs, bounds);
  r.m_hat_no_overhead = m_hat(r.m_ms, r.m_sbs, r.m_vbs);
  r.m_hat_overhead = m_hat(r.m_ms_overhead, r.m_sbs, r.m_vbs);
  r.m_hat = options.overhead ? r.m_hat_overhead : r.m_hat_no_overhead;

  r.ms_breakdown = sbs_breakdown(ms, archive, pairs);
  r.ms_overhead_breakdown = sbs_breakdown(ms_overhead, archive, pairs);
  r.sbs_breakdown = sbs_breakdown(per_solver[sbs_index], archive, pairs);
  r.vbs_breakdown = sbs_breakdown(vbs, archive, pairs);

  std::map<std::size_t, std::vector<EvalPair>> by_timestep;
  for (const EvalPair& p : pairs) by_timestep[p.timestep].push_back(p);
  for (const auto& [t, group] : by_timestep) {
    TimestepScore ts;
    ts.timestep = t;
    ts.pairs = group.size();
    const double sbs_t = cumulative_metric(per_solver[sbs_index], group, bounds);
    const double vbs_t = cumulative_metric(vbs, group, bounds);
    if (sbs_t > vbs_t) {
      ts.m_hat = m_hat(cumulative_metric(ms, group, bounds), sbs_t, vbs_t);
      ts.m_hat_overhead = m_hat(cumulative_metric(ms_overhead, group, bounds), sbs_t, vbs_t);
    } else {
      ts.m_hat = ts.m_hat_overhead = std::numeric_limits<double>::quiet_NaN();
    }
    r.per_timestep.push_back(ts);
  }
  return r;
}

EvalReport evaluate_selector(const TrainedModel& model, const RunArchive& archive, const LabeledDataset& ds,
                             const EvalOptions& options) {
  if (model.schema != ds.schema || model.encoding != ds.encoding)
    throw SchemaMismatchError("model was trained on " + std::string(to_string(model.schema)) +
                              " features but the dataset holds " + std::string(to_string(ds.schema)));
  if (!(model.vocabulary == ds.vocabulary)) throw SchemaMismatchError("model and dataset label vocabularies differ");
  const std::vector<std::size_t> test_rows = ds.rows_in(Split::Test);
  std::vector<std::size_t> predictions;
  std::vector<double> overhead;
  predictions.reserve(test_rows.size());
  overhead.reserve(test_rows.size());
  for (std::size_t r : test_rows) {
    const DatasetRow& row = ds.rows[r];
    const auto start = std::chrono::steady_clock::now();
    const std::size_t label = model.predict_row(row.features).label;
    const double predict_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto prep = ds.prep_seconds.find(row.instance_id);
    predictions.push_back(label);
    overhead.push_back(predict_seconds + (prep == ds.prep_seconds.end() ? 0.0 : prep->second));
  }
  return evaluate_predictions(archive, ds, predictions, overhead, options);
}

namespace {

std::string na_or(double v) { return std::isnan(v) ? std::string("NA") : format_double(v); }

}  // namespace

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << "evaluated_pairs = " << r.pair_count << '\n'
      << "test_rows = " << r.test_rows << '\n'
      << "accuracy = " << format_double(r.accuracy) << '\n'
      << "sbs = " << r.sbs << '\n'
      << "m_sbs = " << format_double(r.m_sbs) << '\n'
      << "m_vbs = " << format_double(r.m_vbs) << '\n'
      << "m_ms = " << format_double(r.m_ms) << '\n'
      << "m_ms_overhead = " << format_double(r.m_ms_overhead) << '\n'
      << "m_hat_no_overhead = " << format_double(r.m_hat_no_overhead) << '\n'
      << "m_hat_overhead = " << format_double(r.m_hat_overhead) << '\n'
      << "m_hat = " << format_double(r.m_hat) << (r.overhead ? " (overhead)" : " (no overhead)") << '\n'
      << "mean_overhead_seconds = " << format_double(r.mean_overhead_seconds) << '\n';
  for (std::size_t s = 0; s < r.m_solver.size(); ++s) out << "m_solver." << r.labels[s] << " = " << format_double(r.m_solver[s]) << '\n';
  return out.str();
}

std::string confusion_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "true\\predicted," << join(r.labels, ",") << '\n';
  for (std::size_t t = 0; t < r.confusion.size(); ++t) {
    out << r.labels[t];
    for (std::size_t c : r.confusion[t]) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

std::string timestep_series_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "timestep,pairs,m_hat,m_hat_overhead\n";
  for (const TimestepScore& t : r.per_timestep)
    out << t.timestep << ',' << t.pairs << ',' << na_or(t.m_hat) << ',' << na_or(t.m_hat_overhead) << '\n';
  return out.str();
}

std::string breakdown_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "policy,best_found,non_best,no_solution\n";
  auto line = [&](const std::string& name, const Breakdown& b) {
    out << name << ',' << b.best_found << ',' << b.non_best << ',' << b.none << '\n';
  };
  line("sbs:" + r.sbs, r.sbs_breakdown);
  line("meta_solver", r.ms_breakdown);
  line("meta_solver_overhead", r.ms_overhead_breakdown);
  line("vbs", r.vbs_breakdown);
  return out.str();
}

}  // namespace metaselect
