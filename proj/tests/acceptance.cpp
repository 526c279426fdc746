// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include "metaselect/eval.hpp"
#include "metaselect/features.hpp"
#include "metaselect/learners/model.hpp"
#include "metaselect/text.hpp"
#include "support.hpp"

using namespace metaselect;
namespace fs = std::filesystem;

namespace {

/// Collects the first few failure messages of a criterion.
struct Check {
  std::size_t failures = 0;
  std::vector<std::string> notes;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ < 3) notes.push_back(what);
  }
};

bool close(double a, long double b, double tol = 1e-12) {
  return std::abs(static_cast<long double>(a) - b) <= tol * std::max(1.0L, std::abs(b));
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// 1 ------------------------------------------------------------------------

void metric_oracle(Check& c) {
  Rng rng(1001);
  std::size_t compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const RunArchive a = support::random_archive(rng, {}, 1);
    std::vector<std::string> ids;
    for (const InstanceRecord& r : a.instances()) ids.push_back(r.instance_id);
    const auto pairs = evaluated_pairs(a, ids);
    const BoundsTable bounds = bounds_table(a, ids);
    const support::OracleScores o = support::oracle_scores(a);
    c.expect(pairs.size() == o.pairs, "pair count");

    for (const EvalPair& p : pairs) {
      const support::OracleBounds ob = support::oracle_bounds(a, p.instance_id);
      for (const std::string& s : a.solver_ids()) {
        const auto ov = support::oracle_standing(a.at(p.instance_id, s), a.grid()[p.timestep]).value;
        const double got = normalize(a.at(p.instance_id, s).sampled[p.timestep], bounds.at(p.instance_id));
        const long double want = support::oracle_normalize(ov, ob);
        // exact on the integer branches, tolerance on the division branch
        if (!ov || ob.lo == ob.hi || *ov == ob.lo || *ov == ob.hi)
          c.expect(static_cast<long double>(got) == want, "normalize branch value");
        else
          c.expect(close(got, want), "normalize ratio");
      }
    }
    for (std::size_t s = 0; s < a.solver_ids().size(); ++s)
      c.expect(close(cumulative_metric(solver_policy(a, a.solver_ids()[s], pairs), pairs, bounds), o.m_solver[s]),
               "m_s");
    c.expect(close(cumulative_metric(vbs_policy(a, pairs), pairs, bounds), o.m_vbs), "m_VBS");

    // random selector with random overhead against the oracle selector
    const LabeledDataset ds = support::dataset_from_archive(a);
    const auto test = ds.rows_in(Split::Test);
    std::vector<std::size_t> preds;
    std::vector<double> overhead;
    long double m_ms = 0.0L, m_ms_ov = 0.0L;
    for (std::size_t r : test) {
      const DatasetRow& row = ds.rows[r];
      preds.push_back(rng.index(ds.vocabulary.size()));
      overhead.push_back(rng.index(3) == 0 ? 0.0 : rng.uniform() * 4.0);
      if (std::find(pairs.begin(), pairs.end(), EvalPair{row.instance_id, row.timestep}) == pairs.end()) continue;
      const auto ob = support::oracle_bounds(a, row.instance_id);
      if (preds.back() >= a.solver_ids().size()) {
        m_ms += 2.0L;
        m_ms_ov += 2.0L;
        continue;
      }
      const std::string& s = a.solver_ids()[preds.back()];
      m_ms += support::oracle_normalize(support::oracle_selector_value(a, row.instance_id, s, row.timestep, 0.0), ob);
      m_ms_ov += support::oracle_normalize(
          support::oracle_selector_value(a, row.instance_id, s, row.timestep, overhead.back()), ob);
    }
    std::size_t sbs = 0;
    for (std::size_t s = 1; s < o.m_solver.size(); ++s)
      if (o.m_solver[s] < o.m_solver[sbs]) sbs = s;
    const bool degenerate = !(o.m_solver[sbs] > o.m_vbs);
    try {
      const EvalReport rep = evaluate_predictions(a, ds, preds, overhead, {});
      c.expect(!degenerate, "degenerate archive accepted");
      c.expect(rep.sbs == a.solver_ids()[sbs], "SBS choice");
      c.expect(close(rep.m_ms, m_ms), "m_ms");
      c.expect(close(rep.m_ms_overhead, m_ms_ov), "m_ms with overhead");
      const long double span = o.m_solver[sbs] - o.m_vbs;
      c.expect(close(rep.m_hat_no_overhead, (m_ms - o.m_vbs) / span, 1e-9), "m_hat");
      c.expect(close(rep.m_hat_overhead, (m_ms_ov - o.m_vbs) / span, 1e-9), "m_hat with overhead");
      ++compared;
    } catch (const DegeneratePortfolioError&) {
      c.expect(degenerate, "spurious degenerate-portfolio error");
    }
  }
  c.detail = "200 archives, " + std::to_string(compared) + " non-degenerate ones scored end to end";
}

// 2 ------------------------------------------------------------------------

void normalization_cases(Check& c) {
  const auto b = [](long lo, long hi) { return InstanceBounds{BigInt(lo), BigInt(hi), true}; };
  c.expect(normalize(BigInt(7), b(7, 7)) == 0.0, "o = o_min = o_max gives 0");
  c.expect(normalize(std::nullopt, b(7, 7)) == 2.0, "undefined gives 2");
  c.expect(normalize(std::nullopt, b(3, 9)) == 2.0, "undefined gives 2 on a range");
  c.expect(normalize(BigInt(15), b(10, 20)) == 0.5, "ratio");
  c.expect(normalize(BigInt(12), b(10, 20)) == 0.2, "ratio 0.2");
  Rng rng(1002);
  for (int i = 0; i < 100000; ++i) {
    const long lo = support::uniform_int(rng, -1000000, 1000000);
    const long hi = lo + (rng.index(5) == 0 ? 0 : support::uniform_int(rng, 0, 1000000));
    const std::optional<BigInt> o =
        rng.index(8) == 0 ? std::nullopt : std::optional<BigInt>(BigInt(support::uniform_int(rng, lo, hi)));
    const double n = normalize(o, b(lo, hi));
    c.expect((n >= 0.0 && n <= 1.0) || n == 2.0, "co-domain");
  }
  c.detail = "1e5 fuzz inputs";
}

// 3 ------------------------------------------------------------------------

void anchors(Check& c) {
  Rng rng(1003);
  std::size_t scored = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const RunArchive a = support::random_archive(rng, {}, 2);
    std::vector<std::string> ids;
    for (const InstanceRecord& r : a.instances()) ids.push_back(r.instance_id);
    const auto pairs = evaluated_pairs(a, ids);
    if (pairs.empty()) continue;
    const BoundsTable bounds = bounds_table(a, ids);
    const double m_vbs = cumulative_metric(vbs_policy(a, pairs), pairs, bounds);
    std::vector<double> m_s;
    for (const std::string& s : a.solver_ids()) m_s.push_back(cumulative_metric(solver_policy(a, s, pairs), pairs, bounds));
    const std::size_t sbs = static_cast<std::size_t>(std::min_element(m_s.begin(), m_s.end()) - m_s.begin());
    if (!(m_s[sbs] > m_vbs)) continue;
    c.expect(m_hat(m_vbs, m_s[sbs], m_vbs) == 0.0, "VBS policy");
    c.expect(m_hat(m_s[sbs], m_s[sbs], m_vbs) == 1.0, "SBS policy");

    const LabeledDataset ds = support::dataset_from_archive(a);
    const auto test = ds.rows_in(Split::Test);
    std::vector<std::size_t> oracle, always_sbs(test.size(), sbs);
    for (std::size_t r : test) oracle.push_back(ds.rows[r].label);
    const std::vector<double> zero(test.size(), 0.0);
    c.expect(evaluate_predictions(a, ds, oracle, zero, {}).m_hat == 0.0, "perfect selector");
    c.expect(evaluate_predictions(a, ds, always_sbs, zero, {}).m_hat == 1.0, "SBS selector");
    ++scored;
  }
  c.detail = std::to_string(scored) + " archives";
}

// 4 ------------------------------------------------------------------------

void labeling_oracle(Check& c) {
  Rng rng(1004);
  std::size_t tied = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 1 + rng.index(5);
    std::vector<PairStanding> st(n);
    std::vector<support::OracleStanding> os(n);
    const bool force_tie = i % 4 == 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (!force_tie && rng.index(4) == 0) continue;
      const long v = force_tie ? 3 : support::uniform_int(rng, 0, 4);
      const double t = force_tie && rng.index(2) == 0 ? 1.0 : 0.5 * static_cast<double>(rng.index(4));
      st[s] = {BigInt(v), t};
      os[s] = {v, t};
    }
    const std::size_t got = label_pair(st, n);
    c.expect(got == support::oracle_label(os), "label mismatch");
    std::size_t best_count = 0;
    for (const auto& x : os)
      if (x.value && got < n && x.value == os[got].value) ++best_count;
    tied += best_count > 1;
  }
  c.detail = std::to_string(tied) + " configurations with value ties";
  c.expect(tied > 1000, "too few ties generated");
}

// 5 ------------------------------------------------------------------------

void feature_checks(Check& c) {
  const Instance toy = parse_opb("* #variable= 2 #constraint= 1\nmin: +1 x1 -2 x2 ;\n+1 x1 +1 x2 >= 1 ;\n");
  c.expect(extract_nonlinear(toy).values == std::vector<double>{1, 2, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0.5, 1.0, 0.5},
           "toy vector");
  Rng rng(1005);
  for (int i = 0; i < 1000; ++i) {
    const Instance inst =
        support::random_instance(rng, {.max_variables = 50, .max_constraints = 15, .max_terms = 8, .max_degree = 5});
    const auto v = extract_nonlinear(inst).values;
    if (!inst.constraints.empty()) c.expect(std::abs(v[3] + v[4] + v[5] + v[6] - 1.0) <= 1e-12, "c_terms sum");
    c.expect(std::abs(v[7] + v[8] + v[9] + v[10] - 1.0) <= 1e-12, "degree sum");
    Instance shuffled = inst;
    rng.shuffle(shuffled.constraints);
    for (Constraint& k : shuffled.constraints) rng.shuffle(k.terms);
    rng.shuffle(*shuffled.objective);
    c.expect(extract_nonlinear(shuffled).values == v, "reordering changed the vector");
  }
  c.detail = "toy + 1000 random instances";
}

// 6 ------------------------------------------------------------------------

std::vector<bool> bits(std::uint64_t m, std::size_t n) {
  std::vector<bool> a(n + 1, false);
  for (std::size_t i = 0; i < n; ++i) a[i + 1] = (m >> i) & 1U;
  return a;
}

void linearizer_soundness(Check& c) {
  Rng rng(1006);
  std::size_t exhaustive = 0, checked = 0;
  for (int i = 0; i < 400; ++i) {
    const Instance inst = support::random_instance(rng, {.max_variables = 12, .max_constraints = 5, .max_terms = 5});
    const Instance lin = linearize(inst);
    const std::size_t n = inst.declared_variables;
    const std::size_t total = lin.declared_variables;
    std::vector<std::vector<Literal>> products;
    // auxiliary k stands for the k-th distinct product in first-occurrence order
    std::map<std::vector<Literal>, bool> seen;
    auto collect = [&](const std::vector<Term>& terms) {
      for (const Term& t : terms)
        if (t.degree() >= 2 && seen.emplace(t.literals, true).second) products.push_back(t.literals);
    };
    if (inst.objective) collect(*inst.objective);
    for (const Constraint& k : inst.constraints) collect(k.terms);
    c.expect(total == n + products.size(), "auxiliary count");
    for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
      const std::vector<bool> a = bits(m, n);
      std::vector<bool> ext = a;
      for (const auto& lits : products) ext.push_back(term_value(Term{1, lits}, a));
      c.expect(satisfies(lin, ext) == satisfies(inst, a), "forced extension disagrees");
    }
    ++checked;
    if (total <= 16) {
      // no satisfying assignment of the linearized instance sets an auxiliary wrongly
      for (std::uint64_t m = 0; m < (1ULL << total); ++m) {
        const std::vector<bool> full = bits(m, total);
        if (!satisfies(lin, full)) continue;
        const std::vector<bool> a(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n + 1));
        for (std::size_t k = 0; k < products.size(); ++k)
          c.expect(full[n + 1 + k] == term_value(Term{1, products[k]}, a), "auxiliary not forced");
        c.expect(satisfies(inst, a), "projection does not satisfy the original");
      }
      ++exhaustive;
    }
  }
  c.detail = std::to_string(checked) + " instances, " + std::to_string(exhaustive) + " with every auxiliary value enumerated";
}

// 7 ------------------------------------------------------------------------

LabeledDataset learner_dataset(Rng& rng, std::size_t instances) {
  LabeledDataset ds;
  ds.schema = FeatureSchema::Nonlinear;
  ds.grid = TimestepGrid(6, 10.0, 0.1);
  ds.vocabulary = LabelVocabulary({"A", "B", "C"});
  for (std::size_t i = 0; i < instances; ++i) {
    std::vector<double> base(14);
    for (double& v : base) v = rng.uniform();
    base[2] = 1.0;  // constant column, never split on
    for (std::size_t t = 0; t < 6; ++t) {
      std::vector<double> row = base;
      row.push_back(static_cast<double>(t));
      const std::size_t label = base[0] < 0.15 ? 3 : (base[1] + 0.1 * static_cast<double>(t) < 0.6 ? 0 : (base[4] < 0.5 ? 1 : 2));
      ds.rows.push_back({"b" + std::to_string(i % 3), "i" + std::to_string(i), t, row, label});
    }
  }
  split_by_benchmark(ds, 9);
  return ds;
}

void learner_properties(Check& c) {
  Rng rng(1007);
  const LabeledDataset ds = learner_dataset(rng, 120);
  const fs::path dir = support::temp_dir("acceptance-learners");
  for (ModelFamily family : {ModelFamily::RandomForest, ModelFamily::GradientBoosting, ModelFamily::Knn}) {
    const TrainOptions opts{variant_params(family, ds.schema), ClassWeightMode::InverseFrequency, 17, 1};
    save_model(dir / "a.model", train_model(ds, opts));
    save_model(dir / "b.model", train_model(ds, opts));
    c.expect(read_file(dir / "a.model") == read_file(dir / "b.model"),
             std::string(to_string(family)) + " model files differ between runs");
  }
  fs::remove_all(dir);

  const TrainedModel rf = train_model(ds, {variant_params(ModelFamily::RandomForest, ds.schema), ClassWeightMode::InverseFrequency, 3, 1});
  for (const DatasetRow& row : ds.rows) {
    const auto p = rf.predict_row(row.features).probabilities;
    c.expect(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-9, "RF probabilities do not sum to 1");
  }
  const auto mdi = rf.importances();
  c.expect(std::abs(std::accumulate(mdi.begin(), mdi.end(), 0.0) - 1.0) <= 1e-9, "MDI does not sum to 1");
  c.expect(mdi[2] == 0.0, "constant feature has importance");

  LearnerParams gb = variant_params(ModelFamily::GradientBoosting, ds.schema);
  gb.learning_rate = 0.25;
  const TrainedModel g = train_model(ds, {gb, ClassWeightMode::InverseFrequency, 3, 1});
  const auto& loss = std::get<GradientBoostingModel>(g.learner).training_loss;
  c.expect(loss.size() == gb.n_estimators, "GB stage count");
  for (std::size_t s = 1; s < loss.size(); ++s) c.expect(loss[s] <= loss[s - 1] + 1e-12, "GB loss increased");

  FeatureMatrix x(4);
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < 300; ++i) {
    std::vector<double> row(4);
    for (double& v : row) v = rng.uniform() * 100.0;
    x.add_row(row);
    y.push_back(rng.index(5));
  }
  const KnnModel knn = fit_knn(x, y, 5, 1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) hits += predict_knn(knn, x.row(i)) == y[i];
  c.expect(hits == x.rows(), "KNN k=1 training accuracy below 100%");
  c.detail = "GB final loss " + fmt(loss.back());
}

// 8 ------------------------------------------------------------------------

/// Random OPB text with 5..60 variables and a 10-term objective.
std::string synthetic_instance(Rng& rng) {
  const long n = support::uniform_int(rng, 5, 60);
  const long positives = support::uniform_int(rng, 0, 10);
  std::string text = "* #variable= " + std::to_string(n) + " #constraint= 3\nmin:";
  for (long k = 0; k < 10; ++k)
    text += (k < positives ? " +" : " -") + std::to_string(1 + rng.index(9)) + " x" + std::to_string(1 + rng.index(n));
  text += " ;\n";
  for (int k = 0; k < 3; ++k) {
    const long terms = support::uniform_int(rng, 1, 4);
    for (long j = 0; j < terms; ++j) {
      text += "+1";
      const long degree = support::uniform_int(rng, 1, 3);
      const std::size_t first = rng.index(static_cast<std::size_t>(n - 2));
      for (long d = 0; d < degree; ++d) text += " x" + std::to_string(first + 1 + static_cast<std::size_t>(d));
      text += " ";
    }
    text += ">= 1 ;\n";
  }
  return text;
}

/// Intended winner: solver index from problem size, objective sign balance and time regime.
std::size_t designated(const std::vector<double>& f, bool late) {
  const std::size_t big = f[1] > 30.0 ? 1 : 0;
  const std::size_t positive = f[13] > 0.5 ? 1 : 0;
  const std::size_t early = 2 * big + positive;
  return late ? (early + 2) % 4 : early;
}

void synthetic_end_to_end(Check& c) {
  Rng rng(1008);
  const fs::path dir = support::temp_dir("acceptance-e2e");
  const TimestepGrid grid(100, 3600.0, 0.01);
  const std::vector<std::string> solvers{"alpha", "beta", "gamma", "delta"};
  std::vector<InstanceRecord> recs;
  for (int i = 0; i < 300; ++i) {
    const std::string id = "inst" + std::to_string(i);
    const fs::path p = dir / (id + ".opb");
    write_file(p, synthetic_instance(rng));
    recs.push_back({id, "bench" + std::to_string(i % 10), p});
  }
  // Everyone is feasible before the first grid point; afterwards the winner of
  // grid point j reports a new record low just before t_j.
  RunArchive archive(grid, solvers, recs);
  std::size_t noisy = 0;
  for (const InstanceRecord& r : recs) {
    const auto f = extract_nonlinear(parse_opb_file(r.path.string())).values;
    std::vector<std::vector<IncumbentEvent>> ev(solvers.size());
    for (std::size_t s = 0; s < solvers.size(); ++s) ev[s].push_back({0.001, BigInt(5000 + static_cast<long>(s))});
    for (std::size_t j = 0; j < grid.size(); ++j) {
      std::size_t w = designated(f, j >= 50);
      if (rng.uniform() < 0.05) w = (w + 1 + rng.index(3)) % 4, ++noisy;
      const double when = j == 0 ? 0.005 : (grid[j - 1] + grid[j]) / 2.0;
      ev[w].push_back({when, BigInt(1000 - 10 * static_cast<long>(j))});
    }
    for (std::size_t s = 0; s < solvers.size(); ++s) archive.put(make_trajectory(solvers[s], r.instance_id, ev[s], grid));
  }
  const auto started = std::chrono::steady_clock::now();
  LabeledDataset ds = build_dataset(archive, {FeatureSchema::Nonlinear, TimestepEncoding::Index});
  split_by_benchmark(ds, 7);
  const TrainedModel model =
      train_model(ds, {variant_params(ModelFamily::RandomForest, ds.schema), ClassWeightMode::InverseFrequency, 11, 1});
  const EvalReport off = evaluate_selector(model, archive, ds, {.overhead = false});
  const EvalReport on = evaluate_selector(model, archive, ds, {.overhead = true});
  fs::remove_all(dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  c.expect(ds.rows.size() == 30000, "row count");
  c.expect(ds.rows_in(Split::Test).size() == 9000, "70/30 split");
  c.expect(off.accuracy >= 0.90, "accuracy " + fmt(off.accuracy) + " < 0.90");
  c.expect(off.m_hat_no_overhead <= 0.3, "m_hat " + fmt(off.m_hat_no_overhead) + " > 0.3");
  c.expect(on.m_hat_overhead >= off.m_hat_no_overhead, "overhead improved m_hat");
  c.expect(secs < 120.0, "too slow");
  c.detail = "accuracy " + fmt(off.accuracy) + ", m_hat " + fmt(off.m_hat_no_overhead) + ", with overhead " +
             fmt(on.m_hat_overhead) + ", " + std::to_string(noisy) + " noisy labels";
}

// 9 ------------------------------------------------------------------------

void split_checks(Check& c) {
  Rng rng(1009);
  for (int profile = 0; profile < 100; ++profile) {
    LabeledDataset ds;
    ds.grid = TimestepGrid(2, 10.0, 1.0);
    ds.vocabulary = LabelVocabulary({"A"});
    std::map<std::string, std::size_t> sizes;
    const std::size_t benchmarks = 1 + rng.index(8);
    for (std::size_t b = 0; b < benchmarks; ++b) {
      const std::string bench = "b" + std::to_string(b);
      sizes[bench] = 1 + rng.index(40);
      for (std::size_t i = 0; i < sizes[bench]; ++i)
        for (std::size_t t = 0; t < 2; ++t)
          ds.rows.push_back({bench, bench + "_" + std::to_string(i), t, {0.0, 0.0, double(t)}, 0});
    }
    const std::uint64_t seed = rng.next();
    LabeledDataset a = ds, b = ds;
    split_by_benchmark(a, seed);
    split_by_benchmark(b, seed);
    c.expect(a.split == b.split, "same seed gave different splits");
    for (const auto& [bench, k] : sizes) {
      std::size_t train = 0;
      for (const auto& [id, sp] : a.split) train += id.rfind(bench + "_", 0) == 0 && sp == Split::Train;
      const std::size_t want = std::clamp<std::size_t>((7 * k + 9) / 10, 1, k);
      c.expect(train == want, bench + ": " + std::to_string(train) + " train of " + std::to_string(k));
    }
  }
  c.detail = "100 profiles";
}

// 10 -----------------------------------------------------------------------

void latency(Check& c) {
  Rng rng(1010);
  const LabeledDataset ds = learner_dataset(rng, 400);
  const TrainedModel model =
      train_model(ds, {variant_params(ModelFamily::RandomForest, ds.schema), ClassWeightMode::InverseFrequency, 5, 1});
  c.expect(std::get<ForestModel>(model.learner).trees.size() == 100, "tree count");
  c.expect(model.input_size() == 15, "input width");
  std::vector<double> times;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& row = ds.rows[i % ds.rows.size()].features;
    const auto start = std::chrono::steady_clock::now();
    (void)model.predict_row(row);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::nth_element(times.begin(), times.begin() + 500, times.end());
  c.expect(times[500] <= 0.010, "median above 10 ms");
  c.detail = "median " + fmt(times[500] * 1000.0) + " ms";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"metric oracle equivalence", metric_oracle},
      {"normalization case table", normalization_cases},
      {"m_hat anchors", anchors},
      {"labeling oracle", labeling_oracle},
      {"feature correctness", feature_checks},
      {"linearizer soundness", linearizer_soundness},
      {"learner properties", learner_properties},
      {"synthetic end-to-end", synthetic_end_to_end},
      {"split determinism and ratio", split_checks},
      {"prediction latency", latency},
  };
  const std::vector<double> limits{10.0, 0, 0, 0, 0, 0, 0, 120.0, 0, 0};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limits[i] > 0 && secs >= limits[i]) c.expect(false, "runtime " + fmt(secs) + " s over " + fmt(limits[i]) + " s");
    const bool ok = c.failures == 0;
    failed += !ok;
    std::printf("criterion %2zu %s  %-30s %7.2fs  %s", i + 1, ok ? "PASS" : "FAIL", criteria[i].first.c_str(), secs,
                c.detail.c_str());
    for (const std::string& n : c.notes) std::printf(" | %s", n.c_str());
    if (c.failures > c.notes.size()) std::printf(" | %zu failures in total", c.failures);
    std::printf("\n");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
