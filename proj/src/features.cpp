#include "metaselect/features.hpp"

#include <array>
#include <chrono>

#include "metaselect/grid.hpp"

namespace metaselect {

std::string_view to_string(FeatureSchema schema) {
  switch (schema) {
    case FeatureSchema::Basic: return "basic";
    case FeatureSchema::Nonlinear: return "nonlinear";
    case FeatureSchema::Linear: return "linear";
  }
  return "?";
}

FeatureSchema parse_feature_schema(std::string_view name) {
  if (name == "basic") return FeatureSchema::Basic;
  if (name == "nonlinear") return FeatureSchema::Nonlinear;
  if (name == "linear") return FeatureSchema::Linear;
  throw std::invalid_argument("unknown feature schema: " + std::string(name));
}

std::string_view to_string(TimestepEncoding encoding) {
  return encoding == TimestepEncoding::Index ? "index" : "seconds";
}

TimestepEncoding parse_timestep_encoding(std::string_view name) {
  if (name == "index") return TimestepEncoding::Index;
  if (name == "seconds") return TimestepEncoding::Seconds;
  throw std::invalid_argument("unknown timestep encoding: " + std::string(name));
}

namespace {

const std::array<const char*, 14> kNonlinearNames = {
    "n_constraints", "n_variables", "nonlinear", "c_terms_1", "c_terms_2", "c_terms_3", "c_terms_4plus",
    "degree_1",      "degree_2",    "degree_3",  "degree_4plus", "obj_size", "pos_constr", "pos_obj"};

// Indices of kNonlinearNames kept by the linear schema.
constexpr std::array<std::size_t, 9> kLinearColumns = {0, 1, 3, 4, 5, 6, 11, 12, 13};

double share(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

std::size_t bucket(std::size_t n) { return n >= 4 ? 3 : n - 1; }

void require_objective(const Instance& inst) {
  if (!inst.has_objective())
    throw MissingObjectiveError("instance '" + inst.source_name + "' has no objective function");
}

}  // namespace

std::size_t feature_count(FeatureSchema schema) {
  switch (schema) {
    case FeatureSchema::Basic: return 2;
    case FeatureSchema::Nonlinear: return kNonlinearNames.size();
    case FeatureSchema::Linear: return kLinearColumns.size();
  }
  return 0;
}

std::vector<std::string> feature_names(FeatureSchema schema, bool with_timestep) {
  std::vector<std::string> names;
  switch (schema) {
    case FeatureSchema::Basic: names = {kNonlinearNames[0], kNonlinearNames[1]}; break;
    case FeatureSchema::Nonlinear: names.assign(kNonlinearNames.begin(), kNonlinearNames.end()); break;
    case FeatureSchema::Linear:
      for (std::size_t c : kLinearColumns) names.emplace_back(kNonlinearNames[c]);
      break;
  }
  if (with_timestep) names.emplace_back("timestep");
  return names;
}

FeatureVector extract_nonlinear(const Instance& inst) {
  require_objective(inst);

  std::array<std::size_t, 4> by_length{};
  std::array<std::size_t, 4> by_degree{};
  std::size_t constraint_terms = 0;
  std::size_t positive_constraint_terms = 0;
  std::size_t nonempty_constraints = 0;
  bool nonlinear = false;

  auto count_term = [&](const Term& t) {
    ++by_degree[bucket(t.degree())];
    if (t.degree() >= 2) nonlinear = true;
  };

  for (const Constraint& c : inst.constraints) {
    // A constraint whose terms all cancelled to zero has no length class.
    if (!c.terms.empty()) {
      ++by_length[bucket(c.terms.size())];
      ++nonempty_constraints;
    }
    for (const Term& t : c.terms) {
      count_term(t);
      ++constraint_terms;
      if (t.coefficient > 0) ++positive_constraint_terms;
    }
  }
  std::size_t positive_objective_terms = 0;
  for (const Term& t : *inst.objective) {
    count_term(t);
    if (t.coefficient > 0) ++positive_objective_terms;
  }
  const std::size_t objective_terms = inst.objective->size();
  const std::size_t total_terms = constraint_terms + objective_terms;

  FeatureVector fv;
  fv.schema = FeatureSchema::Nonlinear;
  fv.values.reserve(kNonlinearNames.size());
  fv.values.push_back(static_cast<double>(inst.constraints.size()));
  fv.values.push_back(static_cast<double>(inst.declared_variables));
  fv.values.push_back(nonlinear ? 1.0 : 0.0);
  for (std::size_t n : by_length) fv.values.push_back(share(n, nonempty_constraints));
  for (std::size_t n : by_degree) fv.values.push_back(share(n, total_terms));
  fv.values.push_back(share(objective_terms, total_terms));
  fv.values.push_back(share(positive_constraint_terms, constraint_terms));
  fv.values.push_back(share(positive_objective_terms, objective_terms));
  return fv;
}

FeatureVector extract_linear(const Instance& inst) {
  require_objective(inst);
  const FeatureVector full = extract_nonlinear(linearize(inst));
  FeatureVector fv;
  fv.schema = FeatureSchema::Linear;
  for (std::size_t c : kLinearColumns) fv.values.push_back(full.values[c]);
  return fv;
}

FeatureVector extract_basic(const Instance& inst) {
  FeatureVector fv;
  fv.schema = FeatureSchema::Basic;
  fv.values = {static_cast<double>(inst.constraints.size()), static_cast<double>(inst.declared_variables)};
  return fv;
}

FeatureVector extract(const Instance& inst, FeatureSchema schema) {
  switch (schema) {
    case FeatureSchema::Basic: return extract_basic(inst);
    case FeatureSchema::Nonlinear: return extract_nonlinear(inst);
    case FeatureSchema::Linear: return extract_linear(inst);
  }
  throw std::invalid_argument("unknown feature schema");
}

double encode_timestep(std::size_t timestep_index, const TimestepGrid& grid, TimestepEncoding encoding) {
  if (timestep_index >= grid.size())
    throw std::out_of_range("timestep index " + std::to_string(timestep_index) + " outside grid of " +
                            std::to_string(grid.size()));
  return encoding == TimestepEncoding::Index ? static_cast<double>(timestep_index) : grid[timestep_index];
}

FeatureVector append_timestep(FeatureVector fv, std::size_t timestep_index, const TimestepGrid& grid,
                              TimestepEncoding encoding) {
  if (fv.has_timestep) throw std::logic_error("feature vector already carries a timestep");
  fv.values.push_back(encode_timestep(timestep_index, grid, encoding));
  fv.has_timestep = true;
  return fv;
}

TimedFeatures extract_timed(const Instance& inst, FeatureSchema schema) {
  const auto start = std::chrono::steady_clock::now();
  TimedFeatures out{extract(inst, schema), 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace metaselect
