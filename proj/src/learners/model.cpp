#include "metaselect/learners/model.hpp"

#include <sstream>
#include <stdexcept>

#include "metaselect/text.hpp"

namespace metaselect {

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::RandomForest: return "rf";
    case ModelFamily::GradientBoosting: return "gb";
    case ModelFamily::Knn: return "knn";
  }
  return "?";
}

ModelFamily parse_model_family(std::string_view name) {
  if (name == "rf") return ModelFamily::RandomForest;
  if (name == "gb") return ModelFamily::GradientBoosting;
  if (name == "knn") return ModelFamily::Knn;
  throw std::invalid_argument("unknown model family: " + std::string(name) + " (expected rf, gb or knn)");
}

std::string_view to_string(ClassWeightMode mode) {
  return mode == ClassWeightMode::Uniform ? "uniform" : "inverse-frequency";
}

ClassWeightMode parse_class_weight_mode(std::string_view name) {
  if (name == "uniform") return ClassWeightMode::Uniform;
  if (name == "inverse-frequency") return ClassWeightMode::InverseFrequency;
  throw std::invalid_argument("unknown class weight mode: " + std::string(name));
}

std::vector<double> class_weights(std::span<const std::size_t> labels, std::size_t n_labels, ClassWeightMode mode) {
  std::vector<double> w(n_labels, 1.0);
  if (mode == ClassWeightMode::Uniform || labels.empty()) return w;
  std::vector<std::size_t> count(n_labels, 0);
  for (std::size_t l : labels) ++count.at(l);
  std::size_t present = 0;
  for (std::size_t c : count) present += c > 0;
  const double n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < n_labels; ++c)
    if (count[c] > 0) w[c] = n / (static_cast<double>(present) * static_cast<double>(count[c]));
  return w;
}

LearnerParams variant_params(ModelFamily family, FeatureSchema schema) {
  LearnerParams p;
  p.family = family;
  p.n_estimators = 100;
  p.max_depth = 3;
  switch (schema) {
    case FeatureSchema::Basic:
      p.learning_rate = 0.5;
      p.n_neighbors = 13;
      break;
    case FeatureSchema::Nonlinear:
      p.learning_rate = 0.25;
      p.n_neighbors = 21;
      break;
    case FeatureSchema::Linear:
      p.learning_rate = 0.1;
      p.n_neighbors = 21;
      break;
  }
  return p;
}

std::string TrainedModel::variant_name() const {
  std::string family;
  switch (params.family) {
    case ModelFamily::RandomForest: family = "RF"; break;
    case ModelFamily::GradientBoosting: family = "GB"; break;
    case ModelFamily::Knn: family = "KNN"; break;
  }
  return family + "_" + std::string(to_string(schema));
}

Prediction TrainedModel::predict(const FeatureVector& fv) const {
  if (fv.schema != schema)
    throw SchemaMismatchError("model expects " + std::string(to_string(schema)) + " features, got " +
                              std::string(to_string(fv.schema)));
  if (!fv.has_timestep) throw SchemaMismatchError("feature vector lacks the timestep column");
  return predict_row(fv.values);
}

Prediction TrainedModel::predict_row(std::span<const double> row) const {
  if (row.size() != input_size())
    throw SchemaMismatchError("model expects " + std::to_string(input_size()) + " inputs, got " +
                              std::to_string(row.size()));
  Prediction p;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ForestModel>) p.probabilities = forest_probabilities(m, row);
        else if constexpr (std::is_same_v<T, GradientBoostingModel>) p.probabilities = boosting_probabilities(m, row);
        else p.probabilities = knn_votes(m, row);
      },
      learner);
  p.label = argmax_first(p.probabilities);
  return p;
}

std::vector<double> TrainedModel::importances() const {
  if (const auto* forest = std::get_if<ForestModel>(&learner)) return mean_decrease_impurity(forest->trees, input_size());
  if (const auto* gb = std::get_if<GradientBoostingModel>(&learner)) {
    std::vector<DecisionTree> flat;
    for (const DecisionTree* t : boosting_trees(*gb)) flat.push_back(DecisionTree{{}, t->importance});
    return mean_decrease_impurity(flat, input_size());
  }
  return {};
}

TrainedModel train_model(const LabeledDataset& ds, const TrainOptions& options) {
  std::vector<std::size_t> rows = ds.rows_in(Split::Train);
  if (rows.empty() && ds.rows_in(Split::Test).empty()) {
    rows.resize(ds.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }
  if (rows.empty()) throw std::invalid_argument("dataset has no training rows");

  TrainedModel model;
  model.schema = ds.schema;
  model.encoding = ds.encoding;
  model.grid = ds.grid;
  model.vocabulary = ds.vocabulary;
  model.params = options.params;
  model.seed = options.seed;
  model.weight_mode = options.weight_mode;

  FeatureMatrix x(model.input_size());
  std::vector<std::size_t> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) {
    x.add_row(ds.rows[r].features);
    labels.push_back(ds.rows[r].label);
  }
  const std::size_t n_labels = model.vocabulary.size();
  model.weights = class_weights(labels, n_labels, options.weight_mode);

  switch (options.params.family) {
    case ModelFamily::RandomForest: {
      ForestParams fp;
      fp.n_estimators = options.params.n_estimators;
      fp.seed = options.seed;
      fp.threads = options.threads;
      model.learner = fit_random_forest(x, labels, n_labels, fp, model.weights);
      break;
    }
    case ModelFamily::GradientBoosting: {
      BoostingParams bp;
      bp.n_estimators = options.params.n_estimators;
      bp.learning_rate = options.params.learning_rate;
      bp.max_depth = options.params.max_depth;
      bp.seed = options.seed;
      model.learner = fit_gradient_boosting(x, labels, n_labels, bp, model.weights);
      break;
    }
    case ModelFamily::Knn:
      model.weights.assign(n_labels, 1.0);  // distance vote is unweighted
      model.learner = fit_knn(x, labels, n_labels, options.params.n_neighbors, options.params.standardize);
      break;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

class TokenReader {
 public:
  explicit TokenReader(std::string_view text) : words_(split_whitespace(text)) {}

  std::string_view next() {
    if (pos_ >= words_.size()) throw std::runtime_error("model file truncated");
    return words_[pos_++];
  }
  void expect(std::string_view word) {
    std::string_view got = next();
    if (got != word) throw std::runtime_error("model file: expected '" + std::string(word) + "', found '" + std::string(got) + "'");
  }
  std::size_t size() {
    std::string_view w = next();
    if (!is_integer_token(w) || w.front() == '-') throw std::runtime_error("model file: bad count '" + std::string(w) + "'");
    return std::stoull(std::string(w));
  }
  long long integer() { return std::stoll(std::string(next())); }
  double real() { return parse_double(next()); }
  std::vector<double> reals(std::size_t n) {
    std::vector<double> v(n);
    for (double& d : v) d = real();
    return v;
  }

 private:
  std::vector<std::string_view> words_;
  std::size_t pos_ = 0;
};

void write_reals(std::ostream& out, std::span<const double> v) {
  for (double d : v) out << ' ' << format_double(d);
}

void write_tree(std::ostream& out, const DecisionTree& t) {
  out << "tree " << t.nodes.size() << '\n';
  for (const TreeNode& n : t.nodes) {
    out << "node " << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
        << format_double(n.weight) << ' ' << n.value.size();
    write_reals(out, n.value);
    out << '\n';
  }
  out << "importance " << t.importance.size();
  write_reals(out, t.importance);
  out << '\n';
}

DecisionTree read_tree(TokenReader& in) {
  DecisionTree t;
  in.expect("tree");
  t.nodes.resize(in.size());
  for (TreeNode& n : t.nodes) {
    in.expect("node");
    n.feature = static_cast<std::int32_t>(in.integer());
    n.threshold = in.real();
    n.left = static_cast<std::uint32_t>(in.size());
    n.right = static_cast<std::uint32_t>(in.size());
    n.weight = in.real();
    n.value = in.reals(in.size());
    if (!n.is_leaf() && (n.left >= t.nodes.size() || n.right >= t.nodes.size()))
      throw std::runtime_error("model file: tree child index out of range");
  }
  in.expect("importance");
  t.importance = in.reals(in.size());
  return t;
}

}  // namespace

std::string format_model(const TrainedModel& m) {
  std::ostringstream out;
  out << "metaselect-model " << TrainedModel::kFormatVersion << '\n'
      << "family " << to_string(m.params.family) << '\n'
      << "schema " << to_string(m.schema) << ' ' << kFeatureSchemaVersion << '\n'
      << "encoding " << to_string(m.encoding) << '\n'
      << "grid " << m.grid.size() << ' ' << format_double(m.grid.horizon()) << ' ' << format_double(m.grid.t_min()) << '\n'
      << "solvers " << m.vocabulary.solver_count();
  for (const std::string& s : m.vocabulary.solvers()) out << ' ' << s;
  out << '\n'
      << "seed " << m.seed << '\n'
      << "class_weights " << to_string(m.weight_mode) << ' ' << m.weights.size();
  write_reals(out, m.weights);
  out << '\n'
      << "params " << m.params.n_estimators << ' ' << format_double(m.params.learning_rate) << ' ' << m.params.max_depth
      << ' ' << m.params.n_neighbors << ' ' << (m.params.standardize ? 1 : 0) << '\n';

  if (const auto* f = std::get_if<ForestModel>(&m.learner)) {
    out << "forest " << f->trees.size() << ' ' << f->n_classes << ' ' << f->n_features << ' ' << f->params.max_features
        << '\n';
    for (const DecisionTree& t : f->trees) write_tree(out, t);
  } else if (const auto* g = std::get_if<GradientBoostingModel>(&m.learner)) {
    out << "boosting " << g->stages.size() << ' ' << g->classes.size() << ' ' << g->n_labels << ' ' << g->n_features
        << ' ' << g->params.max_features << ' ' << format_double(g->params.learning_rate) << ' ' << g->params.max_depth
        << '\n'
        << "classes";
    for (std::size_t c : g->classes) out << ' ' << c;
    out << "\ninit";
    write_reals(out, g->initial_scores);
    out << "\nloss " << g->training_loss.size();
    write_reals(out, g->training_loss);
    out << '\n';
    for (const auto& stage : g->stages)
      for (const DecisionTree& t : stage) write_tree(out, t);
  } else {
    const auto& k = std::get<KnnModel>(m.learner);
    out << "knn " << k.k << ' ' << (k.standardize ? 1 : 0) << ' ' << k.points.rows() << ' ' << k.points.features() << ' '
        << k.n_labels << "\nmean";
    write_reals(out, k.mean);
    out << "\nstdev";
    write_reals(out, k.stdev);
    out << '\n';
    for (std::size_t i = 0; i < k.points.rows(); ++i) {
      out << "point " << k.labels[i];
      write_reals(out, k.points.row(i));
      out << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

TrainedModel parse_model(std::string_view text) {
  TokenReader in(text);
  in.expect("metaselect-model");
  const long long version = in.integer();
  if (version != TrainedModel::kFormatVersion)
    throw std::runtime_error("model format version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(TrainedModel::kFormatVersion) + ")");
  TrainedModel m;
  in.expect("family");
  m.params.family = parse_model_family(in.next());
  in.expect("schema");
  m.schema = parse_feature_schema(in.next());
  if (in.integer() != kFeatureSchemaVersion) throw std::runtime_error("model feature schema version is not supported");
  in.expect("encoding");
  m.encoding = parse_timestep_encoding(in.next());
  in.expect("grid");
  {
    const std::size_t count = in.size();
    const double horizon = in.real();
    m.grid = TimestepGrid(count, horizon, in.real());
  }
  in.expect("solvers");
  std::vector<std::string> solvers(in.size());
  for (std::string& s : solvers) s = in.next();
  m.vocabulary = LabelVocabulary(solvers);
  in.expect("seed");
  m.seed = std::stoull(std::string(in.next()));
  in.expect("class_weights");
  m.weight_mode = parse_class_weight_mode(in.next());
  m.weights = in.reals(in.size());
  in.expect("params");
  m.params.n_estimators = in.size();
  m.params.learning_rate = in.real();
  m.params.max_depth = in.size();
  m.params.n_neighbors = in.size();
  m.params.standardize = in.size() != 0;

  const std::string_view kind = in.next();
  if (kind == "forest") {
    ForestModel f;
    const std::size_t n_trees = in.size();
    f.n_classes = in.size();
    f.n_features = in.size();
    f.params.max_features = in.size();
    f.params.n_estimators = n_trees;
    f.params.seed = m.seed;
    for (std::size_t t = 0; t < n_trees; ++t) f.trees.push_back(read_tree(in));
    m.learner = std::move(f);
  } else if (kind == "boosting") {
    GradientBoostingModel g;
    const std::size_t n_stages = in.size(), n_classes = in.size();
    g.n_labels = in.size();
    g.n_features = in.size();
    g.params.max_features = in.size();
    g.params.learning_rate = in.real();
    g.params.max_depth = in.size();
    g.params.n_estimators = n_stages;
    g.params.seed = m.seed;
    in.expect("classes");
    for (std::size_t k = 0; k < n_classes; ++k) g.classes.push_back(in.size());
    in.expect("init");
    g.initial_scores = in.reals(n_classes);
    in.expect("loss");
    g.training_loss = in.reals(in.size());
    for (std::size_t s = 0; s < n_stages; ++s) {
      std::vector<DecisionTree> stage;
      for (std::size_t k = 0; k < n_classes; ++k) stage.push_back(read_tree(in));
      g.stages.push_back(std::move(stage));
    }
    m.learner = std::move(g);
  } else if (kind == "knn") {
    KnnModel k;
    k.k = in.size();
    k.standardize = in.size() != 0;
    const std::size_t rows = in.size(), d = in.size();
    k.n_labels = in.size();
    in.expect("mean");
    k.mean = in.reals(d);
    in.expect("stdev");
    k.stdev = in.reals(d);
    k.points = FeatureMatrix(d);
    for (std::size_t i = 0; i < rows; ++i) {
      in.expect("point");
      k.labels.push_back(in.size());
      k.points.add_row(in.reals(d));
    }
    m.learner = std::move(k);
  } else {
    throw std::runtime_error("model file: unknown learner block '" + std::string(kind) + "'");
  }
  in.expect("end");
  if (m.weights.size() != m.vocabulary.size()) throw std::runtime_error("model file: class weights do not match vocabulary");
  return m;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) { write_file(path, format_model(model)); }

TrainedModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

std::string describe_model(const TrainedModel& m) {
  std::ostringstream out;
  out << "key,value\n"
      << "variant," << m.variant_name() << '\n'
      << "family," << to_string(m.params.family) << '\n'
      << "schema," << to_string(m.schema) << '\n'
      << "timestep_encoding," << to_string(m.encoding) << '\n'
      << "grid," << m.grid.size() << ' ' << format_double(m.grid.horizon()) << ' ' << format_double(m.grid.t_min()) << '\n'
      << "labels," << join(m.vocabulary.names(), " ") << '\n'
      << "seed," << m.seed << '\n'
      << "class_weights," << to_string(m.weight_mode) << '\n';
  switch (m.params.family) {
    case ModelFamily::RandomForest:
      out << "n_estimators," << m.params.n_estimators << "\nmax_features,sqrt\ncriterion,gini\n";
      break;
    case ModelFamily::GradientBoosting:
      out << "n_estimators," << m.params.n_estimators << "\nlearning_rate," << format_double(m.params.learning_rate)
          << "\nmax_depth," << m.params.max_depth << "\nmax_features,sqrt\n";
      break;
    case ModelFamily::Knn:
      out << "n_neighbors," << m.params.n_neighbors << "\nstandardize," << (m.params.standardize ? "true" : "false")
          << '\n';
      break;
  }
  const std::vector<double> mdi = m.importances();
  if (!mdi.empty()) {
    out << "\nfeature,mdi\n";
    const auto names = feature_names(m.schema, true);
    for (std::size_t f = 0; f < mdi.size(); ++f) out << names[f] << ',' << format_double(mdi[f]) << '\n';
  }
  return out.str();
}

}  // namespace metaselect
