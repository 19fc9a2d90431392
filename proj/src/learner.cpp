#include "hetsurr/learner.hpp"

#include <cmath>
#include <limits>

#include "hetsurr/errors.hpp"

namespace hetsurr {

using nlohmann::json;

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::linear: return "linear";
    case Family::gam: return "gam";
    case Family::forest: return "forest";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "linear") return Family::linear;
  if (name == "gam") return Family::gam;
  if (name == "forest") return Family::forest;
  throw ArgumentError("unknown learner family '" + std::string(name) + "' (expected linear, gam or forest)");
}

std::vector<double> log_spaced_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ArgumentError("invalid log-spaced grid");
  std::vector<double> grid;
  if (count == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) grid.push_back(std::pow(10.0, a + (b - a) * i / (count - 1)));
  return grid;
}

void LearnerSpec::check() const {
  if (gam.basis_size < 4) throw ArgumentError("gam basis_size must be at least 4");
  if (gam.lambda_grid.empty()) throw ArgumentError("gam lambda_grid must not be empty");
  for (std::size_t i = 0; i < gam.lambda_grid.size(); ++i) {
    if (!(gam.lambda_grid[i] > 0.0) || !std::isfinite(gam.lambda_grid[i]))
      throw ArgumentError("gam lambda_grid entries must be finite and positive");
    if (i > 0 && !(gam.lambda_grid[i] > gam.lambda_grid[i - 1]))
      throw ArgumentError("gam lambda_grid must be strictly ascending");
  }
  if (forest.num_trees < 1) throw ArgumentError("forest num_trees must be at least 1");
  if (forest.mtry < 0) throw ArgumentError("forest mtry must be 0 (auto) or positive");
  if (forest.min_node_size < 1) throw ArgumentError("forest min_node_size must be at least 1");
  if (!(forest.honesty_fraction > 0.0 && forest.honesty_fraction < 1.0))
    throw ArgumentError("forest honesty_fraction must lie in (0, 1)");
  if (!(forest.subsample_fraction > 0.0 && forest.subsample_fraction <= 1.0))
    throw ArgumentError("forest subsample_fraction must lie in (0, 1]");
}

json to_json(const LearnerSpec& spec) {
  return {{"family", to_string(spec.family)},
          {"gam", {{"basis_size", spec.gam.basis_size}, {"lambda_grid", spec.gam.lambda_grid}}},
          {"forest",
           {{"num_trees", spec.forest.num_trees},
            {"mtry", spec.forest.mtry},
            {"min_node_size", spec.forest.min_node_size},
            {"honesty_fraction", spec.forest.honesty_fraction},
            {"subsample_fraction", spec.forest.subsample_fraction}}}};
}

LearnerSpec learner_spec_from_json(const json& j) {
  LearnerSpec spec;
  spec.family = parse_family(j.at("family").get<std::string>());
  if (j.contains("gam")) {
    const auto& g = j.at("gam");
    spec.gam.basis_size = g.value("basis_size", spec.gam.basis_size);
    if (g.contains("lambda_grid")) spec.gam.lambda_grid = g.at("lambda_grid").get<std::vector<double>>();
  }
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    spec.forest.num_trees = f.value("num_trees", spec.forest.num_trees);
    spec.forest.mtry = f.value("mtry", spec.forest.mtry);
    spec.forest.min_node_size = f.value("min_node_size", spec.forest.min_node_size);
    spec.forest.honesty_fraction = f.value("honesty_fraction", spec.forest.honesty_fraction);
    spec.forest.subsample_fraction = f.value("subsample_fraction", spec.forest.subsample_fraction);
  }
  spec.check();
  return spec;
}

FittedLearner::FittedLearner(Model model, Eigen::Index input_dimension, std::vector<std::string> warnings)
    : model_(std::move(model)), input_dimension_(input_dimension), warnings_(std::move(warnings)) {}

Family FittedLearner::family() const noexcept {
  switch (model_.index()) {
    case 1: return Family::gam;
    case 2: return Family::forest;
    default: return Family::linear;
  }
}

Eigen::VectorXd FittedLearner::predict(const Eigen::MatrixXd& features) const {
  if (features.cols() != input_dimension_)
    throw ArgumentError("predict: expected " + std::to_string(input_dimension_) + " feature columns, got " +
                        std::to_string(features.cols()));
  return std::visit([&](const auto& m) { return hetsurr::predict(m, features); }, model_);
}

FittedLearner fit_linear(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
  std::vector<std::string> warnings;
  auto model = fit_linear_model(features, targets, warnings);
  return FittedLearner(std::move(model), features.cols(), std::move(warnings));
}

FittedLearner fit_gam(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                      const LearnerSpec& spec, std::optional<double> fixed_lambda) {
  std::vector<std::string> warnings;
  auto model = fit_gam_model(features, targets, spec.gam, fixed_lambda, warnings);
  return FittedLearner(std::move(model), features.cols(), std::move(warnings));
}

FittedLearner fit_forest(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                         const LearnerSpec& spec, std::uint64_t seed, int workers) {
  auto model = fit_forest_model(features, targets, spec.forest, seed, workers);
  return FittedLearner(std::move(model), features.cols());
}

FittedLearner fit_learner(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                          const LearnerSpec& spec, const LearnerTuning& tuning, int workers) {
  switch (spec.family) {
    case Family::linear: return fit_linear(features, targets);
    case Family::gam: return fit_gam(features, targets, spec, tuning.gam_lambda);
    case Family::forest: return fit_forest(features, targets, spec, tuning.forest_seed, workers);
  }
  throw ArgumentError("unknown learner family");
}

Eigen::Index minimum_rows(const LearnerSpec& spec, Eigen::Index features) noexcept {
  switch (spec.family) {
    case Family::linear: return features + 2;
    case Family::gam: return 2 + features * (spec.gam.basis_size - 1);
    case Family::forest: return 2 * static_cast<Eigen::Index>(spec.forest.min_node_size);
  }
  return features + 2;
}

namespace {

json number_array(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json number_array(const std::vector<double>& v) {
  json out = json::array();
  for (double d : v) {
    if (std::isnan(d)) out.push_back(nullptr);
    else out.push_back(d);
  }
  return out;
}

std::vector<double> read_numbers(const json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(e.is_null() ? std::numeric_limits<double>::quiet_NaN() : e.get<double>());
  return out;
}

Eigen::VectorXd read_vector(const json& j) {
  const auto v = read_numbers(j);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json forest_params_json(const ForestParams& p) {
  return {{"num_trees", p.num_trees},
          {"mtry", p.mtry},
          {"min_node_size", p.min_node_size},
          {"honesty_fraction", p.honesty_fraction},
          {"subsample_fraction", p.subsample_fraction}};
}

}  // namespace

json to_json(const FittedLearner& learner) {
  json j = {{"format_version", kModelFormatVersion},
            {"family", to_string(learner.family())},
            {"input_dimension", learner.input_dimension()},
            {"warnings", learner.warnings()}};
  if (const auto* m = learner.as<LinearModel>()) {
    j["linear"] = {{"coefficients", number_array(m->coefficients)}, {"aliased", m->aliased}};
  } else if (const auto* m = learner.as<GamModel>()) {
    json terms = json::array();
    for (const auto& t : m->terms) {
      terms.push_back({{"feature", t.feature},
                       {"lower", t.lower},
                       {"upper", t.upper},
                       {"basis_size", t.basis_size},
                       {"centers", number_array(t.centers)},
                       {"coefficients", number_array(t.coefficients)}});
    }
    j["gam"] = {{"intercept", m->intercept},
                {"lambda", m->lambda},
                {"edf", m->edf},
                {"lambda_grid", number_array(m->lambda_grid)},
                {"gcv", number_array(m->gcv)},
                {"edf_grid", number_array(m->edf_grid)},
                {"terms", terms}};
  } else if (const auto* m = learner.as<ForestModel>()) {
    json trees = json::array();
    for (const auto& tree : m->trees) {
      json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
           value = json::array();
      for (const auto& node : tree.nodes) {
        feature.push_back(node.feature);
        threshold.push_back(node.threshold);
        left.push_back(node.left);
        right.push_back(node.right);
        value.push_back(node.value);
      }
      trees.push_back(
          {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
    }
    j["forest"] = {{"params", forest_params_json(m->params)}, {"seed", m->seed}, {"trees", trees}};
  }
  return j;
}

namespace {

FittedLearner learner_from_json_impl(const json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    throw ArgumentError("unsupported model format_version " + std::to_string(version));
  const Family family = parse_family(j.at("family").get<std::string>());
  const auto dim = j.at("input_dimension").get<Eigen::Index>();
  auto warnings = j.value("warnings", std::vector<std::string>{});
  switch (family) {
    case Family::linear: {
      const auto& b = j.at("linear");
      LinearModel m;
      m.coefficients = read_vector(b.at("coefficients"));
      m.aliased = b.at("aliased").get<std::vector<bool>>();
      if (m.coefficients.size() != dim + 1) throw ArgumentError("linear model dump has wrong coefficient count");
      return FittedLearner(std::move(m), dim, std::move(warnings));
    }
    case Family::gam: {
      const auto& b = j.at("gam");
      GamModel m;
      m.intercept = b.at("intercept").get<double>();
      m.lambda = b.at("lambda").get<double>();
      m.edf = b.at("edf").get<double>();
      m.lambda_grid = read_numbers(b.at("lambda_grid"));
      m.gcv = read_numbers(b.at("gcv"));
      m.edf_grid = read_numbers(b.at("edf_grid"));
      for (const auto& t : b.at("terms")) {
        SplineTerm term;
        term.feature = t.at("feature").get<Eigen::Index>();
        term.lower = t.at("lower").get<double>();
        term.upper = t.at("upper").get<double>();
        term.basis_size = t.at("basis_size").get<int>();
        term.centers = read_vector(t.at("centers"));
        term.coefficients = read_vector(t.at("coefficients"));
        if (term.feature < 0 || term.feature >= dim) throw ArgumentError("GAM term feature out of range");
        m.terms.push_back(std::move(term));
      }
      return FittedLearner(std::move(m), dim, std::move(warnings));
    }
    case Family::forest: {
      const auto& b = j.at("forest");
      ForestModel m;
      const auto& p = b.at("params");
      m.params.num_trees = p.at("num_trees").get<int>();
      m.params.mtry = p.at("mtry").get<int>();
      m.params.min_node_size = p.at("min_node_size").get<int>();
      m.params.honesty_fraction = p.at("honesty_fraction").get<double>();
      m.params.subsample_fraction = p.at("subsample_fraction").get<double>();
      m.seed = b.at("seed").get<std::uint64_t>();
      for (const auto& t : b.at("trees")) {
        RegressionTree tree;
        const auto& feature = t.at("feature");
        const auto& threshold = t.at("threshold");
        const auto& left = t.at("left");
        const auto& right = t.at("right");
        const auto& value = t.at("value");
        for (std::size_t k = 0; k < feature.size(); ++k) {
          TreeNode node;
          node.feature = feature.at(k).get<std::int32_t>();
          node.threshold = threshold.at(k).get<double>();
          node.left = left.at(k).get<std::int32_t>();
          node.right = right.at(k).get<std::int32_t>();
          node.value = value.at(k).get<double>();
          tree.nodes.push_back(node);
        }
        const auto count = static_cast<std::int32_t>(tree.nodes.size());
        // Children always follow their parent, which also rules out cycles.
        for (std::int32_t k = 0; k < count; ++k) {
          const auto& node = tree.nodes[static_cast<std::size_t>(k)];
          if (node.feature >= 0 && (node.feature >= dim || node.left <= k || node.left >= count ||
                                    node.right <= k || node.right >= count))
            throw ArgumentError("forest model dump has an invalid tree node");
        }
        if (count == 0) throw ArgumentError("forest model dump has an empty tree");
        m.trees.push_back(std::move(tree));
      }
      if (m.trees.empty()) throw ArgumentError("forest model dump has no trees");
      return FittedLearner(std::move(m), dim, std::move(warnings));
    }
  }
  throw ArgumentError("unknown learner family in model dump");
}

}  // namespace

FittedLearner learner_from_json(const json& j) {
  try {
    return learner_from_json_impl(j);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed model dump: ") + e.what());
  }
}

}  // namespace hetsurr
