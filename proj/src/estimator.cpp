#include "hetsurr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hetsurr/errors.hpp"
#include "hetsurr/random.hpp"

namespace hetsurr {

using nlohmann::json;

json to_json(const TuningRecord& tuning) {
  json comps = json::object();
  for (std::size_t c = 0; c < kComponents; ++c) {
    const auto& t = tuning.components[c];
    json entry = {{"forest_seed", t.forest_seed}};
    entry["gam_lambda"] = t.gam_lambda ? json(*t.gam_lambda) : json(nullptr);
    comps[std::string(kComponentNames[c])] = entry;
  }
  return {{"spec", to_json(tuning.spec)}, {"components", comps}};
}

TuningRecord tuning_from_json(const json& j) {
  TuningRecord tuning;
  tuning.spec = learner_spec_from_json(j.at("spec"));
  const auto& comps = j.at("components");
  for (std::size_t c = 0; c < kComponents; ++c) {
    const auto& e = comps.at(std::string(kComponentNames[c]));
    tuning.components[c].forest_seed = e.at("forest_seed").get<std::uint64_t>();
    if (!e.at("gam_lambda").is_null()) tuning.components[c].gam_lambda = e.at("gam_lambda").get<double>();
  }
  return tuning;
}

std::vector<std::string> FittedSurrogateModel::warnings() const {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < kComponents; ++c)
    for (const auto& w : learners[c].warnings()) out.push_back(std::string(kComponentNames[c]) + ": " + w);
  return out;
}

json to_json(const FittedSurrogateModel& model) {
  json learners = json::object();
  for (std::size_t c = 0; c < kComponents; ++c) learners[std::string(kComponentNames[c])] = to_json(model.learners[c]);
  return {{"format_version", kModelFormatVersion},
          {"covariates", model.covariates},
          {"tuning", to_json(model.tuning)},
          {"learners", learners}};
}

FittedSurrogateModel surrogate_model_from_json(const json& j) {
  FittedSurrogateModel model;
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw ArgumentError("unsupported model format_version");
    model.covariates = j.at("covariates").get<Eigen::Index>();
    model.tuning = tuning_from_json(j.at("tuning"));
    for (std::size_t c = 0; c < kComponents; ++c)
      model.learners[c] = learner_from_json(j.at("learners").at(std::string(kComponentNames[c])));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed model dump: ") + e.what());
  }
  for (std::size_t c = 0; c < kComponents; ++c) {
    const bool uses_s = c == static_cast<std::size_t>(Component::mu0) || c == static_cast<std::size_t>(Component::mu1);
    if (model.learners[c].input_dimension() != model.covariates + (uses_s ? 1 : 0))
      throw ArgumentError("model dump: component " + std::string(kComponentNames[c]) + " has the wrong input dimension");
  }
  return model;
}

Eigen::MatrixXd surrogate_features(const Eigen::VectorXd& s, const Eigen::MatrixXd& x) {
  if (s.size() != x.rows()) throw ArgumentError("surrogate and covariates disagree on row count");
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0) = s;
  out.rightCols(x.cols()) = x;
  return out;
}

FittedSurrogateModel fit_tlearner(const Dataset& train, const LearnerSpec& spec, std::uint64_t seed,
                                  const TuningRecord* frozen, int workers) {
  spec.check();
  const Eigen::Index p = train.covariates();
  const Dataset control = group_slice(train, 0);
  const Dataset treated = group_slice(train, 1);

  // Check every component up front so the error names all of them.
  std::vector<std::string> short_components;
  const Eigen::Index need_x = minimum_rows(spec, p);
  const Eigen::Index need_sx = minimum_rows(spec, p + 1);
  auto require = [&](Component c, Eigen::Index have, Eigen::Index need) {
    if (have < need) short_components.push_back(std::string(kComponentNames[static_cast<std::size_t>(c)]));
  };
  require(Component::lambda0, control.rows(), need_x);
  require(Component::lambda1, treated.rows(), need_x);
  require(Component::mu0, control.rows(), need_sx);
  require(Component::mu1, treated.rows(), need_sx);
  require(Component::zeta0, control.rows(), need_x);
  if (!short_components.empty()) {
    std::string names;
    for (const auto& n : short_components) names += (names.empty() ? "" : "/") + n;
    throw InsufficientDataError("too few rows (control n0 = " + std::to_string(control.rows()) +
                                    ", treated n1 = " + std::to_string(treated.rows()) + ")",
                                names);
  }

  FittedSurrogateModel model;
  model.covariates = p;
  model.tuning.spec = spec;
  for (std::size_t c = 0; c < kComponents; ++c) {
    auto& t = model.tuning.components[c];
    t.forest_seed = derive_seed(seed, StreamTag::fit, {c});
    if (frozen && spec.family == Family::gam) {
      t.gam_lambda = frozen->components[c].gam_lambda;
      if (!t.gam_lambda) throw ArgumentError("frozen tuning record lacks a GAM lambda");
    }
  }

  auto fit = [&](Component c, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    const auto idx = static_cast<std::size_t>(c);
    try {
      model.learners[idx] = fit_learner(features, targets, spec, model.tuning.components[idx], workers);
    } catch (const InsufficientDataError& e) {
      throw InsufficientDataError(e.what(), std::string(kComponentNames[idx]));
    } catch (const FitError& e) {
      throw FitError(std::string(kComponentNames[idx]) + ": " + e.what());
    }
    if (const auto* gam = model.learners[idx].as<GamModel>()) model.tuning.components[idx].gam_lambda = gam->lambda;
  };
  fit(Component::lambda0, control.x, control.y);
  fit(Component::lambda1, treated.x, treated.y);
  fit(Component::mu0, surrogate_features(control.s, control.x), control.y);
  fit(Component::mu1, surrogate_features(treated.s, treated.x), treated.y);
  fit(Component::zeta0, control.x, control.s);
  return model;
}

PteEstimate estimate_pte(const FittedSurrogateModel& model, const Eigen::MatrixXd& test_x, double delta_floor) {
  if (test_x.cols() != model.covariates)
    throw ArgumentError("estimate_pte: expected " + std::to_string(model.covariates) + " covariate columns, got " +
                        std::to_string(test_x.cols()));
  if (!(delta_floor > 0.0)) throw ArgumentError("delta_floor must be positive");
  PteEstimate out;
  out.zeta0_hat = model[Component::zeta0].predict(test_x);
  out.delta = model[Component::lambda1].predict(test_x) - model[Component::lambda0].predict(test_x);
  const Eigen::MatrixXd plug_in = surrogate_features(out.zeta0_hat, test_x);
  out.delta_s = model[Component::mu1].predict(plug_in) - model[Component::mu0].predict(plug_in);
  out.valid = out.delta.array().abs() >= delta_floor;
  out.r_s.resize(out.delta.size());
  for (Eigen::Index i = 0; i < out.delta.size(); ++i)
    out.r_s[i] = out.valid[i] ? 1.0 - out.delta_s[i] / out.delta[i] : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double default_delta_floor(const Eigen::VectorXd& y) {
  if (y.size() < 2) return 1e-6;
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size() - 1));
  return sd > 0.0 ? 1e-6 * sd : 1e-6;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("KS statistic needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return std::min(1.0, d);
}

ZetaDiagnostic zeta_diagnostic(const FittedLearner& zeta0, const Dataset& control) {
  if (control.rows() == 0) throw ArgumentError("zeta diagnostic needs a non-empty control sample");
  if ((control.g.array() != 0).any()) throw ArgumentError("zeta diagnostic expects control-group rows only");
  const Eigen::VectorXd predicted = zeta0.predict(control.x);
  const Eigen::Index n = control.rows();

  ZetaDiagnostic out;
  out.n = n;
  out.ks_statistic = ks_statistic(std::span<const double>(control.s.data(), static_cast<std::size_t>(n)),
                                  std::span<const double>(predicted.data(), static_cast<std::size_t>(n)));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return predicted[a] < predicted[b]; });
  const Eigen::Index bins = std::min<Eigen::Index>(10, n);
  for (Eigen::Index b = 0; b < bins; ++b) {
    const Eigen::Index begin = b * n / bins;
    const Eigen::Index end = (b + 1) * n / bins;
    DecileBin bin;
    bin.count = end - begin;
    bin.lower = predicted[order[static_cast<std::size_t>(begin)]];
    bin.upper = predicted[order[static_cast<std::size_t>(end - 1)]];
    double obs = 0.0;
    double pred = 0.0;
    for (Eigen::Index k = begin; k < end; ++k) {
      obs += control.s[order[static_cast<std::size_t>(k)]];
      pred += predicted[order[static_cast<std::size_t>(k)]];
    }
    bin.mean_observed = obs / static_cast<double>(bin.count);
    bin.mean_predicted = pred / static_cast<double>(bin.count);
    out.deciles.push_back(bin);
  }
  return out;
}

ZetaDiagnostic zeta_diagnostic(const FittedSurrogateModel& model, const Dataset& control) {
  return zeta_diagnostic(model[Component::zeta0], control);
}

json to_json(const ZetaDiagnostic& diagnostic) {
  json bins = json::array();
  for (const auto& b : diagnostic.deciles)
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"mean_observed", b.mean_observed},
                    {"mean_predicted", b.mean_predicted}});
  return {{"ks_statistic", diagnostic.ks_statistic}, {"n", diagnostic.n}, {"deciles", bins}};
}

}  // namespace hetsurr
