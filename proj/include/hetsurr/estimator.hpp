#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetsurr/data.hpp"
#include "hetsurr/learner.hpp"

namespace hetsurr {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

// The five regressions of the T-learner:
//   lambda_g : X -> Y      in group g
//   mu_g     : (S, X) -> Y in group g, S is feature column 0
//   zeta0    : X -> S      in the control group
enum class Component : std::size_t { lambda0 = 0, lambda1, mu0, mu1, zeta0 };
inline constexpr std::size_t kComponents = 5;
inline constexpr std::array<std::string_view, kComponents> kComponentNames = {"lambda0", "lambda1", "mu0",
                                                                              "mu1", "zeta0"};

// Everything needed to refit with identical tuning: the learner spec plus the
// per-component GAM smoothing parameter / forest seed chosen on the original
// training sample.
struct TuningRecord {
  LearnerSpec spec;
  std::array<LearnerTuning, kComponents> components;
};

nlohmann::json to_json(const TuningRecord& tuning);
TuningRecord tuning_from_json(const nlohmann::json& j);

struct FittedSurrogateModel {
  std::array<FittedLearner, kComponents> learners;
  TuningRecord tuning;
  Eigen::Index covariates = 0;

  const FittedLearner& operator[](Component c) const { return learners[static_cast<std::size_t>(c)]; }
  std::vector<std::string> warnings() const;
};

// Versioned dump of all five fitted components plus tuning, for scoring new
// covariates later. Loading validates that dimensions line up.
nlohmann::json to_json(const FittedSurrogateModel& model);
FittedSurrogateModel surrogate_model_from_json(const nlohmann::json& j);

// [s | x]
Eigen::MatrixXd surrogate_features(const Eigen::VectorXd& s, const Eigen::MatrixXd& x);

// Fits all five components on `train`. With `frozen`, GAM smoothing
// parameters are reused instead of re-selected; forest seeds always come from
// `seed`. Throws InsufficientDataError naming the components that cannot be
// fit.
FittedSurrogateModel fit_tlearner(const Dataset& train, const LearnerSpec& spec, std::uint64_t seed,
                                  const TuningRecord* frozen = nullptr, int workers = 1);

struct PteEstimate {
  Eigen::VectorXd delta;      // lambda1(x) - lambda0(x)
  Eigen::VectorXd delta_s;    // mu1(zeta0(x), x) - mu0(zeta0(x), x)
  Eigen::VectorXd r_s;        // 1 - delta_s / delta, NaN where invalid
  Eigen::VectorXd zeta0_hat;  // zeta0(x)
  Mask valid;                 // |delta| >= delta_floor

  Eigen::Index size() const noexcept { return delta.size(); }
};

PteEstimate estimate_pte(const FittedSurrogateModel& model, const Eigen::MatrixXd& test_x, double delta_floor);

// 1e-6 times the sample standard deviation of y (1e-6 if y is constant).
double default_delta_floor(const Eigen::VectorXd& y);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

struct DecileBin {
  double lower = 0.0;  // range of predicted zeta0 in the bin
  double upper = 0.0;
  Eigen::Index count = 0;
  double mean_observed = 0.0;
  double mean_predicted = 0.0;
};

struct ZetaDiagnostic {
  double ks_statistic = 0.0;
  Eigen::Index n = 0;
  std::vector<DecileBin> deciles;
};

// Compares observed control-group surrogates with zeta0 predictions: KS
// distance between the two samples, plus observed vs predicted means within
// deciles of the prediction.
ZetaDiagnostic zeta_diagnostic(const FittedLearner& zeta0, const Dataset& control);
ZetaDiagnostic zeta_diagnostic(const FittedSurrogateModel& model, const Dataset& control);

nlohmann::json to_json(const ZetaDiagnostic& diagnostic);

}  // namespace hetsurr
