#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetsurr/forest.hpp"
#include "hetsurr/gam.hpp"
#include "hetsurr/linear.hpp"
#include "hetsurr/spec.hpp"

namespace hetsurr {

// A fitted regression function of a fixed number of features. Immutable once
// built; safe to share across threads.
class FittedLearner {
 public:
  using Model = std::variant<LinearModel, GamModel, ForestModel>;

  FittedLearner() = default;
  FittedLearner(Model model, Eigen::Index input_dimension, std::vector<std::string> warnings = {});

  Family family() const noexcept;
  Eigen::Index input_dimension() const noexcept { return input_dimension_; }
  const Model& model() const noexcept { return model_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  template <typename T>
  const T* as() const noexcept {
    return std::get_if<T>(&model_);
  }

  // Throws ArgumentError when features.cols() != input_dimension().
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;

 private:
  Model model_;
  Eigen::Index input_dimension_ = 0;
  std::vector<std::string> warnings_;
};

// Tuning state that is frozen between the original fit and bootstrap refits.
struct LearnerTuning {
  std::optional<double> gam_lambda;
  std::uint64_t forest_seed = 0;
};

FittedLearner fit_linear(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets);
FittedLearner fit_gam(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                      const LearnerSpec& spec, std::optional<double> fixed_lambda = std::nullopt);
FittedLearner fit_forest(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                         const LearnerSpec& spec, std::uint64_t seed, int workers = 1);

// Dispatches on spec.family. GAM uses tuning.gam_lambda when set; forests use
// tuning.forest_seed.
FittedLearner fit_learner(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                          const LearnerSpec& spec, const LearnerTuning& tuning, int workers = 1);

// Smallest row count the family accepts for `features` columns.
Eigen::Index minimum_rows(const LearnerSpec& spec, Eigen::Index features) noexcept;

// Versioned JSON dump of the fitted parameters.
nlohmann::json to_json(const FittedLearner& learner);
FittedLearner learner_from_json(const nlohmann::json& j);

inline constexpr int kModelFormatVersion = 1;

}  // namespace hetsurr
