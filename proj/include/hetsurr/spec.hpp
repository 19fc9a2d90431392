#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hetsurr {

enum class Family { linear, gam, forest };

std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view name);

// `count` points log-spaced over [lo, hi], ascending.
std::vector<double> log_spaced_grid(double lo, double hi, int count);

struct GamParams {
  int basis_size = 10;  // cubic B-spline functions per covariate
  std::vector<double> lambda_grid = log_spaced_grid(1e-4, 1e4, 20);
};

struct ForestParams {
  int num_trees = 2000;
  int mtry = 0;  // 0 selects ceil(sqrt(q))
  int min_node_size = 5;
  double honesty_fraction = 0.5;
  double subsample_fraction = 0.5;
};

struct LearnerSpec {
  Family family = Family::linear;
  GamParams gam;
  ForestParams forest;

  // Throws ArgumentError if any hyperparameter is out of range.
  void check() const;
};

nlohmann::json to_json(const LearnerSpec& spec);
LearnerSpec learner_spec_from_json(const nlohmann::json& j);

}  // namespace hetsurr
