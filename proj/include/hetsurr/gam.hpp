#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetsurr/spec.hpp"

namespace hetsurr {

// Cubic B-spline basis on `basis_size` functions with equally spaced knots
// spanning [lower, upper]. Outside the interval each function continues
// linearly from its boundary value and slope.
Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& x, double lower, double upper, int basis_size);

// Second-order difference penalty D'D on `size` coefficients.
Eigen::MatrixXd difference_penalty(int size);

// One smooth additive term. The last basis function is dropped and the rest
// are centred on their training means, which identifies the term against the
// intercept; the penalty acts on the full coefficient vector with the dropped
// entry fixed at zero.
struct SplineTerm {
  Eigen::Index feature = 0;
  double lower = 0.0;
  double upper = 1.0;
  int basis_size = 10;
  Eigen::VectorXd centers;       // basis_size - 1
  Eigen::VectorXd coefficients;  // basis_size - 1

  Eigen::MatrixXd design(const Eigen::MatrixXd& x) const;
};

struct GamModel {
  double intercept = 0.0;
  std::vector<SplineTerm> terms;
  double lambda = 0.0;
  double edf = 0.0;  // tr(H) at the selected lambda
  // Full GCV curve evaluated during selection (one entry when lambda was
  // frozen). Entries are NaN where the penalized system was singular.
  std::vector<double> lambda_grid;
  std::vector<double> gcv;
  std::vector<double> edf_grid;
};

// n * RSS / (n - edf)^2
double gcv_score(double n, double rss, double edf) noexcept;

// Additive penalized regression spline fit. Smoothing parameter is the GCV
// argmin over params.lambda_grid (first minimum wins) unless fixed_lambda is
// given. Constant features are dropped with a warning.
GamModel fit_gam_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GamParams& params,
                       std::optional<double> fixed_lambda, std::vector<std::string>& warnings);

Eigen::VectorXd predict(const GamModel& model, const Eigen::MatrixXd& x);

}  // namespace hetsurr
