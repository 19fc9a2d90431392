#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hetsurr {

struct LinearModel {
  Eigen::VectorXd coefficients;  // intercept, then one slope per feature
  std::vector<bool> aliased;     // coefficient pinned to zero by rank deficiency
};

// Ordinary least squares with intercept. Columns that are linearly dependent
// on earlier ones (relative residual norm below 1e-7) are dropped and get a
// zero coefficient, mirroring R's lm().
LinearModel fit_linear_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             std::vector<std::string>& warnings);

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& x);

}  // namespace hetsurr
