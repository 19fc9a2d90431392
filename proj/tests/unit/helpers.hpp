#pragma once

#include <random>

#include <Eigen/Dense>

#include "hetsurr/data.hpp"
#include "hetsurr/random.hpp"

namespace testing {

inline Eigen::MatrixXd uniform_matrix(Eigen::Index n, Eigen::Index q, std::uint64_t seed, double lo = 0.0,
                                      double hi = 1.0) {
  hetsurr::Engine rng = hetsurr::make_engine(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd x(n, q);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < q; ++j) x(i, j) = u(rng);
  return x;
}

inline Eigen::VectorXd normal_vector(Eigen::Index n, std::uint64_t seed, double sd = 1.0) {
  hetsurr::Engine rng = hetsurr::make_engine(seed);
  std::normal_distribution<double> z(0.0, sd);
  Eigen::VectorXd v(n);
  for (auto& e : v) e = z(rng);
  return v;
}

// Normal-equations least squares with an intercept column.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  return (a.transpose() * a).ldlt().solve(a.transpose() * y);
}

}  // namespace testing
