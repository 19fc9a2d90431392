#include "hetsurr/linear.hpp"

#include "hetsurr/errors.hpp"

namespace hetsurr {

namespace {

constexpr double kRankTolerance = 1e-7;

// Classical Gram-Schmidt with one reorthogonalization pass; keeps a column
// only if it is not (numerically) in the span of the columns already kept.
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& design) {
  const Eigen::Index n = design.rows();
  std::vector<Eigen::Index> kept;
  Eigen::MatrixXd basis(n, design.cols());
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    Eigen::VectorXd v = design.col(j);
    const double norm = v.norm();
    if (norm == 0.0) continue;
    for (int pass = 0; pass < 2 && rank > 0; ++pass) {
      const Eigen::VectorXd proj = basis.leftCols(rank).transpose() * v;
      v.noalias() -= basis.leftCols(rank) * proj;
    }
    const double residual = v.norm();
    if (residual <= kRankTolerance * norm) continue;
    basis.col(rank++) = v / residual;
    kept.push_back(j);
  }
  return kept;
}

}  // namespace

LinearModel fit_linear_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             std::vector<std::string>& warnings) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  if (y.size() != n) throw ArgumentError("linear fit: targets and features disagree on row count");
  if (n <= q + 1)
    throw InsufficientDataError("linear fit needs more than " + std::to_string(q + 1) +
                                " rows, got " + std::to_string(n));
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("linear fit: non-finite input");

  Eigen::MatrixXd design(n, q + 1);
  design.col(0).setOnes();
  design.rightCols(q) = x;

  const auto kept = independent_columns(design);
  LinearModel model;
  model.coefficients = Eigen::VectorXd::Zero(q + 1);
  model.aliased.assign(static_cast<std::size_t>(q + 1), true);
  if (kept.empty()) return model;

  Eigen::MatrixXd reduced(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) reduced.col(static_cast<Eigen::Index>(k)) = design.col(kept[k]);
  const Eigen::VectorXd beta = reduced.householderQr().solve(y);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    model.coefficients[kept[k]] = beta[static_cast<Eigen::Index>(k)];
    model.aliased[static_cast<std::size_t>(kept[k])] = false;
  }
  for (Eigen::Index j = 1; j <= q; ++j) {
    if (model.aliased[static_cast<std::size_t>(j)])
      warnings.push_back("linear fit: feature " + std::to_string(j - 1) +
                         " is linearly dependent on earlier columns; coefficient set to 0");
  }
  return model;
}

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out = x * model.coefficients.tail(x.cols());
  out.array() += model.coefficients[0];
  return out;
}

}  // namespace hetsurr
