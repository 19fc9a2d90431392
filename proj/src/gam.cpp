#include "hetsurr/gam.hpp"

#include <cmath>
#include <limits>

#include "hetsurr/errors.hpp"

namespace hetsurr {

namespace {

// Uniform cubic B-spline weights for local coordinate u in [0, 1].
inline void cubic_weights(double u, double w[4]) {
  const double v = 1.0 - u;
  w[0] = v * v * v / 6.0;
  w[1] = (3.0 * u * u * u - 6.0 * u * u + 4.0) / 6.0;
  w[2] = (-3.0 * u * u * u + 3.0 * u * u + 3.0 * u + 1.0) / 6.0;
  w[3] = u * u * u / 6.0;
}

// d/du of cubic_weights.
inline void cubic_slopes(double u, double d[4]) {
  const double v = 1.0 - u;
  d[0] = -0.5 * v * v;
  d[1] = (3.0 * u * u - 4.0 * u) / 2.0;
  d[2] = (-3.0 * u * u + 2.0 * u + 1.0) / 2.0;
  d[3] = 0.5 * u * u;
}

}  // namespace

Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& x, double lower, double upper, int basis_size) {
  if (basis_size < 4) throw ArgumentError("cubic B-spline basis needs at least 4 functions");
  if (!(upper > lower)) throw ArgumentError("B-spline range must have upper > lower");
  const int intervals = basis_size - 3;
  const double h = (upper - lower) / intervals;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.size(), basis_size);
  double w[4];
  double d[4];
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    const double xi = x[r];
    if (xi < lower || xi > upper) {
      const bool below = xi < lower;
      const int first = below ? 0 : intervals - 1;
      const double u = below ? 0.0 : 1.0;
      const double offset = (xi - (below ? lower : upper)) / h;
      cubic_weights(u, w);
      cubic_slopes(u, d);
      for (int k = 0; k < 4; ++k) out(r, first + k) = w[k] + d[k] * offset;
      continue;
    }
    const double t = (xi - lower) / h;
    int cell = static_cast<int>(std::floor(t));
    if (cell > intervals - 1) cell = intervals - 1;
    cubic_weights(t - cell, w);
    for (int k = 0; k < 4; ++k) out(r, cell + k) = w[k];
  }
  return out;
}

Eigen::MatrixXd difference_penalty(int size) {
  if (size < 3) return Eigen::MatrixXd::Zero(size, size);
  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(size - 2, size);
  for (int r = 0; r < size - 2; ++r) {
    diff(r, r) = 1.0;
    diff(r, r + 1) = -2.0;
    diff(r, r + 2) = 1.0;
  }
  return diff.transpose() * diff;
}

Eigen::MatrixXd SplineTerm::design(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd full = bspline_basis(x.col(feature), lower, upper, basis_size);
  Eigen::MatrixXd cols = full.leftCols(basis_size - 1);
  cols.rowwise() -= centers.transpose();
  return cols;
}

double gcv_score(double n, double rss, double edf) noexcept {
  const double denom = n - edf;
  if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return n * rss / (denom * denom);
}

GamModel fit_gam_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GamParams& params,
                       std::optional<double> fixed_lambda, std::vector<std::string>& warnings) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  if (q == 0) throw ArgumentError("GAM fit needs at least one feature");
  if (y.size() != n) throw ArgumentError("GAM fit: targets and features disagree on row count");
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("GAM fit: non-finite input");
  const int k_basis = params.basis_size;
  if (k_basis < 4) throw ArgumentError("GAM basis_size must be at least 4");

  GamModel model;
  for (Eigen::Index j = 0; j < q; ++j) {
    const double lo = x.col(j).minCoeff();
    const double hi = x.col(j).maxCoeff();
    if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(hi)))) {
      warnings.push_back("GAM fit: feature " + std::to_string(j) + " is constant; smooth term omitted");
      continue;
    }
    SplineTerm term;
    term.feature = j;
    term.lower = lo;
    term.upper = hi;
    term.basis_size = k_basis;
    model.terms.push_back(std::move(term));
  }

  const Eigen::Index per_term = k_basis - 1;
  const Eigen::Index width = 1 + per_term * static_cast<Eigen::Index>(model.terms.size());
  if (n <= width)
    throw InsufficientDataError("GAM fit needs more than " + std::to_string(width) + " rows, got " +
                                std::to_string(n));

  Eigen::MatrixXd design(n, width);
  design.col(0).setOnes();
  Eigen::MatrixXd penalty = Eigen::MatrixXd::Zero(width, width);
  const Eigen::MatrixXd term_penalty = difference_penalty(k_basis).topLeftCorner(per_term, per_term);
  for (std::size_t t = 0; t < model.terms.size(); ++t) {
    auto& term = model.terms[t];
    const Eigen::Index offset = 1 + per_term * static_cast<Eigen::Index>(t);
    const Eigen::MatrixXd full =
        bspline_basis(x.col(term.feature), term.lower, term.upper, k_basis).leftCols(per_term);
    term.centers = full.colwise().mean().transpose();
    design.middleCols(offset, per_term) = full.rowwise() - term.centers.transpose();
    penalty.block(offset, offset, per_term, per_term) = term_penalty;
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(width, width);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const Eigen::VectorXd cross = design.transpose() * y;
  const double nd = static_cast<double>(n);

  std::vector<double> grid;
  if (fixed_lambda) {
    if (!(*fixed_lambda > 0.0)) throw ArgumentError("frozen GAM lambda must be positive");
    grid.push_back(*fixed_lambda);
  } else {
    grid = params.lambda_grid;
  }
  if (grid.empty()) throw ArgumentError("GAM lambda grid is empty");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t best = grid.size();
  Eigen::VectorXd best_beta;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::MatrixXd system = gram + grid[i] * penalty;
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    double score = nan;
    double edf = nan;
    Eigen::VectorXd beta;
    if (llt.info() == Eigen::Success) {
      beta = llt.solve(cross);
      edf = llt.solve(gram).trace();
      const double rss = (y - design * beta).squaredNorm();
      if (beta.allFinite()) score = gcv_score(nd, rss, edf);
    }
    model.lambda_grid.push_back(grid[i]);
    model.gcv.push_back(score);
    model.edf_grid.push_back(edf);
    if (!std::isnan(score) && (best == grid.size() || score < model.gcv[best])) {
      best = i;
      best_beta = std::move(beta);
    }
  }
  if (best == grid.size()) throw FitError("GAM fit: penalized system is singular at every lambda");

  model.lambda = grid[best];
  model.edf = model.edf_grid[best];
  model.intercept = best_beta[0];
  for (std::size_t t = 0; t < model.terms.size(); ++t)
    model.terms[t].coefficients = best_beta.segment(1 + per_term * static_cast<Eigen::Index>(t), per_term);
  return model;
}

Eigen::VectorXd predict(const GamModel& model, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), model.intercept);
  for (const auto& term : model.terms) out.noalias() += term.design(x) * term.coefficients;
  return out;
}

}  // namespace hetsurr
