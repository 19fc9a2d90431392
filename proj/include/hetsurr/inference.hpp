#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetsurr/data.hpp"
#include "hetsurr/estimator.hpp"

namespace hetsurr {

using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct BootstrapOptions {
  Eigen::Index replicates = 200;
  std::uint64_t seed = 0;
  double delta_floor = 1e-6;
  int workers = 1;
  // Resamples that cannot be fit (e.g. an empty treatment arm) are redrawn
  // up to this many times per replicate.
  int max_redraws = 100;
};

// Replicate-by-test-point matrices (B x m).
struct BootstrapDistribution {
  Eigen::MatrixXd delta;
  Eigen::MatrixXd delta_s;
  Eigen::MatrixXd r_s;
  MaskMatrix valid;
  Eigen::Index redraws = 0;
  TuningRecord tuning;

  Eigen::Index replicates() const noexcept { return r_s.rows(); }
  Eigen::Index points() const noexcept { return r_s.cols(); }
};

// Nonparametric bootstrap of the whole T-learner: each replicate resamples the
// pooled training rows with replacement, refits all five components with the
// frozen tuning, and re-estimates on the fixed test covariates. Replicate b
// uses a stream derived from (seed, b), so output is independent of workers.
BootstrapDistribution bootstrap_pte(const Dataset& train, const Eigen::MatrixXd& test_x,
                                    const TuningRecord& frozen, const BootstrapOptions& options);

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double prob);

struct Interval {
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  Eigen::Index valid_count = 0;
  bool sparse = false;  // fewer than B/2 usable replicates

  bool defined() const noexcept { return valid_count > 0; }
  bool contains(double v) const noexcept { return defined() && lower <= v && v <= upper; }
};

struct PointIntervals {
  Interval delta;
  Interval delta_s;
  Interval r_s;
};

// Percentile intervals [alpha/2, 1 - alpha/2]. delta and delta_s use every
// replicate; r_s uses only replicates where that point was valid.
std::vector<PointIntervals> percentile_ci(const BootstrapDistribution& dist, double alpha);

// Standard deviation of the valid r_s replicates per point (NaN if < 2).
Eigen::VectorXd bootstrap_se(const BootstrapDistribution& dist);

// Benjamini-Hochberg step-up adjustment, returned in input order.
std::vector<double> bh_adjust(std::span<const double> p);

struct IdentificationRow {
  double p_raw = std::numeric_limits<double>::quiet_NaN();
  double p_adjusted = std::numeric_limits<double>::quiet_NaN();
  bool strong = false;
  Eigen::Index valid_count = 0;
};

struct IdentificationResult {
  std::vector<IdentificationRow> rows;
  double kappa = 0.5;
  double alpha = 0.05;

  Eigen::Index strong_count() const noexcept;
};

// One-sided test of H0: R_S(x_i) <= kappa per test point. p_raw is the share
// of valid replicates with r_s <= kappa; BH runs over the points that have a
// p-value, and strong = adjusted p < alpha.
IdentificationResult identify(const BootstrapDistribution& dist, double kappa, double alpha);

struct ConfusionMetrics {
  std::optional<double> ppv;
  std::optional<double> npv;
  std::optional<double> specificity;
  std::optional<double> sensitivity;
  Eigen::Index true_positive = 0;
  Eigen::Index false_positive = 0;
  Eigen::Index true_negative = 0;
  Eigen::Index false_negative = 0;
};

ConfusionMetrics confusion_metrics(const std::vector<bool>& decisions, const std::vector<bool>& truth);
ConfusionMetrics confusion_metrics(Eigen::Index tp, Eigen::Index fp, Eigen::Index tn, Eigen::Index fn);

nlohmann::json to_json(const ConfusionMetrics& m);
nlohmann::json to_json(const BootstrapDistribution& dist);
BootstrapDistribution bootstrap_from_json(const nlohmann::json& j);

}  // namespace hetsurr
