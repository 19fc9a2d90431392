#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetsurr/data.hpp"
#include "hetsurr/inference.hpp"
#include "hetsurr/random.hpp"
#include "hetsurr/spec.hpp"

namespace hetsurr {

// How the surrogate noise parameter N(0, 0.4 + 1.4 G) is read.
enum class NoiseScale { variance, standard_deviation };

std::string_view to_string(NoiseScale scale) noexcept;
NoiseScale parse_noise_scale(std::string_view name);

struct GenerateOptions {
  bool surrogate_noise = true;
  bool outcome_noise = true;
  NoiseScale surrogate_noise_scale = NoiseScale::variance;
};

// Standard deviation of the surrogate noise in group g.
double surrogate_noise_sd(int group, NoiseScale scale) noexcept;

// Draws n rows from simulation setting 1-4. Six covariates x1..x6:
//   x1 ~ U(0,3), x2 ~ Gamma(2, scale 2), x3 ~ U(0,5), x4 ~ Gamma(3, 1),
//   x5 ~ U(0,2), x6 ~ Gamma(1, 1);
// treatment G ~ Bernoulli(0.5 * expit(0.2x1 + 0.3x2 + 0.5x3 + 0.2x4 + 0.4x5 + 0.1x6)).
// The surrogate and outcome equations differ by setting; see true_pte for the
// implied effects.
Dataset simulate_dataset(int setting, Eigen::Index n, Engine& rng, const GenerateOptions& options = {});

struct TruePte {
  Eigen::VectorXd delta;
  Eigen::VectorXd delta_s;
  Eigen::VectorXd r_s;
};

// Closed forms (only x1 matters):
//   setting 1:    delta = 4 + 2 x1,      delta_s = 1 + 2 x1
//   settings 2-3: delta = 3 + 1.5 x1^2,  delta_s = 1 + 1.5 x1^2
//   setting 4:    delta = 3,             delta_s = 1
TruePte true_pte(int setting, const Eigen::MatrixXd& x);

struct SettingSpec {
  int id = 1;
  Eigen::Index n = 2000;
  Eigen::Index test_size = 200;
  Eigen::Index iterations = 200;
  Eigen::Index bootstrap = 100;
  double kappa = 0.5;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  GenerateOptions noise;

  void check() const;
};

// One test point of one simulation iteration.
struct PointRecord {
  Eigen::Index iteration = 0;
  Eigen::Index test_index = 0;
  double x1 = 0.0;
  double delta_true = 0.0;
  double delta_s_true = 0.0;
  double r_true = 0.0;
  double delta_hat = 0.0;
  double delta_s_hat = 0.0;
  double r_hat = 0.0;  // NaN when the point is invalid
  bool valid = false;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  Eigen::Index ci_valid_count = 0;
  double boot_se = 0.0;
  double p_raw = 0.0;
  double p_adjusted = 0.0;
  bool strong = false;
  bool truth_strong = false;
};

struct MetricsSummary {
  double bias = 0.0;      // median |r_hat - r_true|
  double ese = 0.0;       // median over x1 bins of the scaled MAD of (r_hat - r_true)
  double ase = 0.0;       // median bootstrap SE
  double mse = 0.0;       // median (r_hat - r_true)^2
  double coverage = 0.0;  // share of intervals containing r_true
  double mean_estimate = 0.0;
  double mean_truth = 0.0;
  Eigen::Index points = 0;
  Eigen::Index invalid_points = 0;
  Eigen::Index undefined_intervals = 0;
  ConfusionMetrics identification;
};

struct BinSummary {
  double lower = 0.0;
  double upper = 0.0;
  Eigen::Index count = 0;
  double bias = 0.0;
  double ese = 0.0;
  double coverage = 0.0;
  double mean_estimate = 0.0;
  double mean_truth = 0.0;
};

inline constexpr int kSummaryBins = 10;

MetricsSummary summarize_metrics(std::span<const PointRecord> points, double kappa);
std::vector<BinSummary> summarize_bins(std::span<const PointRecord> points, int bins = kSummaryBins);

// Scaled median absolute deviation (1.4826 * MAD), the normal-consistent SD estimate.
double scaled_mad(std::vector<double> values);
double median(std::vector<double> values);

struct IterationFailure {
  Eigen::Index iteration = 0;
  std::string reason;
};

struct StudyReport {
  SettingSpec setting;
  LearnerSpec learner;
  Eigen::Index attempted = 0;
  Eigen::Index completed = 0;
  std::vector<IterationFailure> failures;
  MetricsSummary metrics;
  std::vector<BinSummary> bins;
};

struct StudyResult {
  StudyReport report;
  std::vector<PointRecord> points;
};

struct StudyOptions {
  int workers = 1;
  std::function<void(Eigen::Index)> on_iteration;  // called after each finished iteration
};

// Monte Carlo study: for each iteration generate -> split -> fit -> estimate ->
// bootstrap -> percentile CI -> identify, then compare against true_pte.
// Iteration i uses streams derived from (seed, i); output does not depend on
// the worker count.
StudyResult run_study(const SettingSpec& setting, const LearnerSpec& learner, const StudyOptions& options = {});

nlohmann::json to_json(const SettingSpec& setting);
nlohmann::json to_json(const MetricsSummary& metrics);
nlohmann::json to_json(const StudyReport& report);
std::string points_csv(std::span<const PointRecord> points);

}  // namespace hetsurr
