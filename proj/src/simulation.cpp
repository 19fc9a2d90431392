#include "hetsurr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "hetsurr/csv.hpp"
#include "hetsurr/errors.hpp"
#include "hetsurr/estimator.hpp"
#include "hetsurr/parallel.hpp"

namespace hetsurr {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_setting_id(int setting) {
  if (setting < 1 || setting > 4) throw ArgumentError("unknown simulation setting " + std::to_string(setting));
}

double outcome_mean(int setting, double g, double s, const double* x) {
  switch (setting) {
    case 1:
      return g + 2.0 * s + 0.2 * x[0] + 0.5 * x[1] + 0.2 * x[2] + 0.1 * x[3] + 0.3 * x[4] + 0.4 * x[5] +
             2.0 * g * x[0];
    case 2:
      return g + 2.0 * s + std::sin(x[0]) + std::cos(x[1]) + x[2] * x[2] + x[3] + std::log(x[4] + 1.0) +
             std::sqrt(x[5]) + 1.5 * g * x[0] * x[0];
    case 3:
      return g + 2.0 * s + 0.5 * x[0] * x[4] * x[4] + std::log(x[1] / x[2]) + 2.0 * std::sin(x[3] + x[5]) +
             1.5 * g * x[0] * x[0];
    default:
      return g + 2.0 * s + 0.2 * x[0] + 0.5 * x[1] + 0.2 * x[2] + 0.1 * x[3] + 0.3 * x[4] + 0.4 * x[5];
  }
}

}  // namespace

std::string_view to_string(NoiseScale scale) noexcept {
  return scale == NoiseScale::variance ? "variance" : "standard_deviation";
}

NoiseScale parse_noise_scale(std::string_view name) {
  if (name == "variance") return NoiseScale::variance;
  if (name == "standard_deviation" || name == "sd") return NoiseScale::standard_deviation;
  throw ArgumentError("unknown noise scale '" + std::string(name) + "'");
}

double surrogate_noise_sd(int group, NoiseScale scale) noexcept {
  const double param = 0.4 + 1.4 * group;
  return scale == NoiseScale::variance ? std::sqrt(param) : param;
}

Dataset simulate_dataset(int setting, Eigen::Index n, Engine& rng, const GenerateOptions& options) {
  check_setting_id(setting);
  if (n < 2) throw ArgumentError("simulate_dataset needs n >= 2");
  std::uniform_real_distribution<double> u3(0.0, 3.0), u5(0.0, 5.0), u2(0.0, 2.0), unit(0.0, 1.0);
  std::gamma_distribution<double> g22(2.0, 2.0), g31(3.0, 1.0), g11(1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double surrogate_shift = setting == 1 ? 1.5 : 1.0;
  Eigen::VectorXd y(n), s(n);
  Eigen::VectorXi g(n);
  Eigen::MatrixXd x(n, 6);
  double row[6];
  for (Eigen::Index i = 0; i < n; ++i) {
    row[0] = u3(rng);
    row[1] = g22(rng);
    row[2] = u5(rng);
    row[3] = g31(rng);
    row[4] = u2(rng);
    row[5] = g11(rng);
    const double eta = 0.2 * row[0] + 0.3 * row[1] + 0.5 * row[2] + 0.2 * row[3] + 0.4 * row[4] + 0.1 * row[5];
    const double p_treat = 0.5 / (1.0 + std::exp(-eta));
    const int gi = unit(rng) < p_treat ? 1 : 0;
    const double z_s = normal(rng);
    const double z_y = normal(rng);

    const double s_mean = surrogate_shift * gi + 0.2 * row[0] + 0.2 * row[1] + 0.3 * row[2] + 0.1 * row[3] +
                          0.4 * row[4] + 0.3 * row[5];
    const double si =
        s_mean + (options.surrogate_noise ? surrogate_noise_sd(gi, options.surrogate_noise_scale) * z_s : 0.0);
    const double yi = outcome_mean(setting, gi, si, row) + (options.outcome_noise ? z_y : 0.0);
    for (int j = 0; j < 6; ++j) x(i, j) = row[j];
    g[i] = gi;
    s[i] = si;
    y[i] = yi;
  }
  return make_dataset(std::move(y), std::move(s), std::move(g), std::move(x),
                      {"x1", "x2", "x3", "x4", "x5", "x6"});
}

TruePte true_pte(int setting, const Eigen::MatrixXd& x) {
  check_setting_id(setting);
  if (x.cols() < 1) throw ArgumentError("true_pte needs the x1 column");
  const Eigen::ArrayXd x1 = x.col(0).array();
  TruePte t;
  switch (setting) {
    case 1:
      t.delta = (4.0 + 2.0 * x1).matrix();
      t.delta_s = (1.0 + 2.0 * x1).matrix();
      break;
    case 2:
    case 3:
      t.delta = (3.0 + 1.5 * x1.square()).matrix();
      t.delta_s = (1.0 + 1.5 * x1.square()).matrix();
      break;
    default:
      t.delta = Eigen::VectorXd::Constant(x.rows(), 3.0);
      t.delta_s = Eigen::VectorXd::Constant(x.rows(), 1.0);
      break;
  }
  t.r_s = (1.0 - t.delta_s.array() / t.delta.array()).matrix();
  return t;
}

void SettingSpec::check() const {
  check_setting_id(id);
  if (n < 2) throw ArgumentError("setting n must be at least 2");
  if (test_size < 1 || test_size >= n) throw ArgumentError("setting test_size must satisfy 1 <= test_size < n");
  if (iterations < 1) throw ArgumentError("iterations must be at least 1");
  if (bootstrap < 1) throw ArgumentError("bootstrap replicates must be at least 1");
  if (!std::isfinite(kappa)) throw ArgumentError("kappa must be finite");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
}

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double scaled_mad(std::vector<double> values) {
  if (values.empty()) return kNaN;
  const double center = median(values);
  for (auto& v : values) v = std::abs(v - center);
  return 1.4826 * median(std::move(values));
}

namespace {

struct BinEdges {
  double lower;
  double width;
  int count;

  int locate(double v) const {
    if (!(width > 0.0)) return 0;
    const int b = static_cast<int>(std::floor((v - lower) / width));
    return std::clamp(b, 0, count - 1);
  }
};

BinEdges bin_edges(std::span<const PointRecord> points, int bins) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : points) {
    lo = std::min(lo, p.x1);
    hi = std::max(hi, p.x1);
  }
  if (points.empty()) return {0.0, 0.0, 1};
  return {lo, (hi - lo) / bins, bins};
}

}  // namespace

MetricsSummary summarize_metrics(std::span<const PointRecord> points, double kappa) {
  MetricsSummary out;
  out.points = static_cast<Eigen::Index>(points.size());
  std::vector<double> abs_err, sq_err, se;
  double sum_est = 0.0, sum_truth = 0.0;
  Eigen::Index covered = 0, with_ci = 0;
  std::vector<bool> decisions, truth;
  const BinEdges edges = bin_edges(points, kSummaryBins);
  std::vector<std::vector<double>> bin_errors(static_cast<std::size_t>(edges.count));
  for (const auto& p : points) {
    decisions.push_back(p.strong);
    truth.push_back(p.r_true > kappa);
    sum_truth += p.r_true;
    if (p.ci_valid_count > 0) {
      ++with_ci;
      if (p.ci_lower <= p.r_true && p.r_true <= p.ci_upper) ++covered;
    } else {
      ++out.undefined_intervals;
    }
    if (!p.valid) {
      ++out.invalid_points;
      continue;
    }
    const double err = p.r_hat - p.r_true;
    abs_err.push_back(std::abs(err));
    sq_err.push_back(err * err);
    sum_est += p.r_hat;
    if (std::isfinite(p.boot_se)) se.push_back(p.boot_se);
    bin_errors[static_cast<std::size_t>(edges.locate(p.x1))].push_back(err);
  }
  std::vector<double> bin_mads;
  for (auto& errs : bin_errors)
    if (errs.size() >= 2) bin_mads.push_back(scaled_mad(std::move(errs)));
  const auto valid = static_cast<double>(abs_err.size());
  out.bias = median(abs_err);
  out.mse = median(sq_err);
  out.ase = median(se);
  out.ese = median(bin_mads);
  out.coverage = with_ci > 0 ? static_cast<double>(covered) / static_cast<double>(with_ci) : kNaN;
  out.mean_estimate = valid > 0 ? sum_est / valid : kNaN;
  out.mean_truth = points.empty() ? kNaN : sum_truth / static_cast<double>(points.size());
  out.identification = confusion_metrics(decisions, truth);
  return out;
}

std::vector<BinSummary> summarize_bins(std::span<const PointRecord> points, int bins) {
  const BinEdges edges = bin_edges(points, bins);
  std::vector<std::vector<const PointRecord*>> members(static_cast<std::size_t>(edges.count));
  for (const auto& p : points) members[static_cast<std::size_t>(edges.locate(p.x1))].push_back(&p);
  std::vector<BinSummary> out;
  for (int b = 0; b < edges.count; ++b) {
    BinSummary s;
    s.lower = edges.lower + b * edges.width;
    s.upper = edges.lower + (b + 1) * edges.width;
    const auto& ms = members[static_cast<std::size_t>(b)];
    s.count = static_cast<Eigen::Index>(ms.size());
    std::vector<double> abs_err, err;
    double sum_est = 0.0, sum_truth = 0.0;
    Eigen::Index covered = 0, with_ci = 0;
    for (const auto* p : ms) {
      sum_truth += p->r_true;
      if (p->ci_valid_count > 0) {
        ++with_ci;
        if (p->ci_lower <= p->r_true && p->r_true <= p->ci_upper) ++covered;
      }
      if (!p->valid) continue;
      abs_err.push_back(std::abs(p->r_hat - p->r_true));
      err.push_back(p->r_hat - p->r_true);
      sum_est += p->r_hat;
    }
    s.bias = median(abs_err);
    s.ese = err.size() >= 2 ? scaled_mad(err) : kNaN;
    s.coverage = with_ci > 0 ? static_cast<double>(covered) / static_cast<double>(with_ci) : kNaN;
    s.mean_estimate = err.empty() ? kNaN : sum_est / static_cast<double>(err.size());
    s.mean_truth = ms.empty() ? kNaN : sum_truth / static_cast<double>(ms.size());
    out.push_back(s);
  }
  return out;
}

namespace {

std::vector<PointRecord> run_iteration(const SettingSpec& setting, const LearnerSpec& learner, Eigen::Index it) {
  const auto iter = static_cast<std::uint64_t>(it);
  Engine data_rng = make_stream(setting.seed, StreamTag::data, {iter});
  const Dataset data = simulate_dataset(setting.id, setting.n, data_rng, setting.noise);
  Engine split_rng = make_stream(setting.seed, StreamTag::split, {iter});
  const SplitDataset parts = split(data, setting.test_size, split_rng);

  const std::uint64_t fit_seed = derive_seed(setting.seed, StreamTag::fit, {iter});
  const auto model = fit_tlearner(parts.train, learner, fit_seed, nullptr, 1);
  const double floor = default_delta_floor(parts.train.y);
  const PteEstimate est = estimate_pte(model, parts.test.x, floor);

  BootstrapOptions boot;
  boot.replicates = setting.bootstrap;
  boot.seed = derive_seed(setting.seed, StreamTag::bootstrap, {iter});
  boot.delta_floor = floor;
  boot.workers = 1;
  const auto dist = bootstrap_pte(parts.train, parts.test.x, model.tuning, boot);
  const auto intervals = percentile_ci(dist, setting.alpha);
  const Eigen::VectorXd se = bootstrap_se(dist);
  const auto ident = identify(dist, setting.kappa, setting.alpha);
  const TruePte truth = true_pte(setting.id, parts.test.x);

  std::vector<PointRecord> out(static_cast<std::size_t>(parts.test.rows()));
  for (Eigen::Index i = 0; i < parts.test.rows(); ++i) {
    auto& r = out[static_cast<std::size_t>(i)];
    const auto& ci = intervals[static_cast<std::size_t>(i)].r_s;
    const auto& id = ident.rows[static_cast<std::size_t>(i)];
    r.iteration = it;
    r.test_index = parts.test_indices[static_cast<std::size_t>(i)];
    r.x1 = parts.test.x(i, 0);
    r.delta_true = truth.delta[i];
    r.delta_s_true = truth.delta_s[i];
    r.r_true = truth.r_s[i];
    r.delta_hat = est.delta[i];
    r.delta_s_hat = est.delta_s[i];
    r.r_hat = est.r_s[i];
    r.valid = est.valid[i];
    r.ci_lower = ci.lower;
    r.ci_upper = ci.upper;
    r.ci_valid_count = ci.valid_count;
    r.boot_se = se[i];
    r.p_raw = id.p_raw;
    r.p_adjusted = id.p_adjusted;
    r.strong = id.strong;
    r.truth_strong = r.r_true > setting.kappa;
  }
  return out;
}

}  // namespace

StudyResult run_study(const SettingSpec& setting, const LearnerSpec& learner, const StudyOptions& options) {
  setting.check();
  learner.check();
  const auto iterations = static_cast<std::size_t>(setting.iterations);
  std::vector<std::vector<PointRecord>> per_iteration(iterations);
  std::vector<std::string> failure(iterations);
  std::mutex progress_guard;
  parallel_for(iterations, options.workers, [&](std::size_t it) {
    try {
      per_iteration[it] = run_iteration(setting, learner, static_cast<Eigen::Index>(it));
    } catch (const Error& e) {
      failure[it] = std::string(e.kind()) + ": " + e.what();
    }
    if (options.on_iteration) {
      std::lock_guard lock(progress_guard);
      options.on_iteration(static_cast<Eigen::Index>(it));
    }
  });

  StudyResult result;
  auto& report = result.report;
  report.setting = setting;
  report.learner = learner;
  report.attempted = setting.iterations;
  for (std::size_t it = 0; it < iterations; ++it) {
    if (!failure[it].empty()) {
      report.failures.push_back({static_cast<Eigen::Index>(it), failure[it]});
      continue;
    }
    ++report.completed;
    result.points.insert(result.points.end(), per_iteration[it].begin(), per_iteration[it].end());
  }
  report.metrics = summarize_metrics(result.points, setting.kappa);
  report.bins = summarize_bins(result.points);
  return result;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const SettingSpec& s) {
  return {{"setting", s.id},
          {"n", s.n},
          {"test_size", s.test_size},
          {"iterations", s.iterations},
          {"bootstrap", s.bootstrap},
          {"kappa", s.kappa},
          {"alpha", s.alpha},
          {"seed", s.seed},
          {"surrogate_noise", s.noise.surrogate_noise},
          {"outcome_noise", s.noise.outcome_noise},
          {"surrogate_noise_scale", to_string(s.noise.surrogate_noise_scale)}};
}

json to_json(const MetricsSummary& m) {
  return {{"bias", number_or_null(m.bias)},
          {"ese", number_or_null(m.ese)},
          {"ase", number_or_null(m.ase)},
          {"mse", number_or_null(m.mse)},
          {"coverage", number_or_null(m.coverage)},
          {"mean_estimate", number_or_null(m.mean_estimate)},
          {"mean_truth", number_or_null(m.mean_truth)},
          {"points", m.points},
          {"invalid_points", m.invalid_points},
          {"undefined_intervals", m.undefined_intervals},
          {"identification", to_json(m.identification)}};
}

json to_json(const StudyReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"iteration", f.iteration}, {"reason", f.reason}});
  json bins = json::array();
  for (const auto& b : r.bins)
    bins.push_back({{"x1_lower", b.lower},
                    {"x1_upper", b.upper},
                    {"count", b.count},
                    {"bias", number_or_null(b.bias)},
                    {"ese", number_or_null(b.ese)},
                    {"coverage", number_or_null(b.coverage)},
                    {"mean_estimate", number_or_null(b.mean_estimate)},
                    {"mean_truth", number_or_null(b.mean_truth)}});
  return {{"setting", to_json(r.setting)},
          {"learner", to_json(r.learner)},
          {"attempted_iterations", r.attempted},
          {"completed_iterations", r.completed},
          {"failures", failures},
          {"metrics", to_json(r.metrics)},
          {"x1_bins", bins}};
}

std::string points_csv(std::span<const PointRecord> points) {
  std::string out =
      "iteration,test_index,x1,delta_true,delta_s_true,r_true,delta,delta_s,r_s,valid,ci_lower,ci_upper,"
      "ci_valid_count,boot_se,p_raw,p_adjusted,strong,truth_strong\n";
  for (const auto& p : points) {
    out += std::to_string(p.iteration) + ',' + std::to_string(p.test_index) + ',' + format_number(p.x1) + ',' +
           format_number(p.delta_true) + ',' + format_number(p.delta_s_true) + ',' + format_number(p.r_true) + ',' +
           format_optional(p.delta_hat) + ',' + format_optional(p.delta_s_hat) + ',' + format_optional(p.r_hat) +
           ',' + (p.valid ? "1" : "0") + ',' + format_optional(p.ci_lower) + ',' + format_optional(p.ci_upper) +
           ',' + std::to_string(p.ci_valid_count) + ',' + format_optional(p.boot_se) + ',' +
           format_optional(p.p_raw) + ',' + format_optional(p.p_adjusted) + ',' + (p.strong ? "1" : "0") + ',' +
           (p.truth_strong ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace hetsurr
