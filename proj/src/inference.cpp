#include "hetsurr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetsurr/errors.hpp"
#include "hetsurr/parallel.hpp"
#include "hetsurr/random.hpp"

namespace hetsurr {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Replicate {
  PteEstimate estimate;
  Eigen::Index redraws = 0;
};

Replicate run_replicate(const Dataset& train, const Eigen::MatrixXd& test_x, const TuningRecord& frozen,
                        const BootstrapOptions& options, Eigen::Index b) {
  const Eigen::Index n = train.rows();
  const Eigen::Index p = train.covariates();
  const Eigen::Index need_x = minimum_rows(frozen.spec, p);
  const Eigen::Index need_sx = minimum_rows(frozen.spec, p + 1);
  Engine rng = make_stream(options.seed, StreamTag::bootstrap, {static_cast<std::uint64_t>(b)});
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  Replicate out;
  for (int attempt = 0; attempt <= options.max_redraws; ++attempt) {
    for (auto& r : rows) r = pick(rng);
    Eigen::Index n1 = 0;
    for (auto r : rows) n1 += train.g[r];
    const Eigen::Index n0 = n - n1;
    if (std::min(n0, n1) < std::max(need_x, need_sx)) {
      ++out.redraws;
      continue;
    }
    const Dataset resample = subset(train, rows);
    const std::uint64_t fit_seed = derive_seed(options.seed, StreamTag::fit, {static_cast<std::uint64_t>(b)});
    try {
      const auto model = fit_tlearner(resample, frozen.spec, fit_seed, &frozen, 1);
      out.estimate = estimate_pte(model, test_x, options.delta_floor);
      return out;
    } catch (const InsufficientDataError&) {
      ++out.redraws;
    }
  }
  throw InsufficientDataError("bootstrap replicate " + std::to_string(b) + " could not be fit after " +
                              std::to_string(options.max_redraws) + " redraws");
}

}  // namespace

BootstrapDistribution bootstrap_pte(const Dataset& train, const Eigen::MatrixXd& test_x,
                                    const TuningRecord& frozen, const BootstrapOptions& options) {
  if (options.replicates < 1) throw ArgumentError("bootstrap needs at least one replicate");
  if (test_x.cols() != train.covariates())
    throw ArgumentError("bootstrap: test covariates do not match the training data");
  frozen.spec.check();
  const Eigen::Index B = options.replicates;
  const Eigen::Index m = test_x.rows();

  std::vector<Replicate> reps(static_cast<std::size_t>(B));
  parallel_for(reps.size(), options.workers, [&](std::size_t b) {
    reps[b] = run_replicate(train, test_x, frozen, options, static_cast<Eigen::Index>(b));
  });

  BootstrapDistribution dist;
  dist.tuning = frozen;
  dist.delta.resize(B, m);
  dist.delta_s.resize(B, m);
  dist.r_s.resize(B, m);
  dist.valid.resize(B, m);
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& rep = reps[static_cast<std::size_t>(b)];
    dist.delta.row(b) = rep.estimate.delta.transpose();
    dist.delta_s.row(b) = rep.estimate.delta_s.transpose();
    dist.r_s.row(b) = rep.estimate.r_s.transpose();
    dist.valid.row(b) = rep.estimate.valid.transpose();
    dist.redraws += rep.redraws;
  }
  return dist;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw ArgumentError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ArgumentError("quantile probability must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

Interval column_interval(const Eigen::MatrixXd& values, const MaskMatrix* valid, Eigen::Index col, double alpha) {
  std::vector<double> sample;
  sample.reserve(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index b = 0; b < values.rows(); ++b)
    if (!valid || (*valid)(b, col)) sample.push_back(values(b, col));
  Interval out;
  out.valid_count = static_cast<Eigen::Index>(sample.size());
  out.sparse = 2 * out.valid_count < values.rows();
  if (sample.empty()) return out;
  std::sort(sample.begin(), sample.end());
  out.lower = quantile_sorted(sample, alpha / 2.0);
  out.upper = quantile_sorted(sample, 1.0 - alpha / 2.0);
  return out;
}

}  // namespace

std::vector<PointIntervals> percentile_ci(const BootstrapDistribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  std::vector<PointIntervals> out(static_cast<std::size_t>(dist.points()));
  for (Eigen::Index i = 0; i < dist.points(); ++i) {
    auto& row = out[static_cast<std::size_t>(i)];
    row.delta = column_interval(dist.delta, nullptr, i, alpha);
    row.delta_s = column_interval(dist.delta_s, nullptr, i, alpha);
    row.r_s = column_interval(dist.r_s, &dist.valid, i, alpha);
  }
  return out;
}

Eigen::VectorXd bootstrap_se(const BootstrapDistribution& dist) {
  Eigen::VectorXd out(dist.points());
  for (Eigen::Index i = 0; i < dist.points(); ++i) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index b = 0; b < dist.replicates(); ++b)
      if (dist.valid(b, i)) {
        sum += dist.r_s(b, i);
        ++count;
      }
    if (count < 2) {
      out[i] = kNaN;
      continue;
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (Eigen::Index b = 0; b < dist.replicates(); ++b)
      if (dist.valid(b, i)) ss += (dist.r_s(b, i) - mean) * (dist.r_s(b, i) - mean);
    out[i] = std::sqrt(ss / static_cast<double>(count - 1));
  }
  return out;
}

std::vector<double> bh_adjust(std::span<const double> p) {
  const std::size_t m = p.size();
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("p-values must lie in [0, 1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double scaled = static_cast<double>(m) * p[order[k]] / static_cast<double>(k + 1);
    running = std::min(running, scaled);
    // m * p / m can round below p; the adjusted value never drops under p.
    adjusted[order[k]] = std::min(1.0, std::max(running, p[order[k]]));
  }
  return adjusted;
}

Eigen::Index IdentificationResult::strong_count() const noexcept {
  return std::count_if(rows.begin(), rows.end(), [](const IdentificationRow& r) { return r.strong; });
}

IdentificationResult identify(const BootstrapDistribution& dist, double kappa, double alpha) {
  if (!std::isfinite(kappa)) throw ArgumentError("kappa must be finite");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  IdentificationResult out;
  out.kappa = kappa;
  out.alpha = alpha;
  out.rows.resize(static_cast<std::size_t>(dist.points()));
  std::vector<double> family;
  std::vector<std::size_t> members;
  for (Eigen::Index i = 0; i < dist.points(); ++i) {
    auto& row = out.rows[static_cast<std::size_t>(i)];
    Eigen::Index below = 0;
    for (Eigen::Index b = 0; b < dist.replicates(); ++b) {
      if (!dist.valid(b, i)) continue;
      ++row.valid_count;
      if (dist.r_s(b, i) <= kappa) ++below;
    }
    if (row.valid_count == 0) continue;
    row.p_raw = static_cast<double>(below) / static_cast<double>(row.valid_count);
    family.push_back(row.p_raw);
    members.push_back(static_cast<std::size_t>(i));
  }
  const auto adjusted = bh_adjust(family);
  for (std::size_t k = 0; k < members.size(); ++k) {
    auto& row = out.rows[members[k]];
    row.p_adjusted = adjusted[k];
    row.strong = row.p_adjusted < alpha;
  }
  return out;
}

ConfusionMetrics confusion_metrics(Eigen::Index tp, Eigen::Index fp, Eigen::Index tn, Eigen::Index fn) {
  ConfusionMetrics m;
  m.true_positive = tp;
  m.false_positive = fp;
  m.true_negative = tn;
  m.false_negative = fn;
  auto ratio = [](Eigen::Index num, Eigen::Index den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.ppv = ratio(tp, tp + fp);
  m.npv = ratio(tn, tn + fn);
  m.specificity = ratio(tn, tn + fp);
  m.sensitivity = ratio(tp, tp + fn);
  return m;
}

ConfusionMetrics confusion_metrics(const std::vector<bool>& decisions, const std::vector<bool>& truth) {
  if (decisions.size() != truth.size()) throw ArgumentError("decisions and truth must have equal length");
  Eigen::Index tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i]) (truth[i] ? tp : fp)++;
    else (truth[i] ? fn : tn)++;
  }
  return confusion_metrics(tp, fp, tn, fn);
}

json to_json(const ConfusionMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"ppv", opt(m.ppv)},
          {"npv", opt(m.npv)},
          {"specificity", opt(m.specificity)},
          {"sensitivity", opt(m.sensitivity)},
          {"counts",
           {{"true_positive", m.true_positive},
            {"false_positive", m.false_positive},
            {"true_negative", m.true_negative},
            {"false_negative", m.false_negative}}}};
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index b = 0; b < m.rows(); ++b) {
    json row = json::array();
    for (Eigen::Index i = 0; i < m.cols(); ++i) {
      if (std::isnan(m(b, i))) row.push_back(nullptr);
      else row.push_back(m(b, i));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows) throw ArgumentError("bootstrap artifact: bad replicate count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index b = 0; b < rows; ++b) {
    const auto& row = j[static_cast<std::size_t>(b)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ArgumentError("bootstrap artifact: bad point count");
    for (Eigen::Index i = 0; i < cols; ++i) {
      const auto& e = row[static_cast<std::size_t>(i)];
      m(b, i) = e.is_null() ? kNaN : e.get<double>();
    }
  }
  return m;
}

}  // namespace

json to_json(const BootstrapDistribution& dist) {
  json valid = json::array();
  for (Eigen::Index b = 0; b < dist.replicates(); ++b) {
    json row = json::array();
    for (Eigen::Index i = 0; i < dist.points(); ++i) row.push_back(dist.valid(b, i) ? 1 : 0);
    valid.push_back(std::move(row));
  }
  return {{"format_version", 1},
          {"replicates", dist.replicates()},
          {"points", dist.points()},
          {"redraws", dist.redraws},
          {"tuning", to_json(dist.tuning)},
          {"delta", matrix_json(dist.delta)},
          {"delta_s", matrix_json(dist.delta_s)},
          {"r_s", matrix_json(dist.r_s)},
          {"valid", valid}};
}

namespace {

BootstrapDistribution bootstrap_from_json_impl(const json& j) {
  if (j.value("format_version", 0) != 1) throw ArgumentError("unsupported bootstrap artifact format_version");
  BootstrapDistribution dist;
  const auto B = j.at("replicates").get<Eigen::Index>();
  const auto m = j.at("points").get<Eigen::Index>();
  if (B < 1 || m < 0) throw ArgumentError("bootstrap artifact: bad dimensions");
  dist.redraws = j.value("redraws", Eigen::Index{0});
  dist.tuning = tuning_from_json(j.at("tuning"));
  dist.delta = matrix_from_json(j.at("delta"), B, m);
  dist.delta_s = matrix_from_json(j.at("delta_s"), B, m);
  dist.r_s = matrix_from_json(j.at("r_s"), B, m);
  dist.valid.resize(B, m);
  const auto& valid = j.at("valid");
  if (static_cast<Eigen::Index>(valid.size()) != B) throw ArgumentError("bootstrap artifact: bad valid mask");
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& row = valid[static_cast<std::size_t>(b)];
    if (static_cast<Eigen::Index>(row.size()) != m) throw ArgumentError("bootstrap artifact: bad valid mask");
    for (Eigen::Index i = 0; i < m; ++i) dist.valid(b, i) = row[static_cast<std::size_t>(i)].get<int>() != 0;
  }
  return dist;
}

}  // namespace

BootstrapDistribution bootstrap_from_json(const json& j) {
  try {
    return bootstrap_from_json_impl(j);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed bootstrap artifact: ") + e.what());
  }
}

}  // namespace hetsurr
