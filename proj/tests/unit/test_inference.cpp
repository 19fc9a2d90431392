#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hetsurr/errors.hpp"
#include "hetsurr/inference.hpp"
#include "hetsurr/simulation.hpp"
#include "helpers.hpp"

using namespace hetsurr;

namespace {

BootstrapDistribution from_columns(const Eigen::MatrixXd& r) {
  BootstrapDistribution d;
  d.r_s = r;
  d.delta = Eigen::MatrixXd::Ones(r.rows(), r.cols());
  d.delta_s = Eigen::MatrixXd::Zero(r.rows(), r.cols());
  d.valid = MaskMatrix::Constant(r.rows(), r.cols(), true);
  return d;
}

// Type-7 quantile by its textbook definition: h = (n - 1) p, interpolate
// between the floor(h)-th and ceil(h)-th order statistics (0-based).
double quantile_oracle(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

// BH by definition: adjusted p_(i) = min_{j >= i} min(1, m p_(j) / j).
std::vector<double> bh_oracle(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto rank_i = static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [&](double v) { return v < p[i]; }));
    double best = 1.0;
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = rank_i; j < m; ++j) best = std::min(best, static_cast<double>(m) * sorted[j] / static_cast<double>(j + 1));
    out[i] = best;
  }
  return out;
}

struct Fixture {
  Dataset train;
  Eigen::MatrixXd test_x;
  TuningRecord tuning;
};

Fixture setting1(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  const Dataset d = simulate_dataset(1, n, rng);
  Engine srng = make_engine(seed + 1);
  auto parts = split(d, m, srng);
  const auto model = fit_tlearner(parts.train, LearnerSpec{}, seed);
  return {parts.train, parts.test.x, model.tuning};
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("bootstrap shape and worker independence") {
    const auto f = setting1(2000, 200, 1);
    BootstrapOptions opt;
    opt.replicates = 200;
    opt.seed = 5;
    const auto serial = bootstrap_pte(f.train, f.test_x, f.tuning, opt);
    CHECK(serial.r_s.rows() == 200);
    CHECK(serial.r_s.cols() == 200);
    opt.replicates = 40;
    const auto a = bootstrap_pte(f.train, f.test_x, f.tuning, opt);
    opt.workers = 3;
    const auto b = bootstrap_pte(f.train, f.test_x, f.tuning, opt);
    CHECK(a.r_s == b.r_s);
    CHECK(a.delta == b.delta);
    CHECK((a.valid == b.valid).all());
    CHECK(a.r_s == serial.r_s.topRows(40));
  }

  TEST_CASE("single replicate gives a degenerate interval") {
    const auto f = setting1(400, 20, 2);
    BootstrapOptions opt;
    opt.replicates = 1;
    opt.seed = 3;
    const auto dist = bootstrap_pte(f.train, f.test_x, f.tuning, opt);
    const auto ci = percentile_ci(dist, 0.05);
    for (Eigen::Index i = 0; i < 20; ++i) {
      CHECK(ci[static_cast<std::size_t>(i)].r_s.lower == dist.r_s(0, i));
      CHECK(ci[static_cast<std::size_t>(i)].r_s.upper == dist.r_s(0, i));
    }
  }

  TEST_CASE("unbalanced resamples are redrawn and counted") {
    // Only 3 treated rows out of 40: many resamples drop below the linear minimum.
    Eigen::MatrixXd x = testing::uniform_matrix(40, 1, 4);
    Eigen::VectorXi g = Eigen::VectorXi::Zero(40);
    g.head(5).setOnes();
    const Dataset d = make_dataset(x.col(0) + g.cast<double>(), x.col(0) * 0.5, g, x);
    const auto model = fit_tlearner(d, LearnerSpec{}, 1);
    BootstrapOptions opt;
    opt.replicates = 30;
    opt.seed = 8;
    const auto dist = bootstrap_pte(d, x.topRows(3), model.tuning, opt);
    CHECK(dist.redraws > 0);
    CHECK(dist.r_s.rows() == 30);
  }

  TEST_CASE("type-7 quantiles of 1..200") {
    std::vector<double> v(200);
    for (int i = 0; i < 200; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    CHECK(quantile_sorted(v, 0.025) == doctest::Approx(5.975).epsilon(1e-12));
    CHECK(quantile_sorted(v, 0.975) == doctest::Approx(195.025).epsilon(1e-12));
    CHECK(quantile_sorted(v, 0.025) == doctest::Approx(quantile_oracle(v, 0.025)));

    Eigen::MatrixXd r(200, 1);
    for (int i = 0; i < 200; ++i) r(199 - i, 0) = i + 1;  // order must not matter
    const auto ci = percentile_ci(from_columns(r), 0.05);
    CHECK(ci[0].r_s.lower == doctest::Approx(5.975));
    CHECK(ci[0].r_s.upper == doctest::Approx(195.025));
    CHECK(ci[0].delta.lower == 1.0);

    const auto half = percentile_ci(from_columns(r), 0.5);
    CHECK(half[0].r_s.lower == doctest::Approx(50.75));
    CHECK(half[0].r_s.upper == doctest::Approx(150.25));
    CHECK(half[0].r_s.lower <= 100.5);
  }

  TEST_CASE("percentile intervals against the oracle on random sets") {
    Engine rng = make_engine(17);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const int b = 1 + trial * 7;
      Eigen::MatrixXd r(b, 1);
      for (auto& e : r.reshaped()) e = z(rng);
      std::vector<double> v(r.data(), r.data() + b);
      const auto ci = percentile_ci(from_columns(r), 0.1);
      CHECK(ci[0].r_s.lower == doctest::Approx(quantile_oracle(v, 0.05)).epsilon(1e-12));
      CHECK(ci[0].r_s.upper == doctest::Approx(quantile_oracle(v, 0.95)).epsilon(1e-12));
    }
  }

  TEST_CASE("constant replicates and invalid entries") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(10, 2, 0.4);
    auto dist = from_columns(r);
    dist.r_s(0, 1) = 100.0;
    dist.valid.col(1).setConstant(false);
    dist.valid(0, 1) = false;
    const auto ci = percentile_ci(dist, 0.05);
    CHECK(ci[0].r_s.lower == 0.4);
    CHECK(ci[0].r_s.upper == 0.4);
    CHECK_FALSE(ci[1].r_s.defined());
    CHECK(std::isnan(ci[1].r_s.lower));
    CHECK(ci[1].delta.defined());

    dist.valid.col(1).head(4).setConstant(true);
    dist.valid(0, 1) = false;  // the outlier stays excluded
    const auto partial = percentile_ci(dist, 0.05);
    CHECK(partial[1].r_s.valid_count == 3);
    CHECK(partial[1].r_s.sparse);
    CHECK(partial[1].r_s.upper == 0.4);
  }

  TEST_CASE("identification p-values and decisions") {
    Eigen::MatrixXd r(50, 3);
    r.col(0).setConstant(0.9);   // always above kappa
    r.col(1).setConstant(0.1);   // always below
    r.col(2).setConstant(0.7);
    auto dist = from_columns(r);
    dist.valid.col(2).setConstant(false);
    const auto id = identify(dist, 0.5, 0.05);
    CHECK(id.rows[0].p_raw == 0.0);
    CHECK(id.rows[0].strong);
    CHECK(id.rows[1].p_raw == 1.0);
    CHECK_FALSE(id.rows[1].strong);
    CHECK(std::isnan(id.rows[2].p_raw));
    CHECK_FALSE(id.rows[2].strong);
    CHECK(id.rows[0].p_adjusted == 0.0);
    CHECK(id.rows[1].p_adjusted == 1.0);  // family of two, not three
    CHECK(id.strong_count() == 1);

    const auto none = identify(dist, 5.0, 0.05);
    CHECK(none.strong_count() == 0);
  }

  TEST_CASE("Benjamini-Hochberg examples") {
    CHECK(bh_adjust(std::vector<double>{0.2})[0] == 0.2);
    const auto adj = bh_adjust(std::vector<double>{0.01, 0.02, 0.04});
    CHECK(adj[0] == doctest::Approx(0.03));
    CHECK(adj[1] == doctest::Approx(0.03));
    CHECK(adj[2] == doctest::Approx(0.04));
    const auto ties = bh_adjust(std::vector<double>{0.3, 0.3, 0.3, 0.3});
    for (double v : ties) CHECK(v == doctest::Approx(0.3));
    CHECK(bh_adjust(std::vector<double>{}).empty());
    CHECK_THROWS_AS(bh_adjust(std::vector<double>{1.5}), ArgumentError);
  }

  TEST_CASE("Benjamini-Hochberg properties on random vectors") {
    Engine rng = make_engine(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, 60);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> p(static_cast<std::size_t>(len(rng)));
      for (auto& v : p) v = trial % 3 == 0 ? std::round(u(rng) * 10.0) / 10.0 : u(rng) * u(rng);
      const auto adj = bh_adjust(p);
      const auto oracle = bh_oracle(p);
      for (std::size_t i = 0; i < p.size(); ++i) {
        REQUIRE(adj[i] >= p[i]);
        REQUIRE(adj[i] <= 1.0);
        REQUIRE(adj[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
        for (std::size_t j = 0; j < p.size(); ++j)
          if (p[i] <= p[j]) REQUIRE(adj[i] <= adj[j]);
      }
    }
  }

  TEST_CASE("confusion metrics") {
    const std::vector<bool> truth{true, false, true, false};
    const auto perfect = confusion_metrics(truth, truth);
    CHECK(*perfect.ppv == 1.0);
    CHECK(*perfect.npv == 1.0);
    CHECK(*perfect.specificity == 1.0);
    CHECK(*perfect.sensitivity == 1.0);
    const auto silent = confusion_metrics(std::vector<bool>(4, false), truth);
    CHECK_FALSE(silent.ppv.has_value());
    CHECK(*silent.sensitivity == 0.0);
    const auto counts = confusion_metrics(3, 1, 5, 2);
    CHECK(*counts.ppv == doctest::Approx(0.75));
    CHECK(*counts.sensitivity == doctest::Approx(0.6));
    CHECK(*counts.specificity == doctest::Approx(5.0 / 6.0));
    CHECK(*counts.npv == doctest::Approx(5.0 / 7.0));
    CHECK_THROWS_AS(confusion_metrics(std::vector<bool>{true}, truth), ArgumentError);
    CHECK(to_json(silent).at("ppv").is_null());
  }

  TEST_CASE("bootstrap artifact round trip") {
    const auto f = setting1(300, 10, 3);
    BootstrapOptions opt;
    opt.replicates = 15;
    opt.seed = 4;
    auto dist = bootstrap_pte(f.train, f.test_x, f.tuning, opt);
    dist.valid(2, 3) = false;
    dist.r_s(2, 3) = std::nan("");
    const auto back = bootstrap_from_json(nlohmann::json::parse(to_json(dist).dump()));
    CHECK(back.delta == dist.delta);
    CHECK((back.valid == dist.valid).all());
    CHECK(std::isnan(back.r_s(2, 3)));
    CHECK(back.r_s(1, 1) == dist.r_s(1, 1));
    CHECK(back.tuning.spec.family == Family::linear);
    CHECK_THROWS_AS(bootstrap_from_json(nlohmann::json{{"format_version", 1}}), ArgumentError);
  }
}
