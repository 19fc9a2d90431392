#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "hetsurr/errors.hpp"
#include "hetsurr/estimator.hpp"
#include "hetsurr/simulation.hpp"
#include "helpers.hpp"

using namespace hetsurr;

namespace {

Dataset setting_data(int setting, Eigen::Index n, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  return simulate_dataset(setting, n, rng);
}

LearnerSpec family(Family f) {
  LearnerSpec spec;
  spec.family = f;
  spec.forest.num_trees = 20;
  return spec;
}

// Brute-force KS: evaluate both ECDFs at every pooled point.
double ks_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  auto ecdf = [](const std::vector<double>& v, double t) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double e) { return e <= t; })) /
           static_cast<double>(v.size());
  };
  double d = 0.0;
  for (const auto* v : {&a, &b})
    for (double t : *v) d = std::max(d, std::abs(ecdf(a, t) - ecdf(b, t)));
  return d;
}

}  // namespace

TEST_SUITE("estimator") {
  TEST_CASE("lambda1 matches a direct regression on the treated rows") {
    const Dataset d = setting_data(1, 20000, 1);
    const auto model = fit_tlearner(d, family(Family::linear), 3);
    const Dataset treated = group_slice(d, 1);
    const Eigen::VectorXd oracle = testing::normal_equations(treated.x, treated.y);
    const auto* lambda1 = model[Component::lambda1].as<LinearModel>();
    REQUIRE(lambda1 != nullptr);
    CHECK((lambda1->coefficients - oracle).cwiseAbs().maxCoeff() < 1e-8);
    // Expectation algebra: 2 * 0.2 (through S) + 0.2 (direct) + 2 (interaction).
    CHECK(lambda1->coefficients[1] == doctest::Approx(2.6).epsilon(0.05));
  }

  TEST_CASE("empty control group names all control components") {
    Dataset d = setting_data(1, 200, 2);
    d = group_slice(d, 1);
    try {
      fit_tlearner(d, family(Family::linear), 1);
      FAIL("expected InsufficientDataError");
    } catch (const InsufficientDataError& e) {
      CHECK(e.component() == "lambda0/mu0/zeta0");
    }
  }

  TEST_CASE("same seed gives the same tuning record") {
    const Dataset d = setting_data(2, 600, 4);
    const auto a = fit_tlearner(d, family(Family::gam), 10);
    const auto b = fit_tlearner(d, family(Family::gam), 10);
    for (std::size_t c = 0; c < kComponents; ++c) {
      REQUIRE(a.tuning.components[c].gam_lambda.has_value());
      CHECK(a.tuning.components[c].gam_lambda == b.tuning.components[c].gam_lambda);
      CHECK(a.tuning.components[c].forest_seed == b.tuning.components[c].forest_seed);
    }
    const auto back = tuning_from_json(nlohmann::json::parse(to_json(a.tuning).dump()));
    CHECK(back.components[2].gam_lambda == a.tuning.components[2].gam_lambda);
    CHECK(back.spec.family == Family::gam);
  }

  TEST_CASE("frozen tuning reuses the smoothing parameters") {
    const Dataset d = setting_data(2, 600, 5);
    const auto first = fit_tlearner(d, family(Family::gam), 1);
    const Dataset other = setting_data(2, 600, 6);
    const auto refit = fit_tlearner(other, family(Family::gam), 2, &first.tuning);
    for (std::size_t c = 0; c < kComponents; ++c)
      CHECK(refit.learners[c].as<GamModel>()->lambda == *first.tuning.components[c].gam_lambda);
  }

  TEST_CASE("large-sample setting 1 gives r_s near one half at x1 = 1") {
    const Dataset d = setting_data(1, 200000, 7);
    const auto model = fit_tlearner(d, family(Family::linear), 1);
    Eigen::MatrixXd x(1, 6);
    x << 1.0, 4.0, 2.5, 3.0, 1.0, 1.0;
    const auto est = estimate_pte(model, x, 1e-6);
    CHECK(est.valid[0]);
    CHECK(est.r_s[0] == doctest::Approx(0.5).epsilon(0.03));
  }

  TEST_CASE("identical mu learners give delta_s = 0 and r_s = 1") {
    const Dataset d = setting_data(1, 500, 8);
    auto model = fit_tlearner(d, family(Family::linear), 1);
    model.learners[static_cast<std::size_t>(Component::mu1)] = model.learners[static_cast<std::size_t>(Component::mu0)];
    const auto est = estimate_pte(model, d.x.topRows(50), 1e-6);
    for (Eigen::Index i = 0; i < 50; ++i) {
      CHECK(est.delta_s[i] == 0.0);
      if (est.valid[i]) CHECK(est.r_s[i] == 1.0);
    }
  }

  TEST_CASE("large delta_floor invalidates every row") {
    const Dataset d = setting_data(4, 500, 9);  // delta = 3 everywhere
    const auto model = fit_tlearner(d, family(Family::linear), 1);
    const auto est = estimate_pte(model, d.x.topRows(30), 10.0);
    CHECK_FALSE(est.valid.any());
    CHECK(est.r_s.array().isNaN().all());
    CHECK_THROWS_AS(estimate_pte(model, d.x.leftCols(3), 1e-6), ArgumentError);
  }

  TEST_CASE("plug-in identity and scale invariance") {
    const Dataset d = setting_data(1, 1500, 10);
    const auto model = fit_tlearner(d, family(Family::linear), 1);
    const auto est = estimate_pte(model, d.x, 1e-6);
    for (Eigen::Index i = 0; i < est.size(); ++i)
      if (est.valid[i]) CHECK(std::abs((1.0 - est.r_s[i]) * est.delta[i] - est.delta_s[i]) < 1e-12);

    Dataset scaled = d;
    scaled.y *= 7.5;
    const auto est2 = estimate_pte(fit_tlearner(scaled, family(Family::linear), 1), d.x, 1e-6);
    CHECK((est2.delta - 7.5 * est.delta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((est2.r_s - est.r_s).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("KS statistic") {
    const Eigen::VectorXd a = testing::normal_vector(400, 11);
    const std::vector<double> va(a.begin(), a.end());
    CHECK(ks_statistic(va, va) == 0.0);
    std::vector<double> shifted = va;
    for (auto& v : shifted) v += 1.0;
    const double d = ks_statistic(va, shifted);
    CHECK(d > 0.3);
    CHECK(d == doctest::Approx(ks_oracle(va, shifted)).epsilon(1e-12));
    const Eigen::VectorXd b = testing::normal_vector(300, 12, 2.0);
    const std::vector<double> vb(b.begin(), b.end());
    const double d2 = ks_statistic(va, vb);
    CHECK(d2 >= 0.0);
    CHECK(d2 <= 1.0);
    CHECK(d2 == doctest::Approx(ks_oracle(va, vb)).epsilon(1e-12));
    const std::vector<double> tied{1, 1, 2, 2}, other{1, 2, 2, 2};
    CHECK(ks_statistic(tied, other) == doctest::Approx(ks_oracle(tied, other)));
  }

  TEST_CASE("zeta diagnostic separates good and constant fits") {
    const Dataset d = setting_data(1, 4000, 13);
    const Dataset control = group_slice(d, 0);
    REQUIRE(control.rows() > 1800);
    std::vector<Index> first(1800);
    std::iota(first.begin(), first.end(), Index{0});
    const Dataset c1800 = subset(control, first);
    const auto good = fit_linear(c1800.x, c1800.s);
    const auto diag = zeta_diagnostic(good, c1800);
    CHECK(diag.n == 1800);
    CHECK(diag.ks_statistic < 0.1);
    CHECK(diag.deciles.size() == 10);

    LinearModel flat;
    flat.coefficients = Eigen::VectorXd::Zero(7);
    flat.coefficients[0] = c1800.s.mean();
    flat.aliased.assign(7, false);
    const auto bad = zeta_diagnostic(FittedLearner(flat, 6), c1800);
    CHECK(bad.ks_statistic > diag.ks_statistic + 0.2);
    CHECK_THROWS_AS(zeta_diagnostic(good, d), ArgumentError);
  }
}
