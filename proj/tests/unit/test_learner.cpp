#include <doctest.h>

#include "hetsurr/errors.hpp"
#include "hetsurr/learner.hpp"
#include "helpers.hpp"

using namespace hetsurr;

namespace {

LearnerSpec spec_for(Family f) {
  LearnerSpec spec;
  spec.family = f;
  spec.forest.num_trees = 30;
  return spec;
}

}  // namespace

TEST_SUITE("learner") {
  TEST_CASE("family names parse and print") {
    for (auto f : {Family::linear, Family::gam, Family::forest}) CHECK(parse_family(to_string(f)) == f);
    CHECK_THROWS_AS(parse_family("boosting"), ArgumentError);
  }

  TEST_CASE("lambda grid is log spaced over [1e-4, 1e4]") {
    const auto grid = GamParams{}.lambda_grid;
    REQUIRE(grid.size() == 20);
    CHECK(grid.front() == doctest::Approx(1e-4));
    CHECK(grid.back() == doctest::Approx(1e4));
    for (std::size_t i = 1; i < grid.size(); ++i)
      CHECK(std::log10(grid[i]) - std::log10(grid[i - 1]) == doctest::Approx(8.0 / 19.0));
  }

  TEST_CASE("spec validation rejects bad hyperparameters") {
    LearnerSpec s;
    s.forest.honesty_fraction = 1.0;
    CHECK_THROWS_AS(s.check(), ArgumentError);
    s = LearnerSpec{};
    s.gam.basis_size = 3;
    CHECK_THROWS_AS(s.check(), ArgumentError);
    s = LearnerSpec{};
    s.forest.num_trees = 0;
    CHECK_THROWS_AS(s.check(), ArgumentError);
    CHECK(learner_spec_from_json(to_json(spec_for(Family::forest))).forest.num_trees == 30);
  }

  TEST_CASE("dimension mismatch is an argument error") {
    const Eigen::MatrixXd x = testing::uniform_matrix(50, 2, 1);
    const auto fitted = fit_linear(x, x.col(0));
    CHECK(fitted.family() == Family::linear);
    CHECK_THROWS_AS(fitted.predict(testing::uniform_matrix(5, 3, 2)), ArgumentError);
  }

  TEST_CASE("forest predictions repeat exactly") {
    const Eigen::MatrixXd x = testing::uniform_matrix(100, 2, 3);
    const auto fitted = fit_forest(x, x.col(1), spec_for(Family::forest), 5);
    const Eigen::MatrixXd probe = testing::uniform_matrix(20, 2, 4);
    CHECK(fitted.predict(probe) == fitted.predict(probe));
  }

  TEST_CASE("model dump round-trips for every family") {
    const Eigen::MatrixXd x = testing::uniform_matrix(120, 3, 5);
    const Eigen::VectorXd y = x.col(0).array().square().matrix() + testing::normal_vector(120, 6, 0.1);
    const Eigen::MatrixXd probe = testing::uniform_matrix(40, 3, 7, -0.2, 1.2);
    for (auto f : {Family::linear, Family::gam, Family::forest}) {
      CAPTURE(to_string(f));
      const auto fitted = fit_learner(x, y, spec_for(f), LearnerTuning{std::nullopt, 99});
      const auto dumped = to_json(fitted);
      CHECK(dumped.at("format_version") == kModelFormatVersion);
      const auto back = learner_from_json(nlohmann::json::parse(dumped.dump()));
      CHECK(back.family() == f);
      CHECK(back.predict(probe) == fitted.predict(probe));
    }
  }

  TEST_CASE("malformed dumps are rejected") {
    const Eigen::MatrixXd x = testing::uniform_matrix(60, 1, 8);
    auto j = to_json(fit_forest(x, x.col(0), spec_for(Family::forest), 1));
    j["format_version"] = 99;
    CHECK_THROWS_AS(learner_from_json(j), ArgumentError);
    j = to_json(fit_forest(x, x.col(0), spec_for(Family::forest), 1));
    auto parsed = nlohmann::json::parse(j.dump());
    auto& tree = parsed.at("forest").at("trees").at(0);
    REQUIRE(tree.at("feature").at(0).get<int>() >= 0);
    tree.at("left").at(0) = 0;  // root pointing at itself
    CHECK_THROWS_AS(learner_from_json(parsed), ArgumentError);
  }

  TEST_CASE("minimum rows per family") {
    CHECK(minimum_rows(spec_for(Family::linear), 6) == 8);
    CHECK(minimum_rows(spec_for(Family::gam), 6) == 2 + 6 * 9);
    CHECK(minimum_rows(spec_for(Family::forest), 6) == 10);
  }
}
