#include <doctest.h>

#include <numeric>

#include "hetsurr/errors.hpp"
#include "hetsurr/forest.hpp"
#include "helpers.hpp"

using namespace hetsurr;

namespace {

ForestParams small_forest(int trees) {
  ForestParams p;
  p.num_trees = trees;
  return p;
}

}  // namespace

TEST_SUITE("forest") {
  TEST_CASE("constant target predicts the constant exactly") {
    const Eigen::MatrixXd x = testing::uniform_matrix(200, 3, 1);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(200, 0.1 + 0.2);
    const auto model = fit_forest_model(x, y, small_forest(50), 9, 1);
    const Eigen::VectorXd p = predict(model, testing::uniform_matrix(100, 3, 2, -1.0, 2.0));
    CHECK((p.array() == y[0]).all());
  }

  TEST_CASE("predictions stay within the target range") {
    const Eigen::MatrixXd x = testing::uniform_matrix(300, 4, 3);
    const Eigen::VectorXd y = testing::normal_vector(300, 4, 3.0) + x.col(0) * 5.0;
    const auto model = fit_forest_model(x, y, small_forest(100), 5, 1);
    const Eigen::VectorXd p = predict(model, testing::uniform_matrix(500, 4, 6, -3.0, 4.0));
    CHECK(p.minCoeff() >= y.minCoeff());
    CHECK(p.maxCoeff() <= y.maxCoeff());
  }

  TEST_CASE("worker count does not change the forest") {
    const Eigen::MatrixXd x = testing::uniform_matrix(250, 3, 7);
    const Eigen::VectorXd y = x.rowwise().squaredNorm() + testing::normal_vector(250, 8, 0.2);
    const auto serial = fit_forest_model(x, y, small_forest(40), 77, 1);
    const auto threaded = fit_forest_model(x, y, small_forest(40), 77, 3);
    const Eigen::MatrixXd grid = testing::uniform_matrix(200, 3, 10);
    CHECK(predict(serial, grid) == predict(threaded, grid));
    CHECK(predict(serial, grid) == predict(serial, grid));
    const auto other_seed = fit_forest_model(x, y, small_forest(40), 78, 1);
    CHECK(predict(serial, grid) != predict(other_seed, grid));
  }

  TEST_CASE("step function is learned away from the jump") {
    const Eigen::MatrixXd x = testing::uniform_matrix(2000, 1, 11);
    const Eigen::VectorXd y = (x.col(0).array() > 0.5).cast<double>().matrix();
    const auto model = fit_forest_model(x, y, small_forest(500), 12, 1);
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(1001, 0.0, 1.0);
    const Eigen::VectorXd p = predict(model, grid);
    double err = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      if (std::abs(grid[i] - 0.5) < 0.05) continue;
      err += std::abs(p[i] - (grid[i] > 0.5 ? 1.0 : 0.0));
      ++count;
    }
    CHECK(err / count < 0.05);
  }

  TEST_CASE("honest tree respects min_node_size and routes by threshold") {
    const Eigen::MatrixXd x = testing::uniform_matrix(400, 2, 13);
    const Eigen::VectorXd y = x.col(0) + testing::normal_vector(400, 14, 0.1);
    std::vector<Eigen::Index> structure(200), estimation(200);
    std::iota(structure.begin(), structure.end(), 0);
    std::iota(estimation.begin(), estimation.end(), 200);
    Engine rng = make_engine(15);
    const auto tree = grow_honest_tree(x, y, structure, estimation, 2, 5, rng);
    REQUIRE(tree.nodes.size() > 1);
    // count structure rows per leaf
    std::vector<int> leaf_count(tree.nodes.size(), 0);
    for (auto r : structure) {
      std::int32_t k = 0;
      while (tree.nodes[static_cast<std::size_t>(k)].feature >= 0) {
        const auto& n = tree.nodes[static_cast<std::size_t>(k)];
        k = x(r, n.feature) <= n.threshold ? n.left : n.right;
      }
      ++leaf_count[static_cast<std::size_t>(k)];
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
      if (tree.nodes[k].feature < 0) CHECK(leaf_count[k] >= 5);
  }

  TEST_CASE("leaf values come from the estimation sample only") {
    // Structure targets are 0/1 by x; estimation targets are shifted by 100.
    Eigen::MatrixXd x(40, 1);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 20; ++i) {
      x(i, 0) = i;
      y[i] = i < 10 ? 0.0 : 1.0;
      x(20 + i, 0) = i;
      y[20 + i] = 100.0 + (i < 10 ? 0.0 : 1.0);
    }
    std::vector<Eigen::Index> structure(20), estimation(20);
    std::iota(structure.begin(), structure.end(), 0);
    std::iota(estimation.begin(), estimation.end(), 20);
    Engine rng = make_engine(1);
    const auto tree = grow_honest_tree(x, y, structure, estimation, 1, 5, rng);
    const double low[1] = {2.0};
    const double high[1] = {15.0};
    CHECK(tree.predict(low) == 100.0);
    CHECK(tree.predict(high) == 101.0);
  }

  TEST_CASE("empty estimation leaf inherits from its parent") {
    Eigen::MatrixXd x(12, 1);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 10; ++i) {
      x(i, 0) = i;
      y[i] = i < 5 ? 0.0 : 1.0;
    }
    x(10, 0) = 1.0;  // both estimation rows fall in the left leaf
    y[10] = 3.0;
    x(11, 0) = 2.0;
    y[11] = 5.0;
    std::vector<Eigen::Index> structure(10);
    std::iota(structure.begin(), structure.end(), 0);
    const std::vector<Eigen::Index> estimation{10, 11};
    Engine rng = make_engine(1);
    const auto tree = grow_honest_tree(x, y, structure, estimation, 1, 5, rng);
    REQUIRE(tree.nodes.size() == 3);
    const double right[1] = {8.0};
    CHECK(tree.predict(right) == 4.0);
  }

  TEST_CASE("too few rows and mtry default") {
    CHECK_THROWS_AS(fit_forest_model(testing::uniform_matrix(9, 2, 1), Eigen::VectorXd::Zero(9), small_forest(5), 1, 1),
                    InsufficientDataError);
    CHECK(resolve_mtry(0, 7) == 3);
    CHECK(resolve_mtry(0, 9) == 3);
    CHECK(resolve_mtry(10, 4) == 4);
  }
}
