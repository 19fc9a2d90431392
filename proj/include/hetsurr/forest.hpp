#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetsurr/random.hpp"
#include "hetsurr/spec.hpp"

namespace hetsurr {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;         // honest estimate (leaf) or estimation mean (inner)
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double predict(const Row& row) const {
    std::int32_t k = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
      const auto& node = nodes[static_cast<std::size_t>(k)];
      k = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
  }
};

// Grows one honest tree: `structure` rows choose the splits (greedy variance
// reduction over `mtry` random features, children keep at least
// min_node_size rows), `estimation` rows supply the leaf means. A leaf that
// receives no estimation rows takes its nearest ancestor's estimation mean.
RegressionTree grow_honest_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                std::span<const Eigen::Index> structure,
                                std::span<const Eigen::Index> estimation, int mtry,
                                int min_node_size, Engine& rng);

struct ForestModel {
  std::vector<RegressionTree> trees;
  ForestParams params;
  std::uint64_t seed = 0;
};

// Each tree t draws from its own stream derived from (seed, t), so the
// ensemble is identical for any worker count.
ForestModel fit_forest_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const ForestParams& params, std::uint64_t seed, int workers);

Eigen::VectorXd predict(const ForestModel& model, const Eigen::MatrixXd& x);

int resolve_mtry(int mtry, Eigen::Index features) noexcept;

}  // namespace hetsurr
