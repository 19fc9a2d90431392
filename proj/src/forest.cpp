#include "hetsurr/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "hetsurr/errors.hpp"
#include "hetsurr/parallel.hpp"

namespace hetsurr {

namespace {

using Index = Eigen::Index;

struct Pending {
  std::int32_t node;
  std::size_t begin;
  std::size_t end;
};

// Mean computed around the first element so that identical inputs give that
// value back exactly.
template <typename Get>
double shifted_mean(std::size_t count, Get get) {
  const double ref = get(0);
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += get(i) - ref;
  return ref + acc / static_cast<double>(count);
}

}  // namespace

int resolve_mtry(int mtry, Index features) noexcept {
  const int q = static_cast<int>(features);
  if (mtry <= 0) mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(q))));
  return std::clamp(mtry, 1, std::max(1, q));
}

RegressionTree grow_honest_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                std::span<const Index> structure, std::span<const Index> estimation,
                                int mtry, int min_node_size, Engine& rng) {
  if (structure.empty()) throw ArgumentError("honest tree needs a non-empty structure sample");
  const int q = static_cast<int>(x.cols());
  mtry = resolve_mtry(mtry, q);
  min_node_size = std::max(1, min_node_size);

  RegressionTree tree;
  std::vector<std::int32_t> parent;
  std::vector<Index> rows(structure.begin(), structure.end());
  std::vector<int> features(static_cast<std::size_t>(q));
  std::iota(features.begin(), features.end(), 0);
  std::vector<int> candidates(static_cast<std::size_t>(mtry));
  std::vector<std::pair<double, double>> sorted;
  sorted.reserve(rows.size());

  const double structure_mean = shifted_mean(rows.size(), [&](std::size_t i) { return y[rows[i]]; });
  tree.nodes.push_back(TreeNode{});
  parent.push_back(-1);
  std::vector<Pending> stack{{0, 0, rows.size()}};

  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();
    const std::size_t size = job.end - job.begin;
    if (size < 2 * static_cast<std::size_t>(min_node_size)) continue;

    const double mean = shifted_mean(size, [&](std::size_t i) { return y[rows[job.begin + i]]; });
    double total = 0.0;
    double sse = 0.0;
    for (std::size_t i = job.begin; i < job.end; ++i) {
      const double c = y[rows[i]] - mean;
      total += c;
      sse += c * c;
    }
    if (!(sse > 0.0)) continue;
    const double parent_term = total * total / static_cast<double>(size);

    for (int k = 0; k < mtry; ++k) {
      std::uniform_int_distribution<int> pick(k, q - 1);
      std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(pick(rng))]);
    }
    std::copy_n(features.begin(), mtry, candidates.begin());
    std::sort(candidates.begin(), candidates.end());

    double best_gain = 1e-12 * sse;
    int best_feature = -1;
    double best_threshold = 0.0;
    const std::size_t min_leaf = static_cast<std::size_t>(min_node_size);
    for (int f : candidates) {
      sorted.clear();
      for (std::size_t i = job.begin; i < job.end; ++i)
        sorted.emplace_back(x(rows[i], f), y[rows[i]] - mean);
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < size; ++k) {
        left_sum += sorted[k].second;
        const std::size_t n_left = k + 1;
        if (n_left < min_leaf) continue;
        if (size - n_left < min_leaf) break;
        if (!(sorted[k].first < sorted[k + 1].first)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(size - n_left) - parent_term;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          const double lo = sorted[k].first;
          const double hi = sorted[k + 1].first;
          double mid = lo + 0.5 * (hi - lo);
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) continue;

    const auto first = rows.begin() + static_cast<std::ptrdiff_t>(job.begin);
    const auto last = rows.begin() + static_cast<std::ptrdiff_t>(job.end);
    const auto middle = std::partition(first, last, [&](Index r) { return x(r, best_feature) <= best_threshold; });
    const std::size_t split_at = static_cast<std::size_t>(middle - rows.begin());

    const auto left = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes.push_back(TreeNode{});
    parent.push_back(job.node);
    parent.push_back(job.node);
    auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, split_at, job.end});
    stack.push_back({left, job.begin, split_at});
  }

  // Honest estimates: route the estimation rows and average per node.
  std::vector<double> sums(tree.nodes.size(), 0.0);
  std::vector<std::size_t> counts(tree.nodes.size(), 0);
  const double ref = estimation.empty() ? 0.0 : y[estimation.front()];
  for (Index r : estimation) {
    std::int32_t k = 0;
    const double centered = y[r] - ref;
    while (true) {
      sums[static_cast<std::size_t>(k)] += centered;
      ++counts[static_cast<std::size_t>(k)];
      const auto& node = tree.nodes[static_cast<std::size_t>(k)];
      if (node.feature < 0) break;
      k = x(r, node.feature) <= node.threshold ? node.left : node.right;
    }
  }
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    auto& node = tree.nodes[k];
    if (counts[k] > 0) {
      node.value = ref + sums[k] / static_cast<double>(counts[k]);
    } else if (parent[k] >= 0) {
      node.value = tree.nodes[static_cast<std::size_t>(parent[k])].value;
    } else {
      node.value = structure_mean;
    }
  }
  return tree;
}

ForestModel fit_forest_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const ForestParams& params, std::uint64_t seed, int workers) {
  const Index n = x.rows();
  if (y.size() != n) throw ArgumentError("forest fit: targets and features disagree on row count");
  if (x.cols() == 0) throw ArgumentError("forest fit needs at least one feature");
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("forest fit: non-finite input");
  if (params.num_trees < 1) throw ArgumentError("forest num_trees must be at least 1");
  if (n < 2 * static_cast<Index>(params.min_node_size))
    throw InsufficientDataError("forest fit needs at least " + std::to_string(2 * params.min_node_size) +
                                " rows, got " + std::to_string(n));
  const auto sample_size =
      static_cast<std::size_t>(std::floor(params.subsample_fraction * static_cast<double>(n)));
  const auto structure_size =
      static_cast<std::size_t>(std::floor(params.honesty_fraction * static_cast<double>(sample_size)));
  if (sample_size < 2 || structure_size < 1 || structure_size >= sample_size)
    throw InsufficientDataError("forest fit: subsample too small for an honest split (n = " +
                                std::to_string(n) + ")");

  ForestModel model;
  model.params = params;
  model.seed = seed;
  model.trees.resize(static_cast<std::size_t>(params.num_trees));
  parallel_for(model.trees.size(), workers, [&](std::size_t t) {
    Engine rng = make_stream(seed, StreamTag::tree, {t});
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    for (std::size_t k = 0; k < sample_size; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    const std::span<const Index> sample(order.data(), sample_size);
    model.trees[t] = grow_honest_tree(x, y, sample.first(structure_size), sample.subspan(structure_size),
                                      params.mtry, params.min_node_size, rng);
  });
  return model;
}

Eigen::VectorXd predict(const ForestModel& model, const Eigen::MatrixXd& x) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = x;
  Eigen::VectorXd out(x.rows());
  const std::size_t trees = model.trees.size();
  for (Index i = 0; i < x.rows(); ++i) {
    const double* row = rows.row(i).data();
    out[i] = shifted_mean(trees, [&](std::size_t t) { return model.trees[t].predict(row); });
  }
  return out;
}

}  // namespace hetsurr
