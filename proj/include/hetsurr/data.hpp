#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetsurr/random.hpp"

namespace hetsurr {

using Index = Eigen::Index;

// Observed data: outcome y, surrogate s, group g (0 = control, 1 = treated)
// and an n x p covariate matrix. Construct through make_dataset, which checks
// shapes, finiteness and the binary group coding.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  Eigen::VectorXi g;
  Eigen::MatrixXd x;
  std::vector<std::string> column_names;

  Index rows() const noexcept { return y.size(); }
  Index covariates() const noexcept { return x.cols(); }
  Index group_size(int group) const noexcept { return (g.array() == group).count(); }
};

Dataset make_dataset(Eigen::VectorXd y, Eigen::VectorXd s, Eigen::VectorXi g,
                     Eigen::MatrixXd x, std::vector<std::string> column_names = {});

Dataset subset(const Dataset& d, std::span<const Index> rows);
Dataset group_slice(const Dataset& d, int group);

// Column mapping from CSV headers to model roles.
struct Schema {
  std::string outcome;
  std::string surrogate;
  std::string group;
  std::vector<std::string> covariates;
};

// Schema files are JSON objects with keys outcome, surrogate, group and
// covariates (ordered array of header names).
Schema schema_from_json(const nlohmann::json& j);
Schema load_schema(const std::filesystem::path& path);
nlohmann::json to_json(const Schema& schema);

Dataset read_csv(std::istream& in, const Schema& schema);
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);

// Header is y,s,g followed by the dataset's covariate names.
std::string to_csv(const Dataset& d);
Schema default_schema(const Dataset& d);

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct CovariateSupport {
  std::string name;
  Range control;
  Range treated;
  bool overlaps = true;
};

struct DiagnosticsSummary {
  Index n0 = 0;
  Index n1 = 0;
  std::vector<CovariateSupport> covariates;
  std::vector<std::string> warnings;
};

// Empirical positivity screen. Throws ValidationError when either group is
// empty; disjoint per-covariate supports only produce warnings.
DiagnosticsSummary validate(const Dataset& d);
nlohmann::json to_json(const DiagnosticsSummary& summary);

struct SplitDataset {
  Dataset train;
  Dataset test;
  std::vector<Index> train_indices;
  std::vector<Index> test_indices;
};

// Simple random split; test_indices are sorted ascending.
SplitDataset split(const Dataset& d, Index test_size, Engine& rng);

// Values >= 1 are absolute counts; values in (0, 1) are fractions of n,
// rounded half-up.
Index resolve_test_size(double value, Index n);

}  // namespace hetsurr
