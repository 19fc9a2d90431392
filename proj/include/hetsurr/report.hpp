#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetsurr/estimator.hpp"
#include "hetsurr/inference.hpp"

namespace hetsurr {

inline constexpr int kReportFormatVersion = 1;

// Per-point tables. `test_index` is the row number in the source file
// (0-based); NaN cells are written as NA.
std::string estimates_csv(const PteEstimate& estimate, std::span<const Eigen::Index> test_index);
std::string intervals_csv(const std::vector<PointIntervals>& intervals, std::span<const Eigen::Index> test_index);
std::string identification_csv(const PteEstimate& estimate, const std::vector<PointIntervals>& intervals,
                               const IdentificationResult& ident, std::span<const Eigen::Index> test_index);

// {format_version, config, results, warnings, timing}. timing is always null so
// that reports are byte-stable; wall-clock numbers go to a separate file.
nlohmann::json make_report(nlohmann::json config, nlohmann::json results, const std::vector<std::string>& warnings);

// Pretty-printed with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace hetsurr
