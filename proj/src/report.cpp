#include "hetsurr/report.hpp"

#include "hetsurr/csv.hpp"
#include "hetsurr/errors.hpp"

namespace hetsurr {

namespace {

void check_rows(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) throw ArgumentError(std::string(what) + ": row count mismatch with test_index");
}

}  // namespace

std::string estimates_csv(const PteEstimate& e, std::span<const Eigen::Index> test_index) {
  check_rows(test_index.size(), static_cast<std::size_t>(e.size()), "estimates");
  std::string out = "test_index,delta,delta_s,r_s,zeta0_hat,valid\n";
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    out += std::to_string(test_index[static_cast<std::size_t>(i)]) + ',' + format_optional(e.delta[i]) + ',' +
           format_optional(e.delta_s[i]) + ',' + format_optional(e.valid[i] ? e.r_s[i] : std::nan("")) + ',' +
           format_optional(e.zeta0_hat[i]) + ',' + (e.valid[i] ? "1" : "0") + '\n';
  }
  return out;
}

std::string intervals_csv(const std::vector<PointIntervals>& intervals, std::span<const Eigen::Index> test_index) {
  check_rows(test_index.size(), intervals.size(), "intervals");
  std::string out =
      "test_index,delta_lower,delta_upper,delta_s_lower,delta_s_upper,r_s_lower,r_s_upper,r_s_valid_replicates,"
      "sparse\n";
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& p = intervals[i];
    out += std::to_string(test_index[i]) + ',' + format_optional(p.delta.lower) + ',' +
           format_optional(p.delta.upper) + ',' + format_optional(p.delta_s.lower) + ',' +
           format_optional(p.delta_s.upper) + ',' + format_optional(p.r_s.lower) + ',' +
           format_optional(p.r_s.upper) + ',' + std::to_string(p.r_s.valid_count) + ',' +
           (p.r_s.sparse ? "1" : "0") + '\n';
  }
  return out;
}

std::string identification_csv(const PteEstimate& e, const std::vector<PointIntervals>& intervals,
                               const IdentificationResult& ident, std::span<const Eigen::Index> test_index) {
  check_rows(test_index.size(), static_cast<std::size_t>(e.size()), "identification");
  check_rows(test_index.size(), intervals.size(), "identification");
  check_rows(test_index.size(), ident.rows.size(), "identification");
  std::string out = "test_index,estimate,ci_lower,ci_upper,p_raw,p_adjusted,strong\n";
  for (std::size_t i = 0; i < test_index.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const auto& row = ident.rows[i];
    out += std::to_string(test_index[i]) + ',' + format_optional(e.valid[k] ? e.r_s[k] : std::nan("")) + ',' +
           format_optional(intervals[i].r_s.lower) + ',' + format_optional(intervals[i].r_s.upper) + ',' +
           format_optional(row.p_raw) + ',' + format_optional(row.p_adjusted) + ',' + (row.strong ? "1" : "0") +
           '\n';
  }
  return out;
}

nlohmann::json make_report(nlohmann::json config, nlohmann::json results, const std::vector<std::string>& warnings) {
  return {{"format_version", kReportFormatVersion},
          {"config", std::move(config)},
          {"results", std::move(results)},
          {"warnings", warnings},
          {"timing", nullptr}};
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + '\n'; }

}  // namespace hetsurr
