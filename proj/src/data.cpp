#include "hetsurr/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hetsurr/csv.hpp"
#include "hetsurr/errors.hpp"

namespace hetsurr {

Dataset make_dataset(Eigen::VectorXd y, Eigen::VectorXd s, Eigen::VectorXi g,
                     Eigen::MatrixXd x, std::vector<std::string> column_names) {
  const Index n = y.size();
  if (n < 1) throw ArgumentError("dataset must have at least one row");
  if (s.size() != n || g.size() != n || x.rows() != n)
    throw ArgumentError("dataset columns disagree on row count");
  if (!y.allFinite() || !s.allFinite() || !x.allFinite())
    throw ArgumentError("dataset contains non-finite values");
  for (Index i = 0; i < n; ++i) {
    if (g[i] != 0 && g[i] != 1)
      throw DomainError("group value at row " + std::to_string(i + 1) + " is not 0 or 1",
                        static_cast<std::size_t>(i + 1));
  }
  if (column_names.empty()) {
    for (Index j = 0; j < x.cols(); ++j) column_names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Index>(column_names.size()) != x.cols())
    throw ArgumentError("column_names must name every covariate");
  return Dataset{std::move(y), std::move(s), std::move(g), std::move(x), std::move(column_names)};
}

Dataset subset(const Dataset& d, std::span<const Index> rows) {
  const Index m = static_cast<Index>(rows.size());
  Dataset out;
  out.y.resize(m);
  out.s.resize(m);
  out.g.resize(m);
  out.x.resize(m, d.x.cols());
  for (Index k = 0; k < m; ++k) {
    const Index i = rows[static_cast<std::size_t>(k)];
    if (i < 0 || i >= d.rows()) throw ArgumentError("row index out of range");
    out.y[k] = d.y[i];
    out.s[k] = d.s[i];
    out.g[k] = d.g[i];
    out.x.row(k) = d.x.row(i);
  }
  out.column_names = d.column_names;
  return out;
}

Dataset group_slice(const Dataset& d, int group) {
  std::vector<Index> rows;
  for (Index i = 0; i < d.rows(); ++i)
    if (d.g[i] == group) rows.push_back(i);
  return subset(d, rows);
}

Schema schema_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("schema must be a JSON object");
  Schema schema;
  auto required = [&](const char* key) -> std::string {
    if (!j.contains(key)) throw SchemaError(std::string("schema is missing key '") + key + "'");
    if (!j.at(key).is_string()) throw SchemaError(std::string("schema key '") + key + "' must be a string");
    return j.at(key).get<std::string>();
  };
  schema.outcome = required("outcome");
  schema.surrogate = required("surrogate");
  schema.group = required("group");
  if (!j.contains("covariates")) throw SchemaError("schema is missing key 'covariates'");
  const auto& cov = j.at("covariates");
  if (!cov.is_array() || cov.empty())
    throw SchemaError("schema key 'covariates' must be a non-empty array");
  for (const auto& c : cov) {
    if (!c.is_string()) throw SchemaError("covariate names must be strings");
    schema.covariates.push_back(c.get<std::string>());
  }
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("schema file " + path.string() + " is not valid JSON: " + e.what());
  }
  return schema_from_json(j);
}

nlohmann::json to_json(const Schema& schema) {
  return {{"outcome", schema.outcome},
          {"surrogate", schema.surrogate},
          {"group", schema.group},
          {"covariates", schema.covariates}};
}

Dataset read_csv(std::istream& in, const Schema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV input is empty; a header row is required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::unordered_map<std::string, std::size_t> header;
  const auto names = split_fields(line);
  for (std::size_t c = 0; c < names.size(); ++c) header.emplace(std::string(trim(names[c])), c);

  auto locate = [&](const std::string& name) {
    auto it = header.find(name);
    if (it == header.end()) throw SchemaError("CSV header has no column '" + name + "'");
    return it->second;
  };
  const std::size_t col_y = locate(schema.outcome);
  const std::size_t col_s = locate(schema.surrogate);
  const std::size_t col_g = locate(schema.group);
  std::vector<std::size_t> col_x;
  for (const auto& c : schema.covariates) col_x.push_back(locate(c));
  if (col_x.empty()) throw SchemaError("schema must name at least one covariate");

  std::vector<double> ys, ss, xs;
  std::vector<int> gs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != names.size())
      throw ParseError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(names.size()),
                       row, {});
    auto cell = [&](std::size_t c, const std::string& name) {
      auto v = parse_number(fields[c]);
      if (!v) {
        const auto raw = trim(fields[c]);
        throw ParseError("row " + std::to_string(row) + ", column '" + name + "': " +
                             (raw.empty() ? std::string("missing value")
                                          : "'" + std::string(raw) + "' is not a finite number"),
                         row, name);
      }
      return *v;
    };
    ys.push_back(cell(col_y, schema.outcome));
    ss.push_back(cell(col_s, schema.surrogate));
    const double gv = cell(col_g, schema.group);
    if (gv != 0.0 && gv != 1.0)
      throw DomainError("row " + std::to_string(row) + ", column '" + schema.group +
                            "': group must be 0 or 1, got " + format_number(gv),
                        row);
    gs.push_back(static_cast<int>(gv));
    for (std::size_t j = 0; j < col_x.size(); ++j) xs.push_back(cell(col_x[j], schema.covariates[j]));
  }
  if (row == 0) throw ValidationError("CSV input has no data rows");

  const Index n = static_cast<Index>(row);
  const Index p = static_cast<Index>(col_x.size());
  Eigen::MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = xs[static_cast<std::size_t>(i * p + j)];
  return make_dataset(Eigen::Map<Eigen::VectorXd>(ys.data(), n), Eigen::Map<Eigen::VectorXd>(ss.data(), n),
                      Eigen::Map<Eigen::VectorXi>(gs.data(), n), std::move(x), schema.covariates);
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open CSV file " + path.string());
  return read_csv(in, schema);
}

Schema default_schema(const Dataset& d) { return Schema{"y", "s", "g", d.column_names}; }

std::string to_csv(const Dataset& d) {
  std::string out = "y,s,g";
  for (const auto& name : d.column_names) out += "," + name;
  out += '\n';
  for (Index i = 0; i < d.rows(); ++i) {
    out += format_number(d.y[i]);
    out += ',';
    out += format_number(d.s[i]);
    out += ',';
    out += std::to_string(d.g[i]);
    for (Index j = 0; j < d.x.cols(); ++j) {
      out += ',';
      out += format_number(d.x(i, j));
    }
    out += '\n';
  }
  return out;
}

DiagnosticsSummary validate(const Dataset& d) {
  DiagnosticsSummary summary;
  summary.n1 = d.group_size(1);
  summary.n0 = d.rows() - summary.n1;
  if (summary.n0 == 0) throw ValidationError("control group (g = 0) is empty");
  if (summary.n1 == 0) throw ValidationError("treated group (g = 1) is empty");

  for (Index j = 0; j < d.x.cols(); ++j) {
    CovariateSupport support;
    support.name = d.column_names[static_cast<std::size_t>(j)];
    bool seen[2] = {false, false};
    Range* ranges[2] = {&support.control, &support.treated};
    for (Index i = 0; i < d.rows(); ++i) {
      const int grp = d.g[i];
      const double v = d.x(i, j);
      if (!seen[grp]) {
        *ranges[grp] = {v, v};
        seen[grp] = true;
      } else {
        ranges[grp]->min = std::min(ranges[grp]->min, v);
        ranges[grp]->max = std::max(ranges[grp]->max, v);
      }
    }
    support.overlaps = support.control.min <= support.treated.max &&
                       support.treated.min <= support.control.max;
    if (!support.overlaps)
      summary.warnings.push_back("covariate '" + support.name +
                                 "' has disjoint supports in the control and treated groups");
    summary.covariates.push_back(std::move(support));
  }
  return summary;
}

nlohmann::json to_json(const DiagnosticsSummary& summary) {
  nlohmann::json cov = nlohmann::json::array();
  for (const auto& c : summary.covariates) {
    cov.push_back({{"name", c.name},
                   {"control", {{"min", c.control.min}, {"max", c.control.max}}},
                   {"treated", {{"min", c.treated.min}, {"max", c.treated.max}}},
                   {"overlaps", c.overlaps}});
  }
  return {{"n0", summary.n0}, {"n1", summary.n1}, {"covariates", cov}, {"warnings", summary.warnings}};
}

SplitDataset split(const Dataset& d, Index test_size, Engine& rng) {
  const Index n = d.rows();
  if (test_size < 1 || test_size >= n)
    throw ArgumentError("test_size must satisfy 1 <= test_size < n (got " + std::to_string(test_size) +
                        ", n = " + std::to_string(n) + ")");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Partial Fisher-Yates: the first test_size slots become the test rows.
  for (Index k = 0; k < test_size; ++k) {
    std::uniform_int_distribution<Index> pick(k, n - 1);
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
  }
  SplitDataset out;
  out.test_indices.assign(order.begin(), order.begin() + test_size);
  out.train_indices.assign(order.begin() + test_size, order.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  std::sort(out.train_indices.begin(), out.train_indices.end());
  out.train = subset(d, out.train_indices);
  out.test = subset(d, out.test_indices);
  return out;
}

Index resolve_test_size(double value, Index n) {
  if (!(value > 0.0)) throw ArgumentError("test size must be positive");
  if (value < 1.0) return static_cast<Index>(std::floor(value * static_cast<double>(n) + 0.5));
  if (value != std::floor(value)) throw ArgumentError("test size above 1 must be a whole count");
  return static_cast<Index>(value);
}

}  // namespace hetsurr
