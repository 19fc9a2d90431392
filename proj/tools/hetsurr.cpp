// hetsurr: estimate, identify, simulate and diagnose from the command line.
//
// Exit status: 0 success, 2 configuration error, 3 data error, 4 computation
// error. Failures print a JSON object {"error": {...}} on stderr.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetsurr/csv.hpp"
#include "hetsurr/data.hpp"
#include "hetsurr/errors.hpp"
#include "hetsurr/estimator.hpp"
#include "hetsurr/inference.hpp"
#include "hetsurr/report.hpp"
#include "hetsurr/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hetsurr;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kComputeError = 4 };

// Raised for bad flag combinations detected after CLI11 parsing.
struct ConfigError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

struct LearnerFlags {
  std::string family = "linear";
  int gam_basis_size = 10;
  int forest_trees = 2000;
  int forest_mtry = 0;
  int forest_min_node_size = 5;
  double forest_honesty = 0.5;
  double forest_subsample = 0.5;

  void add(CLI::App& app) {
    app.add_option("--family", family, "Base learner: linear, gam or forest")->capture_default_str();
    app.add_option("--gam-basis-size", gam_basis_size, "Cubic B-spline functions per covariate")->capture_default_str();
    app.add_option("--forest-trees", forest_trees, "Trees per forest")->capture_default_str();
    app.add_option("--forest-mtry", forest_mtry, "Features tried per split (0 = ceil(sqrt(q)))")->capture_default_str();
    app.add_option("--forest-min-node-size", forest_min_node_size, "Minimum rows per child")->capture_default_str();
    app.add_option("--forest-honesty", forest_honesty, "Share of each subsample used to place splits")
        ->capture_default_str();
    app.add_option("--forest-subsample", forest_subsample, "Subsample fraction per tree")->capture_default_str();
  }

  LearnerSpec spec(std::string_view name) const {
    LearnerSpec s;
    s.family = parse_family(name);
    s.gam.basis_size = gam_basis_size;
    s.forest.num_trees = forest_trees;
    s.forest.mtry = forest_mtry;
    s.forest.min_node_size = forest_min_node_size;
    s.forest.honesty_fraction = forest_honesty;
    s.forest.subsample_fraction = forest_subsample;
    s.check();
    return s;
  }
  LearnerSpec spec() const { return spec(family); }
};

struct PipelineFlags {
  std::string input;
  std::string schema;
  double test_size = 0.1;
  Eigen::Index bootstrap = 200;
  double alpha = 0.05;
  std::optional<double> delta_floor;
  LearnerFlags learner;

  void add(CLI::App& app, bool input_required) {
    auto* in = app.add_option("--input", input, "CSV file with outcome, surrogate, group and covariates");
    if (input_required) in->required();
    app.add_option("--schema", schema, "JSON column mapping {outcome, surrogate, group, covariates}");
    app.add_option("--test-size", test_size, "Held-out rows: a fraction in (0,1) or a count")->capture_default_str();
    app.add_option("--bootstrap", bootstrap, "Bootstrap replicates B")->capture_default_str();
    app.add_option("--alpha", alpha, "Significance level / interval width")->capture_default_str();
    app.add_option("--delta-floor", delta_floor, "Rows with |delta| below this are invalid (default 1e-6 sd(y))");
    learner.add(app);
  }
};

struct CommonFlags {
  std::uint64_t seed = 0;
  std::string out;
  int workers = 1;

  void add(CLI::App& app) {
    app.add_option("--seed", seed, "Random seed (required)")->required();
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--workers", workers, "Worker threads; never changes results")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, dump_json(j)); }

// Wall-clock numbers live beside the report so that reports stay byte-stable.
void write_timing(const fs::path& dir, const std::string& stem, const Timer& timer, int workers) {
  write_json(dir / (stem + ".timing.json"), {{"seconds", timer.seconds()}, {"workers", workers}});
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + out + "'");
  return dir;
}

Schema schema_for(const PipelineFlags& f) {
  if (!f.schema.empty()) return load_schema(f.schema);
  // Without a schema: y, s, g by name, every other column is a covariate.
  std::istringstream header(read_file(f.input));
  std::string line;
  std::getline(header, line);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  Schema s{"y", "s", "g", {}};
  for (auto name : split_fields(line)) {
    const std::string n(trim(name));
    if (n != s.outcome && n != s.surrogate && n != s.group) s.covariates.push_back(n);
  }
  return s;
}

json pipeline_config(const PipelineFlags& f, const Schema& schema, const LearnerSpec& spec, std::uint64_t seed,
                     Eigen::Index test_rows, double delta_floor) {
  return {{"input", f.input},
          {"schema", to_json(schema)},
          {"learner", to_json(spec)},
          {"test_size", f.test_size},
          {"test_rows", test_rows},
          {"bootstrap", f.bootstrap},
          {"alpha", f.alpha},
          {"delta_floor", delta_floor},
          {"seed", seed}};
}

json estimate_json(const PteEstimate& e) {
  auto vec = [](const Eigen::VectorXd& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return a;
  };
  json valid = json::array();
  for (Eigen::Index i = 0; i < e.size(); ++i) valid.push_back(static_cast<bool>(e.valid[i]));
  return {{"delta", vec(e.delta)},
          {"delta_s", vec(e.delta_s)},
          {"r_s", vec(e.r_s)},
          {"zeta0_hat", vec(e.zeta0_hat)},
          {"valid", valid}};
}

PteEstimate estimate_from_json(const json& j) {
  auto vec = [](const json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = a[i].is_null() ? std::nan("") : a[i].get<double>();
    return v;
  };
  PteEstimate e;
  e.delta = vec(j.at("delta"));
  e.delta_s = vec(j.at("delta_s"));
  e.r_s = vec(j.at("r_s"));
  e.zeta0_hat = vec(j.at("zeta0_hat"));
  const auto& valid = j.at("valid");
  e.valid.resize(static_cast<Eigen::Index>(valid.size()));
  for (std::size_t i = 0; i < valid.size(); ++i) e.valid[static_cast<Eigen::Index>(i)] = valid[i].get<bool>();
  if (e.delta_s.size() != e.delta.size() || e.r_s.size() != e.delta.size() || e.valid.size() != e.delta.size())
    throw ArgumentError("bootstrap artifact: estimate arrays differ in length");
  return e;
}

// Everything the estimate and inline identify paths share.
struct PipelineResult {
  json config;
  std::vector<std::string> warnings;
  std::vector<Eigen::Index> test_index;
  PteEstimate estimate;
  BootstrapDistribution dist;
  FittedSurrogateModel model;
  json diagnostics;
};

PipelineResult run_pipeline(const PipelineFlags& f, std::uint64_t seed, int workers) {
  const LearnerSpec spec = f.learner.spec();
  if (f.bootstrap < 1) throw ConfigError("--bootstrap must be at least 1");
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  const Schema schema = schema_for(f);
  const Dataset data = load_csv(f.input, schema);
  const auto summary = validate(data);

  PipelineResult r;
  r.warnings = summary.warnings;
  const Eigen::Index test_rows = resolve_test_size(f.test_size, data.rows());
  Engine split_rng = make_stream(seed, StreamTag::split);
  const auto parts = split(data, test_rows, split_rng);
  r.test_index = parts.test_indices;

  const double floor = f.delta_floor ? *f.delta_floor : default_delta_floor(parts.train.y);
  if (!(floor > 0.0)) throw ConfigError("--delta-floor must be positive");
  r.config = pipeline_config(f, schema, spec, seed, test_rows, floor);

  r.model = fit_tlearner(parts.train, spec, derive_seed(seed, StreamTag::fit), nullptr, workers);
  for (auto& w : r.model.warnings()) r.warnings.push_back(std::move(w));
  r.estimate = estimate_pte(r.model, parts.test.x, floor);

  BootstrapOptions boot;
  boot.replicates = f.bootstrap;
  boot.seed = derive_seed(seed, StreamTag::bootstrap);
  boot.delta_floor = floor;
  boot.workers = workers;
  r.dist = bootstrap_pte(parts.train, parts.test.x, r.model.tuning, boot);
  if (r.dist.redraws > 0)
    r.warnings.push_back("bootstrap redrew " + std::to_string(r.dist.redraws) + " unusable resamples");
  const Eigen::Index invalid = (!r.estimate.valid).count();
  if (invalid > 0)
    r.warnings.push_back(std::to_string(invalid) + " test rows have |delta| below the floor; r_s is NA");
  r.diagnostics = to_json(summary);
  return r;
}

json interval_summary(const std::vector<PointIntervals>& ci) {
  Eigen::Index undefined = 0, sparse = 0;
  for (const auto& p : ci) {
    if (!p.r_s.defined()) ++undefined;
    if (p.r_s.sparse) ++sparse;
  }
  return {{"points", ci.size()}, {"undefined_r_s_intervals", undefined}, {"sparse_r_s_intervals", sparse}};
}

json identification_summary(const IdentificationResult& id) {
  Eigen::Index tested = 0;
  for (const auto& row : id.rows)
    if (row.valid_count > 0) ++tested;
  return {{"kappa", id.kappa},
          {"alpha", id.alpha},
          {"rows", id.rows.size()},
          {"tested", tested},
          {"strong", id.strong_count()}};
}

void write_identification(const fs::path& dir, const PteEstimate& est, const std::vector<PointIntervals>& ci,
                          const IdentificationResult& id, const std::vector<Eigen::Index>& test_index) {
  write_file_atomic(dir / "identification.csv", identification_csv(est, ci, id, test_index));
}

int cmd_estimate(const PipelineFlags& f, const CommonFlags& c, std::optional<double> kappa, bool dump_model) {
  const Timer timer;
  const fs::path dir = prepare_out(c.out);
  PipelineResult r = run_pipeline(f, c.seed, c.workers);
  const auto ci = percentile_ci(r.dist, f.alpha);

  json config = r.config;
  config["command"] = "estimate";
  config["kappa"] = kappa ? json(*kappa) : json(nullptr);
  write_json(dir / "config.json", config);
  write_file_atomic(dir / "estimates.csv", estimates_csv(r.estimate, r.test_index));
  write_file_atomic(dir / "intervals.csv", intervals_csv(ci, r.test_index));
  write_json(dir / "bootstrap.json", {{"format_version", kReportFormatVersion},
                                      {"config", config},
                                      {"test_index", r.test_index},
                                      {"estimate", estimate_json(r.estimate)},
                                      {"bootstrap", to_json(r.dist)}});
  if (dump_model) write_json(dir / "model.json", to_json(r.model));

  json results = {{"test_rows", r.test_index.size()},
                  {"valid_rows", r.estimate.valid.count()},
                  {"bootstrap_redraws", r.dist.redraws},
                  {"intervals", interval_summary(ci)},
                  {"tuning", to_json(r.model.tuning)},
                  {"diagnostics", r.diagnostics}};
  if (kappa) {
    const auto id = identify(r.dist, *kappa, f.alpha);
    write_identification(dir, r.estimate, ci, id, r.test_index);
    results["identification"] = identification_summary(id);
  }
  write_json(dir / "report.json", make_report(config, results, r.warnings));
  write_timing(dir, "report", timer, c.workers);
  return kOk;
}

int cmd_identify(const PipelineFlags& f, const CommonFlags& c, const std::string& artifact, double kappa) {
  const Timer timer;
  const fs::path dir = prepare_out(c.out);
  json config;
  std::vector<std::string> warnings;
  std::vector<Eigen::Index> test_index;
  PteEstimate estimate;
  BootstrapDistribution dist;
  if (!artifact.empty()) {
    json j;
    try {
      j = json::parse(read_file(artifact));
      test_index = j.at("test_index").get<std::vector<Eigen::Index>>();
      estimate = estimate_from_json(j.at("estimate"));
      config = j.at("config");
    } catch (const json::exception& e) {
      throw ArgumentError(std::string("malformed bootstrap artifact: ") + e.what());
    }
    dist = bootstrap_from_json(j.at("bootstrap"));
    if (dist.points() != estimate.size() || static_cast<Eigen::Index>(test_index.size()) != dist.points())
      throw ArgumentError("bootstrap artifact: replicate matrix and estimates disagree on point count");
    config["artifact"] = artifact;
  } else {
    if (f.input.empty()) throw ConfigError("identify needs --artifact or --input");
    PipelineResult r = run_pipeline(f, c.seed, c.workers);
    config = std::move(r.config);
    warnings = std::move(r.warnings);
    test_index = std::move(r.test_index);
    estimate = std::move(r.estimate);
    dist = std::move(r.dist);
  }
  config["command"] = "identify";
  config["kappa"] = kappa;
  config["alpha"] = f.alpha;
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");

  const auto ci = percentile_ci(dist, f.alpha);
  const auto id = identify(dist, kappa, f.alpha);
  write_json(dir / "config.json", config);
  write_identification(dir, estimate, ci, id, test_index);
  write_json(dir / "report.json", make_report(config, {{"identification", identification_summary(id)}}, warnings));
  write_timing(dir, "report", timer, c.workers);
  return kOk;
}

struct SimulateFlags {
  int setting = 1;
  std::string families = "linear";
  Eigen::Index iterations = 200;
  Eigen::Index n = 2000;
  Eigen::Index test_size = 200;
  Eigen::Index bootstrap = 100;
  double kappa = 0.5;
  double alpha = 0.05;
  bool full_scale = false;
  std::string noise_scale = "variance";
  bool no_surrogate_noise = false;
  bool no_outcome_noise = false;
  bool quiet = false;
  LearnerFlags learner;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto part : split_fields(text)) {
    const std::string name(trim(part));
    if (!name.empty()) out.push_back(name);
  }
  return out;
}

int cmd_simulate(const SimulateFlags& f, const CommonFlags& c, const CLI::App& sub) {
  const fs::path dir = prepare_out(c.out);
  SettingSpec setting;
  setting.id = f.setting;
  setting.n = f.n;
  setting.test_size = f.test_size;
  setting.iterations = f.iterations;
  setting.bootstrap = f.bootstrap;
  if (f.full_scale) {
    // Explicit flags still win over the full-scale defaults.
    if (sub.count("--iterations") == 0) setting.iterations = 1000;
    if (sub.count("--bootstrap") == 0) setting.bootstrap = 200;
  }
  setting.kappa = f.kappa;
  setting.alpha = f.alpha;
  setting.seed = c.seed;
  setting.noise.surrogate_noise = !f.no_surrogate_noise;
  setting.noise.outcome_noise = !f.no_outcome_noise;
  setting.noise.surrogate_noise_scale = parse_noise_scale(f.noise_scale);
  try {
    setting.check();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }

  const bool single = sub.count("--family") > 0 && sub.count("--families") == 0;
  const auto names = split_list(single ? f.learner.family : f.families);
  if (names.empty()) throw ConfigError("--families is empty");
  std::vector<LearnerSpec> specs;
  for (const auto& name : names) specs.push_back(f.learner.spec(name));

  json config = {{"command", "simulate"}, {"setting", to_json(setting)}, {"families", names}};
  write_json(dir / "config.json", config);

  for (const auto& spec : specs) {
    const Timer timer;
    const std::string family(to_string(spec.family));
    const std::string stem =
        "study_setting" + std::to_string(setting.id) + "_" + family + "_seed" + std::to_string(setting.seed);
    StudyOptions options;
    options.workers = c.workers;
    Eigen::Index done = 0;
    if (!f.quiet) {
      options.on_iteration = [&](Eigen::Index) {
        ++done;
        if (done % 10 == 0 || done == setting.iterations)
          std::cerr << "[" << family << "] " << done << "/" << setting.iterations << " iterations\n";
      };
    }
    const auto result = run_study(setting, spec, options);
    std::vector<std::string> warnings;
    for (const auto& failure : result.report.failures)
      warnings.push_back("iteration " + std::to_string(failure.iteration) + " dropped: " + failure.reason);
    json run_config = {{"command", "simulate"}, {"setting", to_json(setting)}, {"learner", to_json(spec)}};
    write_json(dir / (stem + ".json"), make_report(run_config, to_json(result.report), warnings));
    write_file_atomic(dir / (stem + "_points.csv"), points_csv(result.points));
    write_timing(dir, stem, timer, c.workers);
  }
  return kOk;
}

int cmd_diagnose(const PipelineFlags& f, const CommonFlags& c, const std::string& model_path) {
  const Timer timer;
  const fs::path dir = prepare_out(c.out);
  const Schema schema = schema_for(f);
  const Dataset data = load_csv(f.input, schema);
  const auto summary = validate(data);
  const Dataset control = group_slice(data, 0);

  json config = {{"command", "diagnose"}, {"input", f.input}, {"schema", to_json(schema)}, {"seed", c.seed}};
  std::vector<std::string> warnings = summary.warnings;
  ZetaDiagnostic diag;
  if (!model_path.empty()) {
    json j;
    try {
      j = json::parse(read_file(model_path));
    } catch (const json::exception& e) {
      throw ArgumentError(std::string("model dump is not valid JSON: ") + e.what());
    }
    const auto model = surrogate_model_from_json(j);
    diag = zeta_diagnostic(model, control);
    config["model"] = model_path;
    config["learner"] = to_json(model.tuning.spec);
  } else {
    const LearnerSpec spec = f.learner.spec();
    LearnerTuning tuning;
    tuning.forest_seed = derive_seed(c.seed, StreamTag::fit, {static_cast<std::uint64_t>(Component::zeta0)});
    const auto zeta0 = fit_learner(control.x, control.s, spec, tuning, c.workers);
    for (const auto& w : zeta0.warnings()) warnings.push_back("zeta0: " + w);
    diag = zeta_diagnostic(zeta0, control);
    config["learner"] = to_json(spec);
  }
  write_json(dir / "config.json", config);

  std::string csv = "decile,lower,upper,count,mean_observed,mean_predicted\n";
  for (std::size_t b = 0; b < diag.deciles.size(); ++b) {
    const auto& d = diag.deciles[b];
    csv += std::to_string(b + 1) + ',' + format_number(d.lower) + ',' + format_number(d.upper) + ',' +
           std::to_string(d.count) + ',' + format_number(d.mean_observed) + ',' + format_number(d.mean_predicted) +
           '\n';
  }
  write_file_atomic(dir / "deciles.csv", csv);
  json results = to_json(diag);
  results["n_total"] = data.rows();
  results["n_control"] = summary.n0;
  results["n_treated"] = summary.n1;
  write_json(dir / "report.json", make_report(config, results, warnings));
  write_timing(dir, "report", timer, c.workers);
  return kOk;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e))
    return kDataError;
  if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const ConfigError*>(&e))
    return kConfigError;
  return kComputeError;
}

int report_error(const std::string& kind, const std::string& message, int code, json extra = json::object()) {
  json err = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  err.update(extra);
  std::cerr << json{{"error", err}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous surrogate strength: PTE estimation, inference and simulation"};
  app.require_subcommand(1);

  PipelineFlags est_flags, id_flags, diag_flags;
  CommonFlags est_common, id_common, sim_common, diag_common;
  SimulateFlags sim_flags;
  std::optional<double> est_kappa;
  double id_kappa = 0.5;
  bool dump_model = false;
  std::string artifact, model_path;

  auto* estimate = app.add_subcommand("estimate", "Fit, estimate R_S on held-out rows, bootstrap intervals");
  est_flags.add(*estimate, true);
  est_common.add(*estimate);
  estimate->add_option("--kappa", est_kappa, "Also run identification at this threshold");
  estimate->add_flag("--dump-model", dump_model, "Write the fitted components to model.json");

  auto* ident = app.add_subcommand("identify", "Per-row test of R_S(x) > kappa with BH adjustment");
  id_flags.add(*ident, false);
  id_common.add(*ident);
  ident->add_option("--kappa", id_kappa, "Surrogate strength threshold")->required();
  ident->add_option("--artifact", artifact, "bootstrap.json written by estimate");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study against the closed-form truth");
  sim_common.add(*simulate);
  simulate->add_option("--setting", sim_flags.setting, "Simulation setting 1-4")->capture_default_str();
  simulate->add_option("--families", sim_flags.families, "Comma-separated learner families")->capture_default_str();
  simulate->add_option("--iterations", sim_flags.iterations, "Monte Carlo iterations")->capture_default_str();
  simulate->add_option("--n", sim_flags.n, "Rows per simulated dataset")->capture_default_str();
  simulate->add_option("--test-size", sim_flags.test_size, "Held-out rows per iteration")->capture_default_str();
  simulate->add_option("--bootstrap", sim_flags.bootstrap, "Bootstrap replicates per iteration")
      ->capture_default_str();
  simulate->add_option("--kappa", sim_flags.kappa, "Identification threshold")->capture_default_str();
  simulate->add_option("--alpha", sim_flags.alpha, "Significance level")->capture_default_str();
  simulate->add_flag("--full-scale", sim_flags.full_scale, "1000 iterations and B = 200 unless overridden");
  simulate->add_option("--noise-scale", sim_flags.noise_scale, "Surrogate noise parameter: variance or sd")
      ->capture_default_str();
  simulate->add_flag("--no-surrogate-noise", sim_flags.no_surrogate_noise, "Drop the surrogate noise term");
  simulate->add_flag("--no-outcome-noise", sim_flags.no_outcome_noise, "Drop the outcome noise term");
  simulate->add_flag("--quiet", sim_flags.quiet, "No progress lines on stderr");
  sim_flags.learner.add(*simulate);  // --family here is a single-family alias of --families

  auto* diagnose = app.add_subcommand("diagnose", "Compare observed control surrogates with zeta0 predictions");
  diag_flags.add(*diagnose, true);
  diag_common.add(*diagnose);
  diagnose->add_option("--model", model_path, "Use zeta0 from a model.json dump instead of refitting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("config", e.what(), kConfigError);
  }

  try {
    if (*estimate) return cmd_estimate(est_flags, est_common, est_kappa, dump_model);
    if (*ident) return cmd_identify(id_flags, id_common, artifact, id_kappa);
    if (*simulate) return cmd_simulate(sim_flags, sim_common, *simulate);
    if (*diagnose) return cmd_diagnose(diag_flags, diag_common, model_path);
  } catch (const ParseError& e) {
    return report_error(e.kind(), e.what(), kDataError, {{"row", e.row()}, {"column", e.column()}});
  } catch (const DomainError& e) {
    return report_error(e.kind(), e.what(), kDataError, {{"row", e.row()}});
  } catch (const InsufficientDataError& e) {
    return report_error(e.kind(), e.what(), kComputeError, {{"component", e.component()}});
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), exit_code_for(e));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kComputeError);
  }
  return kConfigError;
}
