// Thin pybind11 layer over the C++ library. Arrays cross as NumPy via
// pybind11/eigen.h; structured results cross as JSON text and are decoded on
// the Python side.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hetsurr/errors.hpp"
#include "hetsurr/estimator.hpp"
#include "hetsurr/inference.hpp"
#include "hetsurr/report.hpp"
#include "hetsurr/simulation.hpp"

namespace py = pybind11;
using namespace hetsurr;

namespace {

Dataset to_dataset(const Eigen::VectorXd& y, const Eigen::VectorXd& s, const Eigen::VectorXd& g,
                   const Eigen::MatrixXd& x) {
  Eigen::VectorXi groups(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g[i] != 0.0 && g[i] != 1.0) throw DomainError("group must be 0 or 1", static_cast<std::size_t>(i) + 1);
    groups[i] = static_cast<int>(g[i]);
  }
  return make_dataset(y, s, groups, x);
}

LearnerSpec make_spec(const std::string& family, int basis_size, int trees, int mtry, int min_node_size,
                      double honesty, double subsample) {
  LearnerSpec spec;
  spec.family = parse_family(family);
  spec.gam.basis_size = basis_size;
  spec.forest.num_trees = trees;
  spec.forest.mtry = mtry;
  spec.forest.min_node_size = min_node_size;
  spec.forest.honesty_fraction = honesty;
  spec.forest.subsample_fraction = subsample;
  spec.check();
  return spec;
}

py::dict estimate_dict(const PteEstimate& e) {
  py::dict out;
  out["delta"] = e.delta;
  out["delta_s"] = e.delta_s;
  out["r_s"] = e.r_s;
  out["zeta0_hat"] = e.zeta0_hat;
  out["valid"] = Eigen::Array<bool, Eigen::Dynamic, 1>(e.valid);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heterogeneous surrogate strength estimation (C++ core)";
  m.attr("REPORT_FORMAT_VERSION") = kReportFormatVersion;

  auto base = py::register_exception<Error>(m, "HetsurrError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());

  m.def(
      "simulate",
      [](int setting, Eigen::Index n, std::uint64_t seed, const std::string& noise_scale, bool surrogate_noise,
         bool outcome_noise) {
        GenerateOptions options;
        options.surrogate_noise = surrogate_noise;
        options.outcome_noise = outcome_noise;
        options.surrogate_noise_scale = parse_noise_scale(noise_scale);
        Engine rng = make_stream(seed, StreamTag::data);
        const Dataset d = simulate_dataset(setting, n, rng, options);
        py::dict out;
        out["y"] = d.y;
        out["s"] = d.s;
        out["g"] = d.g;
        out["x"] = d.x;
        return out;
      },
      py::arg("setting"), py::arg("n"), py::arg("seed"), py::arg("noise_scale") = "variance",
      py::arg("surrogate_noise") = true, py::arg("outcome_noise") = true);

  m.def(
      "true_pte",
      [](int setting, const Eigen::MatrixXd& x) {
        const TruePte t = true_pte(setting, x);
        py::dict out;
        out["delta"] = t.delta;
        out["delta_s"] = t.delta_s;
        out["r_s"] = t.r_s;
        return out;
      },
      py::arg("setting"), py::arg("x"));

  m.def("default_delta_floor", &default_delta_floor, py::arg("y"));

  m.def(
      "bh_adjust", [](const std::vector<double>& p) { return bh_adjust(p); }, py::arg("p"));

  py::class_<FittedSurrogateModel>(m, "FittedModel")
      .def_property_readonly("covariates", [](const FittedSurrogateModel& f) { return f.covariates; })
      .def_property_readonly("family", [](const FittedSurrogateModel& f) {
        return std::string(to_string(f.tuning.spec.family));
      })
      .def_property_readonly("warnings", &FittedSurrogateModel::warnings)
      .def(
          "estimate",
          [](const FittedSurrogateModel& f, const Eigen::MatrixXd& x, double delta_floor) {
            return estimate_dict(estimate_pte(f, x, delta_floor));
          },
          py::arg("x"), py::arg("delta_floor"))
      .def("to_json", [](const FittedSurrogateModel& f) { return to_json(f).dump(); })
      .def_static(
          "from_json", [](const std::string& text) { return surrogate_model_from_json(nlohmann::json::parse(text)); },
          py::arg("text"));

  m.def(
      "fit",
      [](const Eigen::VectorXd& y, const Eigen::VectorXd& s, const Eigen::VectorXd& g, const Eigen::MatrixXd& x,
         const std::string& family, std::uint64_t seed, int basis_size, int trees, int mtry, int min_node_size,
         double honesty, double subsample, int workers) {
        const Dataset d = to_dataset(y, s, g, x);
        const LearnerSpec spec = make_spec(family, basis_size, trees, mtry, min_node_size, honesty, subsample);
        py::gil_scoped_release release;
        return fit_tlearner(d, spec, derive_seed(seed, StreamTag::fit), nullptr, workers);
      },
      py::arg("y"), py::arg("s"), py::arg("g"), py::arg("x"), py::arg("family") = "linear", py::arg("seed") = 0,
      py::arg("gam_basis_size") = 10, py::arg("forest_trees") = 2000, py::arg("forest_mtry") = 0,
      py::arg("forest_min_node_size") = 5, py::arg("forest_honesty") = 0.5, py::arg("forest_subsample") = 0.5,
      py::arg("workers") = 1);

  py::class_<BootstrapDistribution>(m, "Bootstrap")
      .def_readonly("delta", &BootstrapDistribution::delta)
      .def_readonly("delta_s", &BootstrapDistribution::delta_s)
      .def_readonly("r_s", &BootstrapDistribution::r_s)
      .def_property_readonly("valid", [](const BootstrapDistribution& b) { return MaskMatrix(b.valid); })
      .def_readonly("redraws", &BootstrapDistribution::redraws)
      .def(
          "percentile_ci",
          [](const BootstrapDistribution& b, double alpha) {
            const auto cis = percentile_ci(b, alpha);
            const auto n = static_cast<Eigen::Index>(cis.size());
            Eigen::MatrixXd bounds(n, 6);
            Eigen::VectorXi counts(n);
            Eigen::Array<bool, Eigen::Dynamic, 1> sparse(n);
            for (Eigen::Index i = 0; i < n; ++i) {
              const auto& c = cis[static_cast<std::size_t>(i)];
              bounds.row(i) << c.delta.lower, c.delta.upper, c.delta_s.lower, c.delta_s.upper, c.r_s.lower, c.r_s.upper;
              counts[i] = static_cast<int>(c.r_s.valid_count);
              sparse[i] = c.r_s.sparse;
            }
            py::dict out;
            out["delta"] = Eigen::MatrixXd(bounds.leftCols(2));
            out["delta_s"] = Eigen::MatrixXd(bounds.middleCols(2, 2));
            out["r_s"] = Eigen::MatrixXd(bounds.rightCols(2));
            out["r_s_valid_replicates"] = counts;
            out["sparse"] = sparse;
            return out;
          },
          py::arg("alpha") = 0.05)
      .def("standard_errors", [](const BootstrapDistribution& b) { return bootstrap_se(b); })
      .def(
          "identify",
          [](const BootstrapDistribution& b, double kappa, double alpha) {
            const auto result = identify(b, kappa, alpha);
            const auto n = static_cast<Eigen::Index>(result.rows.size());
            Eigen::VectorXd raw(n), adjusted(n);
            Eigen::Array<bool, Eigen::Dynamic, 1> strong(n);
            for (Eigen::Index i = 0; i < n; ++i) {
              const auto& r = result.rows[static_cast<std::size_t>(i)];
              raw[i] = r.p_raw;
              adjusted[i] = r.p_adjusted;
              strong[i] = r.strong;
            }
            py::dict out;
            out["p_raw"] = raw;
            out["p_adjusted"] = adjusted;
            out["strong"] = strong;
            return out;
          },
          py::arg("kappa"), py::arg("alpha") = 0.05)
      .def("to_json", [](const BootstrapDistribution& b) { return to_json(b).dump(); })
      .def_static(
          "from_json", [](const std::string& text) { return bootstrap_from_json(nlohmann::json::parse(text)); },
          py::arg("text"));

  m.def(
      "bootstrap",
      [](const Eigen::VectorXd& y, const Eigen::VectorXd& s, const Eigen::VectorXd& g, const Eigen::MatrixXd& x,
         const Eigen::MatrixXd& test_x, const FittedSurrogateModel& model, Eigen::Index replicates,
         std::uint64_t seed, std::optional<double> delta_floor, int workers) {
        const Dataset d = to_dataset(y, s, g, x);
        BootstrapOptions options;
        options.replicates = replicates;
        options.seed = derive_seed(seed, StreamTag::bootstrap);
        options.delta_floor = delta_floor.value_or(default_delta_floor(d.y));
        options.workers = workers;
        py::gil_scoped_release release;
        return bootstrap_pte(d, test_x, model.tuning, options);
      },
      py::arg("y"), py::arg("s"), py::arg("g"), py::arg("x"), py::arg("test_x"), py::arg("model"),
      py::arg("replicates") = 200, py::arg("seed") = 0, py::arg("delta_floor") = py::none(),
      py::arg("workers") = 1);

  m.def(
      "run_study",
      [](int setting, const std::string& family, Eigen::Index iterations, Eigen::Index bootstrap,
         std::uint64_t seed, Eigen::Index n, Eigen::Index test_size, double kappa, double alpha,
         const std::string& noise_scale, int forest_trees, int workers) {
        SettingSpec s;
        s.id = setting;
        s.iterations = iterations;
        s.bootstrap = bootstrap;
        s.seed = seed;
        s.n = n;
        s.test_size = test_size;
        s.kappa = kappa;
        s.alpha = alpha;
        s.noise.surrogate_noise_scale = parse_noise_scale(noise_scale);
        LearnerSpec spec;
        spec.family = parse_family(family);
        spec.forest.num_trees = forest_trees;
        StudyOptions options;
        options.workers = workers;
        std::string text;
        {
          py::gil_scoped_release release;
          text = to_json(run_study(s, spec, options).report).dump();
        }
        return text;
      },
      py::arg("setting"), py::arg("family") = "linear", py::arg("iterations") = 200, py::arg("bootstrap") = 100,
      py::arg("seed") = 1, py::arg("n") = 2000, py::arg("test_size") = 200, py::arg("kappa") = 0.5,
      py::arg("alpha") = 0.05, py::arg("noise_scale") = "variance", py::arg("forest_trees") = 2000,
      py::arg("workers") = 1);
}
