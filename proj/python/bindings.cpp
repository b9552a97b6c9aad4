#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tsqn/commands.hpp"
#include "tsqn/diagnostics.hpp"
#include "tsqn/error.hpp"
#include "tsqn/monte_carlo.hpp"
#include "tsqn/simulation.hpp"

namespace py = pybind11;
using namespace tsqn;

namespace {

py::dict gains_dict(const Gains& g) {
  py::dict d;
  d["beta_bar"] = g.beta_bar;
  d["a_bar"] = g.a_bar;
  d["beta"] = g.beta;
  d["a"] = g.a;
  d["mu"] = g.mu;
  d["g_lo"] = g.g_lo;
  d["g_hi"] = g.g_hi;
  d["M"] = g.M;
  d["beta_tie"] = g.beta_tie;
  return d;
}

py::dict report_dict(const ConfidenceReport& r) {
  py::dict d;
  d["method"] = r.method;
  d["confidence"] = r.confidence;
  d["center"] = r.center;
  d["lower"] = r.lower;
  d["upper"] = r.upper;
  d["constants"] = r.constants;
  d["provenance"] = r.provenance;
  d["warnings"] = r.warnings;
  return d;
}

std::vector<ObservationRecord> records_from(const Matrix& phi, const std::vector<SaturationSpec>& specs,
                                            const Vector& y) {
  if (phi.rows() != y.size()) throw Error(ErrorCode::Data, "phi and y must have the same number of rows");
  if (specs.empty()) throw Error(ErrorCode::Data, "at least one saturation spec is required");
  std::vector<ObservationRecord> out;
  for (Eigen::Index k = 0; k < phi.rows(); ++k) {
    out.push_back({phi.row(k).transpose(), spec_at(specs, static_cast<std::size_t>(k)), y(k)});
  }
  return out;
}

Matrix stack(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

}  // namespace

PYBIND11_MODULE(_tsqn, m) {
  m.doc() = "Two-step quasi-Newton identification for regression with saturated observations";

  static PyObject* tsqn_error = py::exception<Error>(m, "TsqnError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(tsqn_error)(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = to_string(e.code());
      exc.attr("exit_code") = exit_code(e.code());
      PyErr_SetObject(tsqn_error, exc.ptr());
    }
  });

  py::class_<SaturationSpec>(m, "SaturationSpec")
      .def(py::init(&SaturationSpec::make), py::arg("l"), py::arg("u"), py::arg("L"), py::arg("U"))
      .def_static("linear", &SaturationSpec::linear)
      .def_static("binary", &SaturationSpec::binary)
      .def_static("censored", &SaturationSpec::censored, py::arg("lower"), py::arg("upper"))
      .def_readonly("l", &SaturationSpec::l)
      .def_readonly("u", &SaturationSpec::u)
      .def_readonly("L", &SaturationSpec::L)
      .def_readonly("U", &SaturationSpec::U)
      .def("__call__", [](const SaturationSpec& s, double x) { return saturate(x, s); })
      .def("__repr__", [](const SaturationSpec& s) {
        return "SaturationSpec(l=" + std::to_string(s.l) + ", u=" + std::to_string(s.u) +
               ", L=" + std::to_string(s.L) + ", U=" + std::to_string(s.U) + ")";
      });

  py::class_<NoiseModel>(m, "NoiseModel")
      .def_static("gaussian", &NoiseModel::gaussian, py::arg("variance") = 1.0, py::arg("eta") = 1.0)
      .def_static("tabulated", &NoiseModel::tabulated, py::arg("grid"), py::arg("cdf"), py::arg("pdf"),
                  py::arg("eta") = 1.0)
      .def("cdf", &NoiseModel::cdf)
      .def("pdf", &NoiseModel::pdf)
      .def("quantile", &NoiseModel::quantile)
      .def_property_readonly("variance", &NoiseModel::variance);

  m.def("g_mean", [](double x, const SaturationSpec& s, const NoiseModel& n) { return g_mean(x, s, n); },
        py::arg("x"), py::arg("spec"), py::arg("noise"));
  m.def("g_deriv", &g_deriv, py::arg("x"), py::arg("spec"), py::arg("noise"));
  m.def("sigma_var", [](double x, const SaturationSpec& s, const NoiseModel& n) { return sigma_var(x, s, n); },
        py::arg("x"), py::arg("spec"), py::arg("noise"));
  m.def(
      "g_bounds",
      [](double M, const SaturationSpec& s, const NoiseModel& n) {
        const auto b = g_bounds(M, s, n);
        return py::dict(py::arg("g_lo") = b.g_lo, py::arg("g_hi") = b.g_hi, py::arg("rho") = b.rho,
                        py::arg("g_lo_floored") = b.g_lo_floored);
      },
      py::arg("M"), py::arg("spec"), py::arg("noise"));

  py::class_<DomainSet>(m, "DomainSet")
      .def_static("box", &DomainSet::box, py::arg("lower"), py::arg("upper"))
      .def_static("cube", &DomainSet::cube, py::arg("dimension"), py::arg("half_width"))
      .def_static("ball", &DomainSet::ball, py::arg("center"), py::arg("radius"))
      .def_property_readonly("dimension", &DomainSet::dimension)
      .def("contains", &DomainSet::contains, py::arg("x"), py::arg("tol") = 1e-12)
      .def("center", &DomainSet::center);

  m.def("q_project", [](const Vector& x, const Matrix& Q, const DomainSet& D) { return q_project(x, Q, D); },
        py::arg("x"), py::arg("Q"), py::arg("domain"));

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init([](const DomainSet& D, const NoiseModel& noise, double p0_scale) {
             return EstimatorConfig::defaults(D, noise, p0_scale);
           }),
           py::arg("domain"), py::arg("noise"), py::arg("p0_scale") = 100.0)
      .def("set_constant_mu", [](EstimatorConfig& c, double mu) { c.mu = MuPolicy::constant(mu); })
      .def("set_adaptive_mu", [](EstimatorConfig& c, double lo, double hi) { c.mu = MuPolicy::adaptive(lo, hi); },
           py::arg("mu_min") = 1e-6, py::arg("mu_max") = 1e6)
      .def_readwrite("P0", &EstimatorConfig::P0)
      .def_readwrite("P0_bar", &EstimatorConfig::P0_bar)
      .def_readwrite("theta0", &EstimatorConfig::theta0)
      .def_readwrite("theta0_bar", &EstimatorConfig::theta0_bar)
      .def_readwrite("beta_tie_epsilon", &EstimatorConfig::beta_tie_epsilon)
      .def_readwrite("M_inflation", &EstimatorConfig::M_inflation)
      .def_readwrite("beta_uses_updated_bar", &EstimatorConfig::beta_uses_updated_bar)
      .def_readwrite("resync_interval", &EstimatorConfig::resync_interval)
      .def("validate", &EstimatorConfig::validate);

  py::class_<TsqnEstimator>(m, "TsqnEstimator")
      .def(py::init<EstimatorConfig>(), py::arg("config"))
      .def(
          "update",
          [](TsqnEstimator& est, const Vector& phi, const SaturationSpec& spec, double y) {
            const auto rep = est.update({phi, spec, y});
            py::dict d = gains_dict(rep.gains);
            d["prediction"] = rep.prediction;
            d["residual"] = rep.residual;
            d["bar_projection_active"] = rep.bar_projection_active;
            d["hat_projection_active"] = rep.hat_projection_active;
            return d;
          },
          py::arg("phi"), py::arg("spec"), py::arg("y"))
      .def("predict", &TsqnEstimator::predict, py::arg("phi"), py::arg("spec"))
      .def_property_readonly("k", [](const TsqnEstimator& e) { return e.state().k; })
      .def_property_readonly("theta_hat", [](const TsqnEstimator& e) { return e.state().theta_hat; })
      .def_property_readonly("theta_bar", [](const TsqnEstimator& e) { return e.state().theta_bar; })
      .def_property_readonly("P", [](const TsqnEstimator& e) { return e.state().P; })
      .def_property_readonly("P_bar", [](const TsqnEstimator& e) { return e.state().P_bar; })
      .def_property_readonly("P_inv", [](const TsqnEstimator& e) { return e.state().P_inv; })
      .def_property_readonly("gains", [](const TsqnEstimator& e) { return gains_dict(e.state().last_gains); });

  py::class_<RunTrace>(m, "RunTrace")
      .def("__len__", &RunTrace::size)
      .def_property_readonly("theta_hat",
                             [](const RunTrace& t) {
                               std::vector<Vector> v;
                               for (const auto& s : t.steps) v.push_back(s.theta_hat_next);
                               return stack(v);
                             })
      .def_property_readonly("theta_bar",
                             [](const RunTrace& t) {
                               std::vector<Vector> v;
                               for (const auto& s : t.steps) v.push_back(s.theta_bar_next);
                               return stack(v);
                             })
      .def_property_readonly("truth", [](const RunTrace& t) { return t.truth; })
      .def("cumulative_regret",
           [](const RunTrace& t, std::size_t n, bool accelerated) {
             return cumulative_regret(t, n, accelerated ? Layer::Accelerated : Layer::Preliminary);
           },
           py::arg("n"), py::arg("accelerated") = true)
      .def("excitation", [](const RunTrace& t, std::size_t n) {
        const auto r = excitation_ratio(t, n);
        return py::dict(py::arg("ratio") = r.ratio, py::arg("iterated_ratio") = r.iterated_ratio,
                        py::arg("lambda_min") = r.lambda_min, py::arg("lambda_max") = r.lambda_max,
                        py::arg("non_convergent") = r.non_convergent);
      });

  m.def(
      "fit",
      [](const EstimatorConfig& cfg, const Matrix& phi, const std::vector<SaturationSpec>& specs, const Vector& y,
         std::optional<Vector> truth) { return trace_run(cfg, records_from(phi, specs, y), std::move(truth)); },
      py::arg("config"), py::arg("phi"), py::arg("specs"), py::arg("y"), py::arg("truth") = py::none(),
      "Run a fresh estimator over the rows of phi; one spec for all rows or one per row.");

  m.def(
      "simulate_reference",
      [](std::uint64_t seed, std::size_t n) {
        const auto sc = ScenarioConfig::reference(seed, n);
        const auto regs = gen_regressors(sc);
        const auto recs = gen_observations(regs, sc.theta_true, sc.specs, sc.noise, sc.seed);
        Vector y(static_cast<Eigen::Index>(recs.size()));
        for (std::size_t k = 0; k < recs.size(); ++k) y(static_cast<Eigen::Index>(k)) = recs[k].y;
        return py::make_tuple(stack(regs), y, sc.theta_true);
      },
      py::arg("seed") = 0, py::arg("n") = 10000,
      "Regressors, outputs and true parameter of the diminishing-excitation experiment.");
  m.def("reference_domain", &reference_domain);

  m.def(
      "experiment_curves",
      [](const RunTrace& t) {
        const auto c = experiment_curves(t);
        return py::dict(py::arg("error_bar") = c.error_bar, py::arg("error_hat") = c.error_hat,
                        py::arg("avg_regret_bar") = c.avg_regret_bar, py::arg("avg_regret_hat") = c.avg_regret_hat);
      },
      py::arg("trace"));

  m.def(
      "asymptotic_ci",
      [](const RunTrace& t, double alpha) { return report_dict(asymptotic_ci(t, t.size(), alpha)); },
      py::arg("trace"), py::arg("alpha") = 0.05);
  m.def(
      "lyapunov_bound",
      [](const RunTrace& t, std::size_t N, double alpha, double tau, const std::string& plugin) {
        return report_dict(lyapunov_bound(t, N, alpha, tau, plugin_from_string(plugin)));
      },
      py::arg("trace"), py::arg("N"), py::arg("alpha") = 0.05, py::arg("tau") = 0.1,
      py::arg("plugin") = "estimate");
  m.def(
      "mc_interval",
      [](const Matrix& errors, double alpha, double t) { return report_dict(mc_interval(errors, alpha, t)); },
      py::arg("errors"), py::arg("alpha") = 0.05, py::arg("t") = 0.05);
  m.def(
      "mc_errors",
      [](const EstimatorConfig& cfg, const Matrix& phi, const SaturationSpec& spec, std::size_t K, std::uint64_t seed,
         unsigned threads) {
        McDesign d;
        d.K = K;
        d.estimator = cfg;
        for (Eigen::Index k = 0; k < phi.rows(); ++k) d.regressors.push_back(phi.row(k).transpose());
        d.specs = {spec};
        d.seed = seed;
        d.threads = threads;
        py::gil_scoped_release release;
        return replicate_errors(d);
      },
      py::arg("config"), py::arg("phi"), py::arg("spec"), py::arg("K") = 2000, py::arg("seed") = 0,
      py::arg("threads") = 0, "K x m matrix of theta - theta_hat over replications with theta uniform on the domain.");
  m.def("empirical_quantile", &empirical_quantile, py::arg("samples"), py::arg("p"));
  m.def("hoeffding_upsilon", &hoeffding_upsilon, py::arg("K"), py::arg("t"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "tsqn");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Run the command-line tool in-process; returns the exit code.");
}
