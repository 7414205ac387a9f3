#include "rhtp/analysis_report.hpp"
#include "rhtp/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rhtp;

namespace {

Regularizer make_regularizer(const std::string& algorithm, double q, double eps, double gamma, Index n) {
  if (algorithm == "rhtp") return Regularizer::uniform(q, eps, gamma, n);
  return Regularizer::zero(n);
}

AlgorithmKind algorithm_kind(const std::string& s) {
  if (s == "rhtp") return AlgorithmKind::rhtp;
  if (s == "htp") return AlgorithmKind::htp;
  if (s == "iht") return AlgorithmKind::iht;
  throw ArgumentError("unknown algorithm: " + s);
}

StopRule stop_rule(const std::string& s, double tol) {
  if (s == "support_stable") return StopRule::support_stable();
  if (s == "residual_below") return StopRule::residual_below(tol);
  if (s == "error_below") return StopRule::error_below(tol);
  throw ArgumentError("unknown stop rule: " + s);
}

ProblemInstance make_instance(const Matrix& phi, const Vector& y, Index K,
                              const std::optional<Vector>& x_star) {
  if (!x_star) return ProblemInstance(phi, y, K);
  if (x_star->size() != phi.cols()) throw ArgumentError("x_star length does not match phi");
  return ProblemInstance(phi, y, K, *x_star, y - phi * *x_star);
}

IterationTrace run_algorithm(const ProblemInstance& inst, const std::string& algorithm, double mu,
                             double q, double eps, double gamma, int max_iters,
                             const std::string& stop, double tol) {
  AlgoConfig cfg;
  cfg.algorithm = algorithm_kind(algorithm);
  if (cfg.algorithm == AlgorithmKind::rhtp) cfg.regularizer = make_regularizer(algorithm, q, eps, gamma, inst.n());
  cfg.mu = mu;
  cfg.K = inst.K();
  cfg.max_iters = max_iters;
  cfg.stop = stop_rule(stop, tol);
  return run(inst, cfg);
}

py::dict trace_dict(const IterationTrace& t) {
  py::list x, supports, residuals;
  for (const auto& rec : t.records) {
    x.append(rec.x.values);
    supports.append(rec.x.support.indices());
    residuals.append(rec.residual_norm);
  }
  py::dict d;
  d["x"] = x;
  d["supports"] = supports;
  d["residuals"] = residuals;
  d["iterations"] = t.iterations_used;
  d["status"] = std::string(to_string(t.status));
  d["error_message"] = t.error_message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regularized hard thresholding pursuit and its analysis tools";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<InvalidRegularizerError>(m, "InvalidRegularizerError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<InapplicableError>(m, "InapplicableError", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);

  m.def(
      "hard_threshold",
      [](const Vector& v, Index K) {
        const auto r = hard_threshold(v, K);
        return py::make_tuple(r.values, r.support.indices());
      },
      py::arg("v"), py::arg("K"), "Keep the K largest magnitudes; returns (values, support).");

  m.def(
      "restricted_least_squares",
      [](const Matrix& phi, const Vector& y, const std::vector<Index>& support) {
        return restricted_least_squares(phi, y, SupportSet(support)).values;
      },
      py::arg("phi"), py::arg("y"), py::arg("support"));

  m.def(
      "estimate_ric",
      [](const Matrix& phi, Index s, bool randomized, std::uint64_t samples, std::uint64_t seed) {
        const auto r = estimate_ric(phi, s, randomized ? RicMode::randomized : RicMode::exact, samples, seed);
        py::dict d;
        d["value"] = r.value;
        d["exact"] = r.exact;
        d["supports_evaluated"] = r.supports_evaluated;
        return d;
      },
      py::arg("phi"), py::arg("s"), py::arg("randomized") = false, py::arg("samples") = 10000,
      py::arg("seed") = 0);

  m.def(
      "psi",
      [](const Vector& x, double q, double eps, double gamma) {
        return PsiMap(Regularizer::uniform(q, eps, gamma, x.size())).Psi(x);
      },
      py::arg("x"), py::arg("q"), py::arg("eps") = 0.42, py::arg("gamma") = 0.3);
  m.def(
      "psi_inverse",
      [](const Vector& z, double q, double eps, double gamma) {
        return PsiMap(Regularizer::uniform(q, eps, gamma, z.size())).PsiInverse(z);
      },
      py::arg("z"), py::arg("q"), py::arg("eps") = 0.42, py::arg("gamma") = 0.3);

  m.def(
      "run",
      [](const Matrix& phi, const Vector& y, Index K, const std::string& algorithm, double mu,
         double q, double eps, double gamma, int max_iters, const std::string& stop, double tol,
         const std::optional<Vector>& x_star) {
        const auto inst = make_instance(phi, y, K, x_star);
        return trace_dict(run_algorithm(inst, algorithm, mu, q, eps, gamma, max_iters, stop, tol));
      },
      py::arg("phi"), py::arg("y"), py::arg("K"), py::arg("algorithm") = "rhtp", py::arg("mu") = 0.3,
      py::arg("q") = 1.0, py::arg("eps") = 0.42, py::arg("gamma") = 0.3, py::arg("max_iters") = 100,
      py::arg("stop") = "support_stable", py::arg("tol") = 1e-6, py::arg("x_star") = py::none(),
      "Run rhtp, htp or iht; returns the iteration trace as a dict.");

  m.def(
      "analyze",
      [](const Matrix& phi, const Vector& y, Index K, const std::string& algorithm, double mu,
         double q, double eps, double gamma, int max_iters, const std::optional<Vector>& x_star,
         std::uint64_t ric_samples) {
        if (algorithm == "iht") throw ArgumentError("analysis covers rhtp and htp");
        const auto inst = make_instance(phi, y, K, x_star);
        const auto trace =
            run_algorithm(inst, algorithm, mu, q, eps, gamma, max_iters, "support_stable", 0.0);
        const PsiMap map(make_regularizer(algorithm, q, eps, gamma, inst.n()));
        const auto delta = analysis::compute_deltas(phi, analysis::required_orders(K, inst.n()), ric_samples);
        return analysis::analysis_report(inst, trace, map, mu, delta).dump();
      },
      py::arg("phi"), py::arg("y"), py::arg("K"), py::arg("algorithm") = "rhtp", py::arg("mu") = 0.3,
      py::arg("q") = 1.0, py::arg("eps") = 0.42, py::arg("gamma") = 0.3, py::arg("max_iters") = 100,
      py::arg("x_star") = py::none(), py::arg("ric_samples") = 200,
      "Run an algorithm and return the analysis report as a JSON string.");

  m.def(
      "generate_instance",
      [](Index n, Index m_, Index K, double noise_std, std::uint64_t seed, const std::string& ensemble) {
        const auto inst = bench::generate_instance(n, m_, K, noise_std, seed, bench::ensemble_from_string(ensemble));
        py::dict d;
        d["phi"] = inst.phi();
        d["y"] = inst.y();
        d["x_star"] = *inst.x_star();
        d["e"] = *inst.e();
        return d;
      },
      py::arg("n"), py::arg("m"), py::arg("K"), py::arg("noise_std") = 0.0, py::arg("seed") = 0,
      py::arg("ensemble") = "gaussian");

  m.def(
      "preset", [](const std::string& name) { return bench::config_to_json(bench::preset(name)).dump(); },
      py::arg("name"), "Named experiment config as a JSON string.");

  m.def(
      "run_sweep",
      [](const std::string& config_json) {
        const auto cfg = bench::config_from_json(nlohmann::json::parse(config_json));
        py::gil_scoped_release release;
        return bench::results_csv(bench::run_sweep(cfg));
      },
      py::arg("config_json"), "Run an experiment config and return results.csv content.");
}
