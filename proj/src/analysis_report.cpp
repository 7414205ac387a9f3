#include "rhtp/analysis_report.hpp"

#include <cmath>
#include <string>

namespace rhtp::analysis {

namespace {

using nlohmann::ordered_json;

// JSON has no infinity; unbounded constants are written as null.
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json violation(const std::string& check, int k, bool asserted, double value, double bound) {
  ordered_json v;
  v["check"] = check;
  v["k"] = k;
  v["asserted"] = asserted;
  v["value"] = num(value);
  v["bound"] = num(bound);
  return v;
}

}  // namespace

nlohmann::ordered_json analysis_report(const ProblemInstance& inst, const IterationTrace& trace,
                                       const PsiMap& map, double mu, const DeltaTable& delta) {
  if (trace.records.empty()) throw ArgumentError("trace has no records");
  const Index K = inst.K();
  ordered_json constants, flags;
  ordered_json violations = ordered_json::array();

  ordered_json deltas = ordered_json::object();
  for (const auto& [s, est] : delta.by_order)
    deltas[std::to_string(s)] = {{"value", est.value}, {"exact", est.exact}};

  std::optional<AnalysisConstants> c;
  std::string constants_error;
  try {
    const CurvatureBounds cb = curvature_for(inst, map, mu, delta.at(K));
    c = compute_constants(delta, cb, mu, K);
  } catch (const Error& ex) {
    constants_error = ex.what();
  }

  const bool verified = c && c->exact();

  constants["K"] = K;
  constants["mu"] = mu;
  constants["delta"] = deltas;
  if (c) {
    constants["l"] = c->l;
    constants["L"] = c->L;
    ordered_json mp = ordered_json::object(), tau = ordered_json::object();
    for (const auto& [s, v] : c->mu_prime) mp[std::to_string(s)] = num(v);
    for (const auto& [s, v] : c->tau) tau[std::to_string(s)] = num(v);
    constants["mu_prime"] = mp;
    constants["tau"] = tau;
    constants["rho3K"] = num(c->rho3K);
    constants["kappa3K"] = num(c->kappa3K);
    constants["mu_window"] = {{"lower", num(c->window.lower)},
                              {"upper", num(c->window.upper)},
                              {"empty", c->window.empty}};
  } else {
    constants["error"] = constants_error;
  }

  flags["constants_available"] = c.has_value();
  flags["descent_condition"] = c ? c->descent_condition : false;
  flags["rho_below_one"] = c ? c->rho_below_one() : false;
  flags["rho_sufficient_condition"] = c ? c->rho_flag_valid : false;
  flags["mu_in_window"] = c ? (!c->window.empty && mu > c->window.lower && mu < c->window.upper)
                            : false;

  // Conjugacy holds unconditionally, so it is always asserted.
  const ConjugateTrace conj = conjugate_trace(trace, inst, map, mu, K);
  flags["conjugacy_max_discrepancy"] = conj.max_discrepancy;
  if (conj.max_discrepancy > 1e-8 || !conj.supports_match)
    violations.push_back(violation("conjugacy", trace.iterations_used, true,
                                   conj.max_discrepancy, 1e-8));

  const DescentReport desc = descent_monitor(trace, inst, map, c ? &*c : nullptr);
  const bool descent_asserted = verified && desc.condition_held;
  for (int k : desc.violations)
    violations.push_back(violation("descent", k, descent_asserted, desc.w[k], desc.w[k - 1]));
  flags["eventually_stable"] = desc.eventually_stable;

  if (c && inst.x_star()) {
    const ContractionReport con = contraction_check(trace, inst, map, *c);
    flags["contraction_hypotheses"] = con.hypotheses_verified;
    flags["contraction_worst_ratio"] = con.worst_ratio;
    for (int k : con.violations)
      violations.push_back(violation("contraction", k, con.hypotheses_verified,
                                     con.lhs[k - 1], con.rhs[k - 1]));
  }

  if (c) {
    const IterateBounds ib = iterate_bounds_check(trace, inst, map, mu, delta);
    flags["iterate_bound_hypotheses"] = ib.hypotheses_verified;
    for (const auto& v : ib.violations) {
      auto j = violation("iterate_bound_" + v.quantity, v.k, ib.hypotheses_verified, v.value,
                         v.bound);
      j["i"] = v.i;
      violations.push_back(j);
    }
  }

  ordered_json predicted = nullptr;
  if (c && c->rho_below_one() && inst.x_star()) {
    const Vector z_star = map.Psi(*inst.x_star());
    const Vector z0 = map.Psi(trace.records.front().x.values);
    const double e_norm = inst.e() ? inst.e()->norm() : 0.0;
    const IterationPrediction p = predict_iterations(*c, z0, z_star, e_norm);
    predicted = {{"c", p.c}, {"tau1", num(p.tau1)}, {"universal", p.universal}};
    predicted["signal_dependent"] =
        p.signal_dependent ? ordered_json(*p.signal_dependent) : ordered_json(nullptr);
  }


  ordered_json observed;
  observed["iterations_used"] = trace.iterations_used;
  if (inst.x_star()) {
    const auto hit = first_support_hit(trace, SupportSet::nonzeros(*inst.x_star()));
    observed["first_correct_support"] = hit ? ordered_json(*hit) : ordered_json(nullptr);
  }

  ordered_json doc;
  doc["mode"] = verified ? "verified" : "estimated";
  doc["constants"] = std::move(constants);
  doc["condition_flags"] = std::move(flags);
  doc["violations"] = std::move(violations);
  doc["predicted_iters"] = std::move(predicted);
  doc["observed_iters"] = std::move(observed);
  return doc;
}

}  // namespace rhtp::analysis
