#include "rhtp/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rhtp::analysis {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Inequality with a relative slack plus an absolute floor.
bool within(double value, double bound, double rel, double abs_floor) {
  return value <= bound * (1.0 + rel) + abs_floor;
}

}  // namespace

// ---------------------------------------------------------------------------

double DeltaTable::at(Index s) const {
  auto it = by_order.find(s);
  if (it == by_order.end()) {
    std::ostringstream msg;
    msg << "restricted isometry constant of order " << s << " not available";
    throw ArgumentError(msg.str());
  }
  return it->second.value;
}

bool DeltaTable::exact(std::initializer_list<Index> orders) const {
  for (Index s : orders) {
    auto it = by_order.find(s);
    if (it == by_order.end() || !it->second.exact) return false;
  }
  return true;
}

bool DeltaTable::all_exact() const {
  return std::all_of(by_order.begin(), by_order.end(),
                     [](const auto& kv) { return kv.second.exact; });
}

std::vector<Index> required_orders(Index K, Index n) {
  std::vector<Index> out;
  for (Index s : {Index{2}, K, 2 * K, 2 * K + 1, 3 * K}) {
    const Index c = std::min(s, n);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

DeltaTable compute_deltas(const Matrix& phi, const std::vector<Index>& orders,
                          std::uint64_t samples, std::uint64_t seed) {
  DeltaTable t;
  const auto n = static_cast<std::uint64_t>(phi.cols());
  for (Index s : orders) {
    if (s < 1 || s > phi.cols()) throw ArgumentError("RIC order out of range");
    const bool exact = binomial(n, static_cast<std::uint64_t>(s)) <= kRicExactBudget;
    t.by_order[s] = estimate_ric(phi, s, exact ? RicMode::exact : RicMode::randomized, samples,
                                 seed + static_cast<std::uint64_t>(s));
  }
  return t;
}

AnalysisConstants compute_constants(const DeltaTable& delta, const CurvatureBounds& curvature,
                                    double mu, Index K) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ArgumentError("step size mu must be positive");
  if (K < 1) throw ArgumentError("K must be positive");
  if (!(curvature.l <= curvature.L) || !(curvature.L < 1.0))
    throw ArgumentError("curvature bounds must satisfy l <= L < 1");
  for (Index s : {Index{2}, K, 2 * K, 2 * K + 1, 3 * K}) {
    const double d = delta.at(s);
    if (!(d >= 0.0) || !(d < 1.0)) {
      std::ostringstream msg;
      msg << "delta_" << s << " = " << d << " violates the RIP requirement delta < 1";
      throw ArgumentError(msg.str());
    }
  }

  AnalysisConstants c;
  c.K = K;
  c.mu = mu;
  c.delta = delta;
  c.l = curvature.l;
  c.L = curvature.L;

  const double one_minus_l = 1.0 - c.l;
  for (const auto& [s, est] : delta.by_order) {
    const double d = est.value;
    const double mp = 1.0 - mu * (1.0 - d) / one_minus_l;
    c.mu_prime[s] = mp;
    if (d >= 1.0 || std::abs(mp) >= 1.0) {
      c.tau[s] = kInf;
    } else {
      c.tau[s] = std::sqrt(2.0) * mu * std::sqrt(1.0 + d) / std::sqrt(1.0 - mp * mp) +
                 std::sqrt(1.0 + d) / (1.0 - d);
    }
  }

  const double mp2 = c.mu_prime.at(2 * K);
  const double mp3 = c.mu_prime.at(3 * K);
  const double d2K = delta.at(2 * K);
  const double d3K = delta.at(3 * K);

  c.rho3K = std::abs(mp2) < 1.0 ? std::sqrt(2.0) * mp3 / std::sqrt(1.0 - mp2 * mp2) : kInf;
  c.rho_flag_valid = mp3 >= 0.0 && mp3 < 1.0 / std::sqrt(3.0);

  const double tau3K = c.tau.at(3 * K);
  const double head = std::sqrt(2.0 * (1.0 + d3K)) * (mp3 + 1.0 - d3K) / (1.0 - d3K);
  if (mp3 == 0.0) {
    c.kappa3K = head;
  } else if (c.rho3K < 1.0 && std::isfinite(tau3K)) {
    c.kappa3K = head + std::sqrt(2.0) * mp3 * tau3K / (1.0 - c.rho3K);
  } else {
    c.kappa3K = kInf;
  }

  const double squeeze = (1.0 - c.L) * (1.0 - c.L);
  c.window.lower = (1.0 - 1.0 / std::sqrt(3.0)) * one_minus_l / (1.0 - d3K);
  c.window.upper = squeeze / (one_minus_l * (1.0 + d2K));
  c.window.empty = !(c.window.lower < c.window.upper);
  c.descent_condition = mu * (1.0 + d2K) < squeeze / one_minus_l;
  return c;
}

// ---------------------------------------------------------------------------

StaticBounds static_bounds(const ProblemInstance& inst, const Regularizer& reg, double mu,
                           double delta_K) {
  if (!(delta_K >= 0.0 && delta_K < 1.0)) throw ArgumentError("delta_K must lie in [0, 1)");
  if (reg.size() != inst.n()) throw ArgumentError("regularizer size does not match n");
  StaticBounds b;
  const double ynorm = inst.y().norm();
  b.B = ynorm / std::sqrt(1.0 - delta_K);
  b.D = mu * inst.phi().colwise().norm().maxCoeff() * ynorm;
  const Index n = inst.n();
  b.C.resize(n);
  b.E.resize(n);
  const auto r = reg.curvature_range(-b.B, b.B);
  for (Index i = 0; i < n; ++i) {
    b.C[i] = 1.0 - reg.gamma(i) * r.min;
    b.E[i] = std::max(b.B * b.C[i], b.D);
  }
  return b;
}

CurvatureBounds curvature_for(const ProblemInstance& inst, const PsiMap& map, double mu,
                              double delta_K) {
  return validate(map, static_bounds(inst, map.regularizer(), mu, delta_K).E);
}

IterateBounds iterate_bounds_check(const IterationTrace& trace, const ProblemInstance& inst,
                                   const PsiMap& map, double mu, const DeltaTable& delta) {
  const Index K = inst.K();
  const Index n = inst.n();
  const Regularizer& reg = map.regularizer();
  const double dK = delta.at(K);
  const double d2K = delta.at(2 * K);
  const double d2K1 = delta.at(2 * K + 1);

  IterateBounds out;
  out.stat = static_bounds(inst, reg, mu, dK);
  out.hypotheses_verified = delta.exact({K, 2 * K, 2 * K + 1}) && d2K < 1.0 && d2K1 < 1.0;

  const bool noiseless = inst.noiseless() && inst.x_star().has_value();
  const SupportSet truth = inst.x_star() ? SupportSet::nonzeros(*inst.x_star()) : SupportSet{};
  const auto disjoint = [&](const SupportSet& s) {
    return noiseless && s.set_intersection(truth).empty();
  };

  const auto& recs = trace.records;
  const std::size_t N = recs.size();
  for (const auto& rec : recs) {
    const bool dis = disjoint(rec.x.support);
    const double Bk = dis ? d2K * out.stat.B : out.stat.B;
    out.B_k.push_back(Bk);
    out.D_k.push_back(dis ? d2K1 * out.stat.D : out.stat.D);
    const auto r = reg.curvature_range(-Bk, Bk);
    Vector Ck(n);
    for (Index i = 0; i < n; ++i) Ck[i] = 1.0 - reg.gamma(i) * r.min;
    out.C_k.push_back(std::move(Ck));
  }

  constexpr double rel = 1e-10;
  constexpr double floor = 1e-14;
  auto check = [&](int k, Index i, const char* what, double value, double bound) {
    ++out.checks;
    if (!within(std::abs(value), bound, rel, floor))
      out.violations.push_back({k, i, what, std::abs(value), bound});
  };

  const bool zero_start = recs.front().x.values.isZero(0.0);
  for (std::size_t k = 0; k < N; ++k) {
    const auto& rec = recs[k];
    if (k >= 1) {
      const Vector z = map.Psi(rec.x.values);
      for (Index i : rec.x.support) {
        check(static_cast<int>(k), i, "x", rec.x.values[i], out.B_k[k]);
        check(static_cast<int>(k), i, "z", z[i], out.C_k[k][i] * out.B_k[k]);
      }
    }
    if (k + 1 < N) {
      Vector Ek(n);
      double F = 0.0, G = kInf;
      for (Index i = 0; i < n; ++i) {
        Ek[i] = std::max(out.B_k[k] * out.C_k[k][i], out.D_k[k + 1]);
        const double hi = map.psi_inverse(i, Ek[i]);
        const auto r = reg.curvature_range(-hi, hi);
        F = std::max(F, 1.0 / (1.0 - reg.gamma(i) * r.max));
        G = std::min(G, 1.0 / (1.0 - reg.gamma(i) * r.min));
      }
      out.F_k.push_back(F);
      out.G_k.push_back(G);
      if (k >= 1 || zero_start) {
        const auto& next = recs[k + 1];
        for (Index i : next.x.support)
          check(static_cast<int>(k + 1), i, "x_hat", next.x_hat[i], Ek[i]);
      }
      out.E_k.push_back(std::move(Ek));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ConjugateTrace conjugate_trace(const IterationTrace& trace, const ProblemInstance& inst,
                               const PsiMap& map, double mu, Index K) {
  if (map.size() != inst.n()) throw ArgumentError("map size does not match n");
  ConjugateTrace out;
  for (const auto& rec : trace.records) out.z.push_back(map.Psi(rec.x.values));

  Vector z = out.z.front();
  out.z_sim.push_back(z);
  out.sim_supports.push_back(trace.records.front().x.support);
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const Vector x = map.PsiInverse(z);
    const Vector grad_f = -(inst.phi().transpose() * (inst.y() - inst.phi() * x));
    const Vector Md = map.m_diagonal(z);
    const Vector grad_w = grad_f.cwiseQuotient(Md);
    const Vector arg = z - mu * Md.cwiseProduct(grad_w);
    const SparseIterate thr = hard_threshold(arg, K);
    const SparseIterate ls = restricted_least_squares(inst, thr.support);
    z = map.Psi(ls.values);
    out.z_sim.push_back(z);
    out.sim_supports.push_back(thr.support);
  }

  for (std::size_t k = 0; k < out.z.size(); ++k) {
    out.max_discrepancy =
        std::max(out.max_discrepancy, (out.z[k] - out.z_sim[k]).lpNorm<Eigen::Infinity>());
    if (out.sim_supports[k] != trace.records[k].x.support) out.supports_match = false;
  }
  return out;
}

// ---------------------------------------------------------------------------

DescentReport descent_monitor(const IterationTrace& trace, const ProblemInstance& inst,
                              const PsiMap& map, const AnalysisConstants* constants) {
  DescentReport out;
  for (const auto& rec : trace.records) {
    const Vector z = map.Psi(rec.x.values);
    out.w.push_back(least_squares_objective(inst, map.PsiInverse(z)));
  }
  const double w0 = out.w.front();
  for (std::size_t k = 0; k < out.w.size(); ++k) {
    const double f = least_squares_objective(inst, trace.records[k].x.values);
    const double scale = std::max({f, w0, std::numeric_limits<double>::min()});
    out.max_identity_error = std::max(out.max_identity_error, std::abs(out.w[k] - f) / scale);
    if (k + 1 < out.w.size() && out.w[k + 1] > out.w[k] + 1e-12 * w0)
      out.violations.push_back(static_cast<int>(k + 1));
  }
  if (constants) {
    out.condition_known = constants->delta.exact({2 * constants->K});
    out.condition_held = constants->descent_condition;
  }
  const auto& recs = trace.records;
  out.eventually_stable = trace.status == TerminalStatus::converged_support_stable ||
                          (recs.size() >= 2 &&
                           recs[recs.size() - 1].x.support == recs[recs.size() - 2].x.support);
  return out;
}

// ---------------------------------------------------------------------------

ContractionReport contraction_check(const IterationTrace& trace, const ProblemInstance& inst,
                                    const PsiMap& map, const AnalysisConstants& c) {
  if (!inst.x_star()) throw ArgumentError("contraction check needs the ground truth x_star");
  const Index K = c.K;
  ContractionReport out;
  const double d3K = c.delta.at(3 * K);
  out.hypotheses_verified = c.delta.exact({2 * K, 3 * K}) && c.rho_below_one() &&
                            c.mu * (1.0 + d3K) < (1.0 - c.L) * (1.0 - c.L) / (1.0 - c.l);

  const Vector z_star = map.Psi(*inst.x_star());
  const double e_norm = inst.e() ? inst.e()->norm() : 0.0;
  const double tau2K = c.tau.at(2 * K);
  std::vector<double> dist;
  for (const auto& rec : trace.records) dist.push_back((map.Psi(rec.x.values) - z_star).norm());
  const double scale = std::max(dist.front(), z_star.norm());

  for (std::size_t k = 0; k + 1 < dist.size(); ++k) {
    const double lhs = dist[k + 1];
    const double rhs = c.rho3K * dist[k] + tau2K * e_norm;
    out.lhs.push_back(lhs);
    out.rhs.push_back(rhs);
    if (!within(lhs, rhs, kContractionSlack, kContractionSlack * scale))
      out.violations.push_back(static_cast<int>(k + 1));
    if (dist[k] > 0.0) out.worst_ratio = std::max(out.worst_ratio, lhs / dist[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------

DInequalityResult d_inequality_check(const Vector& u, const Vector& v, const Vector& w, double rho,
                                     const Matrix& phi, const PsiMap& map, const DHypotheses& hyp) {
  const Index n = phi.cols();
  if (u.size() != n || v.size() != n || w.size() != n || map.size() != n)
    throw ArgumentError("d_inequality_check: dimension mismatch");
  if (!(rho > 0.0)) throw PreconditionError("rho must be positive");
  if (!hyp.delta_exact) throw PreconditionError("delta_|T| is not an exact value");
  if (!(hyp.delta_T >= 0.0 && hyp.delta_T < 1.0))
    throw PreconditionError("RIP of order |T| does not hold");
  if (u.lpNorm<Eigen::Infinity>() > hyp.E || v.lpNorm<Eigen::Infinity>() > hyp.E)
    throw PreconditionError("entries of u or v exceed E");

  DInequalityResult r;
  const auto cb = validate(map, Vector::Constant(n, hyp.E));
  r.l = cb.l;
  r.L = cb.L;
  if (!(rho * (1.0 + hyp.delta_T) < (1.0 - r.L) * (1.0 - r.L) / (1.0 - r.l)))
    throw PreconditionError("rho (1 + delta_|T|) < (1 - L)^2 / (1 - l) does not hold");

  r.rho_prime = 1.0 - rho * (1.0 - hyp.delta_T) / (1.0 - r.l);
  const Vector diff = v - u;
  const Vector d = diff - rho * (phi.transpose() * (phi * (map.PsiInverse(v) - map.PsiInverse(u))));
  const double dn = diff.norm();

  r.inner_lhs = w.dot(d);
  r.inner_rhs = r.rho_prime * w.norm() * dn;
  double tail = 0.0;
  for (Index i = 0; i < n; ++i)
    if (w[i] != 0.0) tail += d[i] * d[i];
  r.norm_lhs = std::sqrt(tail);
  r.norm_rhs = r.rho_prime * dn;

  const bool unit = r.rho_prime > 0.0 && r.rho_prime < 1.0;
  r.inner_ok = unit && r.inner_lhs <= r.inner_rhs + 1e-10 * w.norm() * dn;
  r.norm_ok = unit && r.norm_lhs <= r.norm_rhs + 1e-10 * dn;
  return r;
}

// ---------------------------------------------------------------------------

IterationPrediction predict_iterations(const AnalysisConstants& c, const Vector& z0,
                                       const Vector& z_star, double e_norm) {
  if (!c.rho_below_one()) {
    std::ostringstream msg;
    msg << "iteration bounds need rho_3K < 1 (rho_3K = " << c.rho3K << ")";
    throw InapplicableError(msg.str());
  }
  if (z0.size() != z_star.size()) throw ArgumentError("z0 and z_star sizes differ");
  const Index K = c.K;
  const double rho = c.rho3K;

  IterationPrediction p;
  p.c = rho == 0.0 ? 1.0 : std::log(4.0 / (rho * rho)) / std::log(1.0 / (rho * rho));
  p.universal = static_cast<int>(std::ceil(p.c * static_cast<double>(K)));
  p.tau1 = std::sqrt(2.0 * (1.0 + c.delta.at(2))) * c.mu + c.tau.at(2 * K) / (1.0 - rho);

  double zmin = kInf;
  for (Index i = 0; i < z_star.size(); ++i)
    if (z_star[i] != 0.0) zmin = std::min(zmin, std::abs(z_star[i]));
  if (!std::isfinite(zmin)) zmin = 0.0;

  const double margin = zmin - p.tau1 * e_norm;
  if (margin > 0.0) {
    const double arg = std::sqrt(2.0) * c.mu_prime.at(3 * K) * (z0 - z_star).norm() / margin;
    if (arg <= 0.0 || rho == 0.0) {
      p.signal_dependent = 0;
    } else {
      const double t = std::log(arg) / std::log(1.0 / rho);
      p.signal_dependent = std::max(0, static_cast<int>(std::ceil(t)));
    }
  }
  return p;
}

bool support_growth_condition(const AnalysisConstants& c, const Vector& z_star, Index p, Index q,
                              int k_prime, double e_norm) {
  const Index K = c.K;
  if (p < 0 || q < 1 || p + q > K || k_prime < 0)
    throw ArgumentError("support growth condition needs 0 <= p, 1 <= q, p + q <= K");
  const Arrangement a = nonincreasing_arrangement(z_star);
  if (a.r.size() < K) throw ArgumentError("z_star shorter than K");
  const double lhs = a.r[p + q - 1];
  const double tail = a.r.segment(p, K - p).norm();
  return lhs > std::pow(c.rho3K, k_prime) * tail + c.kappa3K * e_norm;
}

std::optional<int> first_support_hit(const IterationTrace& trace, const SupportSet& target) {
  for (const auto& rec : trace.records)
    if (rec.x.support == target) return rec.k;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

InequalityCheck wielandt_check(const Matrix& B, const Vector& x, const Vector& y) {
  if (B.rows() != B.cols() || x.size() != B.rows() || y.size() != B.rows())
    throw ArgumentError("wielandt_check: dimension mismatch");
  if (std::abs(x.dot(y)) > 1e-10 * x.norm() * y.norm())
    throw ArgumentError("wielandt_check: x and y must be orthogonal");
  Eigen::SelfAdjointEigenSolver<Matrix> es(B, Eigen::EigenvaluesOnly);
  const double lm = es.eigenvalues().minCoeff();
  const double lM = es.eigenvalues().maxCoeff();
  if (!(lm > 0.0)) throw ArgumentError("wielandt_check: B must be positive definite");
  const double ratio = (lM - lm) / (lM + lm);
  const double xBx = x.dot(B * x);
  const double yBy = y.dot(B * y);
  InequalityCheck r;
  const double xBy = x.dot(B * y);
  r.lhs = xBy * xBy;
  r.rhs = ratio * ratio * xBx * yBy;
  r.ok = r.lhs <= r.rhs + 1e-12 * xBx * yBy;
  return r;
}

InequalityCheck projection_bound_check(const Matrix& phi, const SupportSet& S,
                                       const SupportSet& lambda, const Vector& x, double delta) {
  if (!S.set_intersection(lambda).empty()) throw ArgumentError("S and Lambda must be disjoint");
  if (x.size() != static_cast<Index>(lambda.size()))
    throw ArgumentError("x must hold one coefficient per index of Lambda");
  const Vector y = columns(phi, lambda) * x;
  InequalityCheck r;
  r.lhs = projection_onto_span(phi, S, y).norm();
  r.rhs = delta * y.norm();
  r.ok = within(r.lhs, r.rhs, 1e-10, 1e-12 * y.norm());
  return r;
}

InequalityCheck correlation_bound_check(const Matrix& phi, const SupportSet& S,
                                        const SupportSet& lambda, const Vector& x, double delta) {
  if (!S.set_intersection(lambda).empty()) throw ArgumentError("S and Lambda must be disjoint");
  if (x.size() != static_cast<Index>(lambda.size()))
    throw ArgumentError("x must hold one coefficient per index of Lambda");
  const Vector y = columns(phi, lambda) * x;
  const Vector ry = y - projection_onto_span(phi, S, y);
  const double ynorm = y.norm();
  InequalityCheck r;
  r.rhs = delta;
  r.ok = true;
  for (Index i = 0; i < phi.cols(); ++i) {
    if (S.contains(i) || lambda.contains(i)) continue;
    const Vector col = phi.col(i);
    const double a = std::abs(col.dot(ry));
    const double b = (col - projection_onto_span(phi, S, col)).norm() * ynorm;
    if (b > 0.0) r.lhs = std::max(r.lhs, a / b);
    if (!within(a, delta * b, 1e-10, 1e-12 * col.norm() * ynorm)) r.ok = false;
  }
  return r;
}

// ---------------------------------------------------------------------------

std::optional<double> admissible_mu(const ProblemInstance& inst, const PsiMap& map,
                                    const DeltaTable& delta, Index K, double safety, Index order) {
  if (!(safety > 0.0 && safety < 1.0)) throw ArgumentError("safety factor must lie in (0, 1)");
  const double dK = delta.at(K);
  const double d2K = delta.at(order == 0 ? 2 * K : order);
  if (!(dK < 1.0) || !(d2K < 1.0)) return std::nullopt;

  // h(mu) = mu (1 + delta_2K)(1 - l(mu)) - safety (1 - L(mu))^2 is increasing:
  // E grows with mu, so l can only fall and L can only rise.
  // L >= 1 makes the condition unsatisfiable, which counts as h > 0.
  const auto h = [&](double mu) {
    CurvatureBounds cb;
    try {
      cb = curvature_for(inst, map, mu, dK);
    } catch (const InvalidRegularizerError&) {
      return kInf;
    }
    return mu * (1.0 + d2K) * (1.0 - cb.l) - safety * (1.0 - cb.L) * (1.0 - cb.L);
  };
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (h(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 60) return std::nullopt;
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) <= 0.0 ? lo : hi) = mid;
  }
  if (!(lo > 0.0)) return std::nullopt;
  return lo;
}

}  // namespace rhtp::analysis
