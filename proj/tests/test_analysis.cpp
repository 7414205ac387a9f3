#include <doctest.h>

#include "oracles.hpp"
#include "rhtp/analysis.hpp"
#include "rhtp/analysis_report.hpp"

#include <cmath>

using namespace rhtp;
using namespace rhtp::analysis;

namespace {

DeltaTable flat_deltas(Index K, double d) {
  DeltaTable t;
  for (Index s : {Index{1}, Index{2}, K, 2 * K, 2 * K + 1, 3 * K}) t.by_order[s] = {d, true, 1};
  return t;
}

ProblemInstance tiny(Index m, Index n, Index K, std::uint64_t seed, double noise = 0.0) {
  Matrix phi = oracle::gaussian(m, n, 1.0 / std::sqrt(static_cast<double>(m)), seed);
  Vector x = oracle::sparse_signal(n, K, seed + 7777);
  Vector e = noise * oracle::gaussian_vec(m, seed + 999);
  Vector y = phi * x + e;
  return ProblemInstance(std::move(phi), std::move(y), K, std::move(x), std::move(e));
}

IterationTrace run_rhtp(const ProblemInstance& inst, double q, double mu, int iters = 30) {
  AlgoConfig cfg;
  cfg.algorithm = AlgorithmKind::rhtp;
  cfg.regularizer = Regularizer::uniform(q, 0.42, 0.3, inst.n());
  cfg.mu = mu;
  cfg.K = inst.K();
  cfg.max_iters = iters;
  return run(inst, cfg);
}

}  // namespace

TEST_CASE("constants for an isometry with no curvature") {
  const auto c = compute_constants(flat_deltas(2, 0.0), {0.0, 0.0, true}, 1.0, 2);
  for (const auto& [s, v] : c.mu_prime) CHECK(v == 0.0);
  CHECK(c.rho3K == 0.0);
  CHECK(c.tau_at(4) == doctest::Approx(std::sqrt(2.0) + 1.0).epsilon(1e-14));
  CHECK(c.kappa3K == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(c.descent_condition == false);  // mu (1 + 0) = 1 is not < 1
  CHECK(c.rho_below_one());
  CHECK(c.rho_flag_valid);
}

TEST_CASE("constants follow the closed forms") {
  const double d = 0.2, mu = 0.7, l = 0.05, L = 0.1;
  const auto c = compute_constants(flat_deltas(2, d), {l, L, true}, mu, 2);
  const double mp = 1.0 - mu * (1.0 - d) / (1.0 - l);
  CHECK(c.mu_prime_at(6) == doctest::Approx(mp).epsilon(1e-14));
  CHECK(c.rho3K == doctest::Approx(std::sqrt(2.0) * mp / std::sqrt(1.0 - mp * mp)).epsilon(1e-14));
  const double tau = std::sqrt(2.0) * mu * std::sqrt(1.0 + d) / std::sqrt(1.0 - mp * mp) +
                     std::sqrt(1.0 + d) / (1.0 - d);
  CHECK(c.tau_at(4) == doctest::Approx(tau).epsilon(1e-14));
  CHECK(c.window.lower ==
        doctest::Approx((1.0 - 1.0 / std::sqrt(3.0)) * (1.0 - l) / (1.0 - d)).epsilon(1e-14));
  CHECK(c.window.upper == doctest::Approx((1.0 - L) * (1.0 - L) / ((1.0 - l) * (1.0 + d))));
  CHECK(c.descent_condition == (mu * (1.0 + d) < (1.0 - L) * (1.0 - L) / (1.0 - l)));
}

TEST_CASE("curvature shrinks the lower end of the step window") {
  const auto a = compute_constants(flat_deltas(2, 0.0), {0.0, 0.1, true}, 0.5, 2);
  const auto b = compute_constants(flat_deltas(2, 0.0), {0.1, 0.1, true}, 0.5, 2);
  CHECK(b.window.lower == doctest::Approx(0.9 * a.window.lower).epsilon(1e-14));
}

TEST_CASE("constants reject missing or non-RIP deltas") {
  CHECK_THROWS_AS(compute_constants(flat_deltas(2, 1.0), {0.0, 0.0, true}, 0.5, 2), ArgumentError);
  DeltaTable partial = flat_deltas(2, 0.1);
  partial.by_order.erase(6);
  CHECK_THROWS_AS(compute_constants(partial, {0.0, 0.0, true}, 0.5, 2), ArgumentError);
  CHECK_THROWS_AS(compute_constants(flat_deltas(2, 0.1), {0.0, 1.0, false}, 0.5, 2), ArgumentError);
}

TEST_CASE("rho below one follows from the sufficient condition") {
  for (double d : {0.0, 0.1, 0.3, 0.6, 0.9})
    for (double mu = 0.05; mu < 2.0; mu += 0.05) {
      const auto c = compute_constants(flat_deltas(2, d), {0.0, 0.0, true}, mu, 2);
      if (c.rho_flag_valid) CHECK(c.rho_below_one());
    }
}

TEST_CASE("iteration prediction examples") {
  AnalysisConstants c;
  c.K = 3;
  c.mu = 0.5;
  c.rho3K = 0.1;
  c.delta.by_order[2] = {0.0, true, 1};
  c.tau[6] = 1.0;
  c.mu_prime[9] = 0.05;
  Vector z(4);
  z << 1.0, 0.0, -2.0, 0.5;
  auto p = predict_iterations(c, z, z, 0.0);
  CHECK(p.c == doctest::Approx(std::log(400.0) / std::log(100.0)).epsilon(1e-14));
  CHECK(p.c == doctest::Approx(1.30103).epsilon(1e-5));
  CHECK(p.universal == 4);
  REQUIRE(p.signal_dependent.has_value());
  CHECK(*p.signal_dependent == 0);

  // Far start: ceil(ln(sqrt2 mu' ||z0 - z*|| / zmin) / ln(1/rho)).
  const Vector z0 = Vector::Zero(4);
  p = predict_iterations(c, z0, z, 0.0);
  const double expect = std::ceil(std::log(std::sqrt(2.0) * 0.05 * z.norm() / 0.5) / std::log(10.0));
  CHECK(*p.signal_dependent == static_cast<int>(std::max(0.0, expect)));

  // Noise swamping the smallest entry leaves only the universal bound.
  p = predict_iterations(c, z0, z, 10.0);
  CHECK_FALSE(p.signal_dependent.has_value());

  c.rho3K = 0.0;
  CHECK(predict_iterations(c, z0, z, 0.0).c == 1.0);
  c.rho3K = 1.0;
  CHECK_THROWS_AS(predict_iterations(c, z0, z, 0.0), InapplicableError);
}

TEST_CASE("Wielandt inequality attains equality on a 2x2 example") {
  Matrix B(2, 2);
  B << 1, 0, 0, 3;
  Vector x(2), y(2);
  x << 1, 1;
  y << 1, -1;
  const auto r = wielandt_check(B, x, y);
  CHECK(r.lhs == doctest::Approx(4.0));
  CHECK(r.rhs == doctest::Approx(4.0));
  CHECK(r.ok);
  Vector not_orth(2);
  not_orth << 1, 0;
  CHECK_THROWS_AS(wielandt_check(B, x, not_orth), ArgumentError);
}

TEST_CASE("Wielandt inequality holds on random positive definite matrices") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Matrix A = oracle::gaussian(6, 6, 1.0, seed);
    const Matrix B = A.transpose() * A + 0.1 * Matrix::Identity(6, 6);
    const Vector x = oracle::gaussian_vec(6, seed + 1);
    Vector y = oracle::gaussian_vec(6, seed + 2);
    y -= (y.dot(x) / x.squaredNorm()) * x;
    CHECK(wielandt_check(B, x, y).ok);
  }
}

TEST_CASE("projection and correlation bounds hold with the exact constant") {
  const Matrix phi = oracle::gaussian(8, 10, 1.0 / std::sqrt(8.0), 5);
  const SupportSet S{0, 3}, lambda{5, 7};
  const double d4 = oracle::ric_svd(phi, 4);
  const double d5 = oracle::ric_svd(phi, 5);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Vector x = oracle::gaussian_vec(2, seed);
    const auto p = projection_bound_check(phi, S, lambda, x, d4);
    CHECK(p.ok);
    CHECK(p.lhs <= p.rhs * (1 + 1e-10) + 1e-12);
    CHECK(correlation_bound_check(phi, S, lambda, x, d5).ok);
  }
  // A constant below the observed ratio must be reported as a failure.
  const Vector x = oracle::gaussian_vec(2, 1);
  const auto p = projection_bound_check(phi, S, lambda, x, d4);
  if (p.lhs > 0.0) CHECK_FALSE(projection_bound_check(phi, S, lambda, x, 0.5 * p.lhs / (columns(phi, lambda) * x).norm()).ok);
  CHECK_THROWS_AS(projection_bound_check(phi, S, SupportSet{0, 1}, x, d4), ArgumentError);
}

TEST_CASE("conjugate dynamics with the zero regularizer coincide with the iterates") {
  const auto inst = tiny(16, 24, 3, 41);
  AlgoConfig cfg;
  cfg.algorithm = AlgorithmKind::htp;
  cfg.mu = 0.5;
  cfg.K = 3;
  const auto trace = run(inst, cfg);
  const PsiMap map(Regularizer::zero(24));
  const auto conj = conjugate_trace(trace, inst, map, 0.5, 3);
  CHECK(conj.supports_match);
  CHECK(conj.max_discrepancy <= 1e-12);
  for (std::size_t k = 0; k < conj.z.size(); ++k) CHECK(conj.z[k] == trace.records[k].x.values);
}

TEST_CASE("conjugate dynamics track RHTP for every exponent") {
  for (double q : {0.5, 1.0, 1.5, 2.0}) {
    const auto inst = tiny(16, 32, 3, 50 + static_cast<std::uint64_t>(q * 10));
    const auto trace = run_rhtp(inst, q, 0.3);
    const PsiMap map(Regularizer::uniform(q, 0.42, 0.3, 32));
    const auto conj = conjugate_trace(trace, inst, map, 0.3, 3);
    CHECK(conj.supports_match);
    CHECK(conj.max_discrepancy <= 1e-8);
  }
}

TEST_CASE("descent monitor: w(z^k) equals f(x^k)") {
  const auto inst = tiny(16, 32, 3, 77);
  const auto trace = run_rhtp(inst, 1.0, 0.3);
  const PsiMap map(Regularizer::uniform(1.0, 0.42, 0.3, 32));
  const auto rep = descent_monitor(trace, inst, map);
  REQUIRE(rep.w.size() == trace.records.size());
  CHECK(rep.max_identity_error <= 1e-10);
  CHECK_FALSE(rep.condition_known);
  for (std::size_t k = 0; k < rep.w.size(); ++k)
    CHECK(rep.w[k] == doctest::Approx(least_squares_objective(inst, trace.records[k].x.values))
                          .epsilon(1e-10));
}

TEST_CASE("d(u, v) vanishes for u = v and checks its hypotheses") {
  const Index n = 6;
  const Matrix phi = oracle::normalized_tight_frame(5, n, 3);
  const PsiMap map(Regularizer::uniform(2.0, 0.42, 0.3, n));
  Vector u = Vector::Zero(n);
  u[1] = 0.5;
  u[4] = -0.25;
  Vector w = Vector::Zero(n);
  w[1] = 1.0;
  DHypotheses hyp{0.2, true, 1.0};
  const auto r = d_inequality_check(u, u, w, 0.3, phi, map, hyp);
  CHECK(r.inner_lhs == 0.0);
  CHECK(r.norm_lhs == 0.0);
  CHECK(r.inner_ok);
  CHECK(r.norm_ok);
  // q = 2 has constant curvature gamma q eps^0 = 0.6.
  CHECK(r.l == doctest::Approx(0.6));
  CHECK(r.L == doctest::Approx(0.6));

  CHECK_THROWS_AS(d_inequality_check(u, u, w, 0.3, phi, map, {0.2, false, 1.0}), PreconditionError);
  CHECK_THROWS_AS(d_inequality_check(u, u, w, 0.3, phi, map, {1.0, true, 1.0}), PreconditionError);
  CHECK_THROWS_AS(d_inequality_check(u, u, w, 0.3, phi, map, {0.2, true, 0.1}), PreconditionError);
  CHECK_THROWS_AS(d_inequality_check(u, u, w, 5.0, phi, map, {0.2, true, 1.0}), PreconditionError);
}

TEST_CASE("iterate bounds hold on a noiseless run with exact constants") {
  const Matrix phi = oracle::normalized_tight_frame(8, 12, 17);
  const Vector x = oracle::sparse_signal(12, 2, 18);
  const ProblemInstance inst(phi, phi * x, 2, x, Vector::Zero(8));
  const auto delta = compute_deltas(phi, required_orders(2, 12));
  const PsiMap map(Regularizer::uniform(1.0, 0.42, 0.3, 12));
  const auto trace = run_rhtp(inst, 1.0, 0.3);
  const auto ib = iterate_bounds_check(trace, inst, map, 0.3, delta);
  CHECK(ib.checks > 0);
  CHECK(ib.B_k.size() == trace.records.size());
  CHECK(ib.stat.B == doctest::Approx(inst.y().norm() / std::sqrt(1.0 - delta.at(2))));
  if (ib.hypotheses_verified) CHECK(ib.violations.empty());
}

TEST_CASE("admissible step satisfies the descent condition") {
  const Matrix phi = oracle::normalized_tight_frame(8, 12, 7);
  const Vector x = oracle::sparse_signal(12, 2, 22);
  const ProblemInstance inst(phi, phi * x, 2, x, Vector::Zero(8));
  const auto delta = compute_deltas(phi, required_orders(2, 12));
  const PsiMap map(Regularizer::uniform(1.5, 0.42, 0.3, 12));
  const auto mu = admissible_mu(inst, map, delta, 2);
  REQUIRE(mu.has_value());
  const auto cb = curvature_for(inst, map, *mu, delta.at(2));
  CHECK(*mu * (1.0 + delta.at(4)) < (1.0 - cb.L) * (1.0 - cb.L) / (1.0 - cb.l));
  CHECK_THROWS_AS(admissible_mu(inst, map, delta, 2, 1.5), ArgumentError);
}

TEST_CASE("contraction check flags an artificially small rho") {
  const auto inst = tiny(16, 32, 3, 90);
  const auto trace = run_rhtp(inst, 1.0, 0.3);
  const PsiMap map(Regularizer::uniform(1.0, 0.42, 0.3, 32));
  AnalysisConstants c = compute_constants(flat_deltas(3, 0.1), {0.0, 0.1, true}, 0.3, 3);
  c.rho3K = 0.0;
  const auto rep = contraction_check(trace, inst, map, c);
  CHECK(rep.lhs.size() == trace.records.size() - 1);
  if (trace.records.size() > 1 && rep.lhs.front() > 0.0) CHECK_FALSE(rep.violations.empty());
}

TEST_CASE("analysis report has the documented shape") {
  const Matrix phi = oracle::normalized_tight_frame(8, 12, 10);
  const Vector x = oracle::sparse_signal(12, 2, 32);
  const ProblemInstance inst(phi, phi * x, 2, x, Vector::Zero(8));
  const auto delta = compute_deltas(phi, required_orders(2, 12));
  const PsiMap map(Regularizer::uniform(1.0, 0.42, 0.3, 12));
  const auto trace = run_rhtp(inst, 1.0, 0.3);
  const auto doc = analysis_report(inst, trace, map, 0.3, delta);
  for (const char* key : {"constants", "condition_flags", "violations", "predicted_iters", "observed_iters"})
    CHECK(doc.contains(key));
  CHECK(doc["violations"].is_array());
  CHECK(doc["observed_iters"]["iterations_used"] == trace.iterations_used);
  CHECK(doc["mode"] == "verified");
}
