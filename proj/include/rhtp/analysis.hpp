#pragma once

#include "rhtp/algorithms.hpp"
#include "rhtp/regularizer.hpp"
#include "rhtp/sensing.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rhtp::analysis {

// Restricted isometry constants keyed by order. Checkers only assert a
// theorem when every constant they use is exact ("verified" mode); with
// sampled lower bounds they report without asserting.
struct DeltaTable {
  std::map<Index, RicEstimate> by_order;

  double at(Index s) const;
  bool has(Index s) const { return by_order.count(s) != 0; }
  bool exact(std::initializer_list<Index> orders) const;
  bool all_exact() const;
};

/// Exact enumeration where C(n, s) fits the budget, sampled lower bounds
/// otherwise.
DeltaTable compute_deltas(const Matrix& phi, const std::vector<Index>& orders,
                          std::uint64_t samples = 20000, std::uint64_t seed = 0);

/// The orders the constants need: 2, K, 2K, 2K+1, 3K (capped at n).
std::vector<Index> required_orders(Index K, Index n);

struct MuWindow {
  double lower = 0.0;  // (1 - 1/sqrt3)(1 - l) / (1 - delta_3K)
  double upper = 0.0;  // (1 - L)^2 / ((1 - l)(1 + delta_2K))
  bool empty = true;
};

struct AnalysisConstants {
  Index K = 0;
  double mu = 0.0;
  DeltaTable delta;
  double l = 0.0;
  double L = 0.0;
  std::map<Index, double> mu_prime;  // 1 - mu (1 - delta_s) / (1 - l)
  std::map<Index, double> tau;
  double rho3K = 0.0;
  double kappa3K = 0.0;
  MuWindow window;
  /// mu (1 + delta_2K) < (1 - L)^2 / (1 - l)
  bool descent_condition = false;
  /// 0 < mu'_3K < 1/sqrt(3), the sufficient condition for rho_3K < 1.
  bool rho_flag_valid = false;

  double mu_prime_at(Index s) const { return mu_prime.at(s); }
  double tau_at(Index s) const { return tau.at(s); }
  bool rho_below_one() const { return rho3K >= 0.0 && rho3K < 1.0; }
  bool exact() const { return delta.all_exact(); }
};

/// Throws ArgumentError when a required delta is >= 1 or missing.
AnalysisConstants compute_constants(const DeltaTable& delta, const CurvatureBounds& curvature,
                                    double mu, Index K);

// ---------------------------------------------------------------------------
// Iterate bounds

/// Iteration-independent bounds: B = ||y|| / sqrt(1 - delta_K),
/// D = mu max_i ||phi_i|| ||y||, C_i = max_{|u| <= B} (1 - gamma_i g''(u)),
/// E_i = max(B C_i, D).
struct StaticBounds {
  double B = 0.0;
  double D = 0.0;
  Vector C;
  Vector E;
};

StaticBounds static_bounds(const ProblemInstance& inst, const Regularizer& reg, double mu,
                           double delta_K);

/// l and L over [psi_i^{-1}(-E_i), psi_i^{-1}(E_i)], the quantities the
/// descent condition is stated with.
CurvatureBounds curvature_for(const ProblemInstance& inst, const PsiMap& map, double mu,
                              double delta_K);

struct BoundViolation {
  int k = 0;
  Index i = 0;
  std::string quantity;  // "x", "z" or "x_hat"
  double value = 0.0;
  double bound = 0.0;
};

struct IterateBounds {
  StaticBounds stat;
  std::vector<double> B_k;
  std::vector<double> D_k;
  std::vector<Vector> C_k;
  std::vector<Vector> E_k;
  std::vector<double> F_k;
  std::vector<double> G_k;
  std::vector<BoundViolation> violations;
  bool hypotheses_verified = false;  // exact delta_K, delta_2K, delta_2K+1 < 1
  std::size_t checks = 0;
};

IterateBounds iterate_bounds_check(const IterationTrace& trace, const ProblemInstance& inst,
                                   const PsiMap& map, double mu, const DeltaTable& delta);

// ---------------------------------------------------------------------------
// Conjugate dynamics

struct ConjugateTrace {
  std::vector<Vector> z;      // Psi(x^k)
  std::vector<Vector> z_sim;  // independently simulated z-domain iterates
  std::vector<SupportSet> sim_supports;
  double max_discrepancy = 0.0;  // max_k ||Psi(x^k) - z_sim^k||_inf
  bool supports_match = true;
};

/// Maps the trace through Psi and, separately, runs the z-domain iteration
///   z <- argmin_{supp subset S} w,  S = supp H_K(z - mu M(z) grad w(z)),
/// from Psi(x^0) for the same number of steps.
ConjugateTrace conjugate_trace(const IterationTrace& trace, const ProblemInstance& inst,
                               const PsiMap& map, double mu, Index K);

// ---------------------------------------------------------------------------
// Descent

struct DescentReport {
  std::vector<double> w;  // w(z^k) = f(Psi^{-1}(z^k))
  std::vector<int> violations;
  double max_identity_error = 0.0;  // max_k |w(z^k) - f(x^k)| / max(f(x^k), w(z^0))
  bool condition_known = false;
  bool condition_held = false;
  bool eventually_stable = false;  // trace ended on a repeated support
};

DescentReport descent_monitor(const IterationTrace& trace, const ProblemInstance& inst,
                              const PsiMap& map, const AnalysisConstants* constants = nullptr);

// ---------------------------------------------------------------------------
// Contraction

struct ContractionReport {
  std::vector<double> lhs;  // ||z^{k+1} - z*||
  std::vector<double> rhs;  // rho_3K ||z^k - z*|| + tau_2K ||e||
  std::vector<int> violations;
  double worst_ratio = 0.0;
  bool hypotheses_verified = false;
};

inline constexpr double kContractionSlack = 1e-10;

ContractionReport contraction_check(const IterationTrace& trace, const ProblemInstance& inst,
                                    const PsiMap& map, const AnalysisConstants& constants);

// ---------------------------------------------------------------------------
// d(u, v) inequalities

struct DHypotheses {
  double delta_T = 0.0;  // delta of order |T|, T = supp u | supp v | supp w
  bool delta_exact = false;
  double E = 0.0;  // |u_i|, |v_i| <= E; l and L are taken over [psi^{-1}(-E), psi^{-1}(E)]
};

struct DInequalityResult {
  double l = 0.0;
  double L = 0.0;
  double rho_prime = 0.0;
  double inner_lhs = 0.0, inner_rhs = 0.0;
  double norm_lhs = 0.0, norm_rhs = 0.0;
  bool inner_ok = false;
  bool norm_ok = false;
};

/// d(u, v) = v - u - rho Phi^t Phi (Psi^{-1}(v) - Psi^{-1}(u)). Throws
/// PreconditionError when the hypotheses do not hold.
DInequalityResult d_inequality_check(const Vector& u, const Vector& v, const Vector& w, double rho,
                                     const Matrix& phi, const PsiMap& map, const DHypotheses& hyp);

// ---------------------------------------------------------------------------
// Iteration counts

struct IterationPrediction {
  std::optional<int> signal_dependent;  // absent when tau_1 ||e|| >= |z*_min|
  int universal = 0;                    // ceil(c K)
  double c = 0.0;
  double tau1 = 0.0;
};

/// Throws InapplicableError when rho_3K >= 1.
IterationPrediction predict_iterations(const AnalysisConstants& constants, const Vector& z0,
                                       const Vector& z_star, double e_norm);

/// r_{p+q}(z*) > rho^{k'} ||r(z*)_{p+1..K}|| + kappa ||e||  (1-based p, q).
bool support_growth_condition(const AnalysisConstants& constants, const Vector& z_star, Index p,
                              Index q, int k_prime, double e_norm);

/// First j with support(x^j) == target, if any.
std::optional<int> first_support_hit(const IterationTrace& trace, const SupportSet& target);

// ---------------------------------------------------------------------------
// Projection lemmas

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

/// |x^t B y|^2 <= ((lM - lm)/(lM + lm))^2 (x^t B x)(y^t B y) for x orthogonal
/// to y, relative tolerance 1e-12.
InequalityCheck wielandt_check(const Matrix& B, const Vector& x, const Vector& y);

/// ||P_S y|| <= delta ||y|| for y = Phi_Lambda x_Lambda, S disjoint from
/// Lambda, delta of order |S| + |Lambda|.
InequalityCheck projection_bound_check(const Matrix& phi, const SupportSet& S,
                                       const SupportSet& lambda, const Vector& x, double delta);

/// |phi_i^t (I - P_S) y| <= delta ||(I - P_S) phi_i|| ||y|| for every i outside
/// S and Lambda, delta of order |S| + |Lambda| + 1. lhs is the worst ratio
/// |phi_i^t (I - P_S) y| / (||(I - P_S) phi_i|| ||y||), rhs is delta.
InequalityCheck correlation_bound_check(const Matrix& phi, const SupportSet& S,
                                        const SupportSet& lambda, const Vector& x, double delta);

// ---------------------------------------------------------------------------
// Helpers

/// Largest step size (scaled by `safety`) with
/// mu (1 + delta_order) (1 - l) < safety (1 - L)^2, accounting for the
/// dependence of E (and so l, L) on mu. order = 0 selects 2K, the descent
/// condition. Returns nullopt when no positive step qualifies.
std::optional<double> admissible_mu(const ProblemInstance& inst, const PsiMap& map,
                                    const DeltaTable& delta, Index K, double safety = 0.9,
                                    Index order = 0);

}  // namespace rhtp::analysis
