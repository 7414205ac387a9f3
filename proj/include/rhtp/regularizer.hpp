#pragma once

#include "rhtp/common.hpp"

#include <string>

namespace rhtp {

enum class RegularizerKind { zero, smooth_power };

/// Decomposable penalty J(x) = sum_j gamma_j g(x_j) with the smooth power
/// family g(x) = (x^2 + eps^2)^(q/2), or J = 0.
///
/// Construction enforces the conditions the RHTP analysis relies on:
/// g is C^2, g'(0) = 0, and gamma_j * sup_x g''(x) < 1 for every j (with a
/// margin of kValidityMargin). For q <= 2 the supremum of g'' is attained at
/// x = 0 and equals q * eps^(q-2); for q > 2 it is unbounded, so q > 2 is only
/// accepted with all gamma_j = 0.
class Regularizer {
 public:
  static constexpr double kValidityMargin = 1e-9;

  static Regularizer zero(Index n);
  static Regularizer smooth_power(double q, double eps, Vector gamma);
  static Regularizer uniform(double q, double eps, double gamma, Index n);

  RegularizerKind kind() const noexcept { return kind_; }
  double q() const noexcept { return q_; }
  double eps() const noexcept { return eps_; }
  double gamma(Index j) const { return gamma_[j]; }
  const Vector& gammas() const noexcept { return gamma_; }
  Index size() const noexcept { return gamma_.size(); }
  bool is_zero() const noexcept { return kind_ == RegularizerKind::zero || gamma_.isZero(0.0); }

  // The coordinate functions are shared; j only selects gamma_j.
  double g_value(Index j, double x) const;
  double g_prime(Index j, double x) const;
  double g_prime2(Index j, double x) const;

  /// sup over R of g'' (infinite for q > 2).
  double sup_curvature() const;
  /// sup over R of |g'| (infinite for q > 1).
  double sup_slope() const;

  struct Range {
    double min;
    double max;
  };
  /// Exact min and max of g'' on [lo, hi], from the interval endpoints and
  /// the stationary points of g'' (x = 0, and x^2 = 3 eps^2 / (1 - q) when
  /// q < 1).
  Range curvature_range(double lo, double hi) const;

  std::string describe() const;

 private:
  Regularizer(RegularizerKind kind, double q, double eps, Vector gamma);
  void validate() const;

  RegularizerKind kind_;
  double q_ = 0.0;
  double eps_ = 0.0;
  Vector gamma_;
};

/// The coordinatewise map psi_j(x) = x - gamma_j g'(x) and its inverse.
/// psi_j is strictly increasing and odd, with psi_j(0) = 0.
class PsiMap {
 public:
  static constexpr double kDefaultTol = 1e-12;

  explicit PsiMap(Regularizer reg);

  const Regularizer& regularizer() const noexcept { return reg_; }
  Index size() const noexcept { return reg_.size(); }

  double psi(Index j, double x) const;
  /// psi_j'(x) = 1 - gamma_j g''(x), always positive.
  double psi_prime(Index j, double x) const;
  /// Root of psi_j(x) = y: bracket expansion then safeguarded Newton, polished
  /// to machine precision. Guarantees |psi_j(x) - y| <= tol wherever double
  /// precision permits.
  double psi_inverse(Index j, double y, double tol = kDefaultTol) const;

  Vector Psi(const Vector& v) const;
  Vector PsiInverse(const Vector& v, double tol = kDefaultTol) const;

  /// M_ii(z) = psi_i'(psi_i^{-1}(z_i)) for i in support, in support order.
  Vector m_diagonal(const Vector& z, const SupportSet& support) const;
  /// Full diagonal of M(z).
  Vector m_diagonal(const Vector& z) const;

 private:
  Regularizer reg_;
};

/// l = min_i min_u gamma_i g''(u), L = max_i max_u gamma_i g''(u), the
/// extremes taken over u in [psi_i^{-1}(-E_i), psi_i^{-1}(E_i)].
struct CurvatureBounds {
  double l = 0.0;
  double L = 0.0;
  bool L_below_one = true;
};

/// Throws InvalidRegularizerError when L >= 1.
CurvatureBounds validate(const PsiMap& map, const Vector& E);
/// Same extremes on explicit u-intervals [lo_i, hi_i]; no mapping through
/// psi^{-1}.
CurvatureBounds curvature_bounds(const Regularizer& reg, const Vector& lo, const Vector& hi);

}  // namespace rhtp
