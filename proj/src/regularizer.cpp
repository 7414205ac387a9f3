#include "rhtp/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rhtp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Regularizer::Regularizer(RegularizerKind kind, double q, double eps, Vector gamma)
    : kind_(kind), q_(q), eps_(eps), gamma_(std::move(gamma)) {
  validate();
}

Regularizer Regularizer::zero(Index n) {
  if (n < 1) throw ArgumentError("regularizer size must be positive");
  return Regularizer(RegularizerKind::zero, 0.0, 0.0, Vector::Zero(n));
}

Regularizer Regularizer::smooth_power(double q, double eps, Vector gamma) {
  return Regularizer(RegularizerKind::smooth_power, q, eps, std::move(gamma));
}

Regularizer Regularizer::uniform(double q, double eps, double gamma, Index n) {
  if (n < 1) throw ArgumentError("regularizer size must be positive");
  return smooth_power(q, eps, Vector::Constant(n, gamma));
}

void Regularizer::validate() const {
  if (gamma_.size() < 1) throw ArgumentError("regularizer needs at least one coordinate");
  for (Index j = 0; j < gamma_.size(); ++j)
    if (!std::isfinite(gamma_[j]) || gamma_[j] < 0.0)
      throw InvalidRegularizerError("regularizer weights must be finite and nonnegative");
  if (kind_ == RegularizerKind::zero) return;
  if (!(q_ > 0.0) || !std::isfinite(q_)) throw InvalidRegularizerError("smooth_power needs q > 0");
  if (!(eps_ > 0.0) || !std::isfinite(eps_))
    throw InvalidRegularizerError("smooth_power needs eps > 0");

  const double gmax = gamma_.maxCoeff();
  if (gmax == 0.0) return;
  const double sup = sup_curvature();
  if (!(gmax * sup < 1.0 - kValidityMargin)) {
    std::ostringstream msg;
    msg << "regularizer violates gamma * sup g'' < 1: gamma = " << gmax << ", sup g'' = " << sup
        << " (q = " << q_ << ", eps = " << eps_ << ")";
    throw InvalidRegularizerError(msg.str());
  }
  // Cross-check the analytic supremum on a log-spaced grid.
  for (int e = -80; e <= 80; ++e) {
    const double x = std::pow(10.0, e / 10.0);
    if (g_prime2(0, x) > sup * (1.0 + 1e-12) + 1e-300)
      throw InternalError("analytic curvature supremum disagrees with grid evaluation");
  }
}

double Regularizer::g_value(Index, double x) const {
  if (kind_ == RegularizerKind::zero) return 0.0;
  return std::pow(x * x + eps_ * eps_, 0.5 * q_);
}

double Regularizer::g_prime(Index, double x) const {
  if (kind_ == RegularizerKind::zero || x == 0.0) return 0.0;
  return q_ * x * std::pow(x * x + eps_ * eps_, 0.5 * q_ - 1.0);
}

double Regularizer::g_prime2(Index, double x) const {
  if (kind_ == RegularizerKind::zero) return 0.0;
  const double t = x * x;
  const double e2 = eps_ * eps_;
  return q_ * std::pow(t + e2, 0.5 * q_ - 2.0) * ((q_ - 1.0) * t + e2);
}

double Regularizer::sup_curvature() const {
  if (kind_ == RegularizerKind::zero) return 0.0;
  if (q_ > 2.0) return kInf;
  return q_ * std::pow(eps_, q_ - 2.0);
}

double Regularizer::sup_slope() const {
  if (kind_ == RegularizerKind::zero) return 0.0;
  if (q_ > 1.0) return kInf;
  if (q_ == 1.0) return 1.0;
  // g'' vanishes at x^2 = eps^2 / (1 - q), where |g'| peaks.
  const double x = eps_ / std::sqrt(1.0 - q_);
  return g_prime(0, x);
}

Regularizer::Range Regularizer::curvature_range(double lo, double hi) const {
  if (lo > hi) throw ArgumentError("curvature_range: empty interval");
  if (kind_ == RegularizerKind::zero) return {0.0, 0.0};
  double cand[5];
  int nc = 0;
  cand[nc++] = lo;
  cand[nc++] = hi;
  if (lo <= 0.0 && 0.0 <= hi) cand[nc++] = 0.0;
  if (q_ < 1.0) {
    const double xc = eps_ * std::sqrt(3.0 / (1.0 - q_));
    if (lo <= xc && xc <= hi) cand[nc++] = xc;
    if (lo <= -xc && -xc <= hi) cand[nc++] = -xc;
  }
  Range r{kInf, -kInf};
  for (int i = 0; i < nc; ++i) {
    const double v = g_prime2(0, cand[i]);
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  return r;
}

std::string Regularizer::describe() const {
  std::ostringstream s;
  if (kind_ == RegularizerKind::zero) {
    s << "zero";
  } else {
    s << "smooth_power(q=" << q_ << ", eps=" << eps_ << ", gamma=";
    if (gamma_.isConstant(gamma_[0])) s << gamma_[0];
    else s << "[per-coordinate]";
    s << ")";
  }
  return s.str();
}

// ---------------------------------------------------------------------------

PsiMap::PsiMap(Regularizer reg) : reg_(std::move(reg)) {
  // Spot check strict monotonicity on a grid for every distinct weight.
  Index last = -1;
  for (Index j = 0; j < reg_.size(); ++j) {
    if (last >= 0 && reg_.gamma(j) == reg_.gamma(last)) continue;
    last = j;
    double prev = psi(j, -1e4);
    for (int k = -400; k <= 400; ++k) {
      const double x = 25.0 * k;
      const double cur = psi(j, x + 1e-3);
      if (!(cur > prev)) throw InternalError("psi is not strictly increasing");
      prev = cur;
    }
  }
}

double PsiMap::psi(Index j, double x) const { return x - reg_.gamma(j) * reg_.g_prime(j, x); }

double PsiMap::psi_prime(Index j, double x) const {
  return 1.0 - reg_.gamma(j) * reg_.g_prime2(j, x);
}

double PsiMap::psi_inverse(Index j, double y, double tol) const {
  if (!(tol > 0.0)) throw ArgumentError("psi_inverse: tol must be positive");
  const double gamma = reg_.gamma(j);
  if (gamma == 0.0 || reg_.kind() == RegularizerKind::zero) return y;
  if (y == 0.0) return 0.0;
  if (!std::isfinite(y)) throw ArgumentError("psi_inverse: non-finite argument");

  // psi is odd, so solve for |y| and restore the sign.
  const double a = std::abs(y);
  const double sign = y < 0.0 ? -1.0 : 1.0;
  const double slope = reg_.sup_slope();
  double c = gamma * (std::isfinite(slope) ? slope : std::abs(reg_.g_prime(j, a)));
  c = std::max(c, 1e-3 * (1.0 + a));
  double lo = std::max(0.0, a - c), hi = a + c;
  int doublings = 0;
  while (!(psi(j, lo) <= a && psi(j, hi) >= a)) {
    if (++doublings > 200) throw InternalError("psi_inverse: bracket expansion failed");
    c *= 2.0;
    lo = std::max(0.0, a - c);
    hi = a + c;
  }

  double x = std::clamp(a + gamma * reg_.g_prime(j, a), lo, hi);
  for (int it = 0; it < 300; ++it) {
    const double f = psi(j, x) - a;
    if (f == 0.0) break;
    if (f < 0.0) lo = x;
    else hi = x;
    double next = x - f / psi_prime(j, x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      x = next;
      break;
    }
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      x = next;
      // One more Newton step polishes the last bit.
      const double g = psi(j, x) - a;
      const double polished = x - g / psi_prime(j, x);
      if (std::abs(psi(j, polished) - a) < std::abs(g)) x = polished;
      break;
    }
    x = next;
  }
  const double resid = std::abs(psi(j, x) - a);
  if (resid > tol && resid > 8.0 * std::numeric_limits<double>::epsilon() * a)
    throw InternalError("psi_inverse did not converge");
  return sign * x;
}

Vector PsiMap::Psi(const Vector& v) const {
  if (v.size() != size()) throw ArgumentError("Psi: dimension mismatch");
  Vector out(v.size());
  for (Index j = 0; j < v.size(); ++j) out[j] = psi(j, v[j]);
  return out;
}

Vector PsiMap::PsiInverse(const Vector& v, double tol) const {
  if (v.size() != size()) throw ArgumentError("PsiInverse: dimension mismatch");
  Vector out(v.size());
  for (Index j = 0; j < v.size(); ++j) out[j] = psi_inverse(j, v[j], tol);
  return out;
}

Vector PsiMap::m_diagonal(const Vector& z, const SupportSet& support) const {
  Vector out(static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const Index i = support[k];
    out[static_cast<Index>(k)] = psi_prime(i, psi_inverse(i, z[i]));
  }
  return out;
}

Vector PsiMap::m_diagonal(const Vector& z) const {
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) out[i] = psi_prime(i, psi_inverse(i, z[i]));
  return out;
}

CurvatureBounds curvature_bounds(const Regularizer& reg, const Vector& lo, const Vector& hi) {
  if (lo.size() != reg.size() || hi.size() != reg.size())
    throw ArgumentError("curvature_bounds: dimension mismatch");
  CurvatureBounds b{kInf, -kInf, true};
  for (Index i = 0; i < reg.size(); ++i) {
    const auto r = reg.curvature_range(lo[i], hi[i]);
    const double gam = reg.gamma(i);
    b.l = std::min(b.l, gam * r.min);
    b.L = std::max(b.L, gam * r.max);
  }
  b.L_below_one = b.L < 1.0;
  return b;
}

CurvatureBounds validate(const PsiMap& map, const Vector& E) {
  const Index n = map.size();
  if (E.size() != n) throw ArgumentError("validate: E must have one entry per coordinate");
  Vector lo(n), hi(n);
  for (Index i = 0; i < n; ++i) {
    if (!(E[i] >= 0.0)) throw ArgumentError("validate: E must be nonnegative");
    hi[i] = map.psi_inverse(i, E[i]);
    lo[i] = -hi[i];
  }
  auto b = curvature_bounds(map.regularizer(), lo, hi);
  if (!b.L_below_one) {
    std::ostringstream msg;
    msg << "regularizer curvature bound L = " << b.L << " is not below 1";
    throw InvalidRegularizerError(msg.str());
  }
  return b;
}

}  // namespace rhtp
