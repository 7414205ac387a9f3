#include "rhtp/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace rhtp {

ProblemInstance::ProblemInstance(Matrix phi, Vector y, Index K)
    : phi_(std::move(phi)), y_(std::move(y)), K_(K) {
  check_dims();
}

ProblemInstance::ProblemInstance(Matrix phi, Vector y, Index K, Vector x_star, Vector e,
                                 const Tolerances& tol)
    : phi_(std::move(phi)), y_(std::move(y)), K_(K), x_star_(std::move(x_star)), e_(std::move(e)) {
  check_dims();
  if (x_star_->size() != n()) throw ArgumentError("x_star length does not match phi columns");
  if (e_->size() != m()) throw ArgumentError("noise length does not match phi rows");
  Index nnz = 0;
  for (Index i = 0; i < n(); ++i) nnz += (*x_star_)[i] != 0.0;
  if (nnz > K_) throw ArgumentError("x_star has more than K nonzero entries");
  const Vector model = phi_ * *x_star_ + *e_;
  for (Index i = 0; i < m(); ++i) {
    const double scale = std::max(1.0, std::abs(y_[i]));
    if (std::abs(model[i] - y_[i]) > tol.consistency * scale)
      throw ArgumentError("y differs from phi * x_star + e");
  }
}

void ProblemInstance::check_dims() const {
  if (phi_.rows() < 1 || phi_.cols() < 1) throw ArgumentError("phi must be nonempty");
  if (y_.size() != phi_.rows()) throw ArgumentError("y length does not match phi rows");
  if (phi_.rows() > phi_.cols()) throw ArgumentError("m must not exceed n");
  if (K_ < 1 || K_ > phi_.rows()) throw ArgumentError("K must satisfy 1 <= K <= m");
}

bool ProblemInstance::noiseless() const { return e_ && e_->isZero(0.0); }

SparseIterate hard_threshold(const Vector& v, Index K) {
  const Index n = v.size();
  if (K < 1 || K > n) throw ArgumentError("hard_threshold: K must satisfy 1 <= K <= n");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto before = [&v](Index a, Index b) {
    const double fa = std::abs(v[a]), fb = std::abs(v[b]);
    return fa > fb || (fa == fb && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + K, order.end(), before);
  order.resize(static_cast<std::size_t>(K));
  SupportSet support(std::move(order));
  Vector values = Vector::Zero(n);
  for (Index i : support) values[i] = v[i];
  return {std::move(values), std::move(support)};
}

namespace {

// Coefficients of the least-squares fit of y on phi_S.
Vector solve_on_support(const Matrix& phi, const Vector& y, const SupportSet& support,
                        const Tolerances& tol) {
  if (!support.fits(phi.cols())) throw ArgumentError("support index out of range");
  const Index k = static_cast<Index>(support.size());
  if (k > phi.rows())
    throw SingularityError("support larger than the number of measurements");
  const Matrix sub = columns(phi, support);
  Eigen::ColPivHouseholderQR<Matrix> qr(sub);
  const auto& r = qr.matrixR();
  const double rmax = std::abs(r(0, 0));
  const double rmin = std::abs(r(k - 1, k - 1));
  if (!(rmin > 0.0) || rmax / rmin > tol.max_condition) {
    std::ostringstream msg;
    msg << "restricted least squares: submatrix of " << k
        << " columns is rank deficient (condition estimate "
        << (rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity()) << ")";
    throw SingularityError(msg.str());
  }
  return qr.solve(y);
}

}  // namespace

SparseIterate restricted_least_squares(const Matrix& phi, const Vector& y,
                                       const SupportSet& support, const Tolerances& tol) {
  if (y.size() != phi.rows()) throw ArgumentError("y length does not match phi rows");
  if (support.empty()) return {Vector::Zero(phi.cols()), support};
  const Vector coef = solve_on_support(phi, y, support, tol);
  return {scatter(coef, support, phi.cols()), support};
}

SparseIterate restricted_least_squares(const ProblemInstance& inst, const SupportSet& support,
                                       const Tolerances& tol) {
  return restricted_least_squares(inst.phi(), inst.y(), support, tol);
}

Vector projection_onto_span(const Matrix& phi, const SupportSet& support, const Vector& v,
                            const Tolerances& tol) {
  if (v.size() != phi.rows()) throw ArgumentError("vector length does not match phi rows");
  if (support.empty()) return Vector::Zero(v.size());
  const Vector coef = solve_on_support(phi, v, support, tol);
  return columns(phi, support) * coef;
}

Arrangement nonincreasing_arrangement(const Vector& v) {
  Arrangement a;
  a.perm.resize(static_cast<std::size_t>(v.size()));
  std::iota(a.perm.begin(), a.perm.end(), Index{0});
  std::stable_sort(a.perm.begin(), a.perm.end(),
                   [&v](Index x, Index y) { return std::abs(v[x]) > std::abs(v[y]); });
  a.r.resize(v.size());
  for (Index j = 0; j < v.size(); ++j) a.r[j] = std::abs(v[a.perm[static_cast<std::size_t>(j)]]);
  return a;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // r * num / i is exact at every step; guard the multiplication.
    if (r > std::numeric_limits<std::uint64_t>::max() / num)
      return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

namespace {

double isometry_defect(const Matrix& gram, const std::vector<Index>& idx, Matrix& work) {
  const Index s = static_cast<Index>(idx.size());
  for (Index a = 0; a < s; ++a)
    for (Index b = 0; b < s; ++b) work(a, b) = gram(idx[a], idx[b]);
  if (s == 1) return std::abs(work(0, 0) - 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(work, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(ev[s - 1] - 1.0, 1.0 - ev[0]);
}

}  // namespace

RicEstimate estimate_ric(const Matrix& phi, Index s, RicMode mode, std::uint64_t samples,
                         std::uint64_t seed) {
  const Index n = phi.cols();
  if (s < 1 || s > n) throw ArgumentError("estimate_ric: order must satisfy 1 <= s <= n");
  const Matrix gram = phi.transpose() * phi;
  Matrix work(s, s);
  RicEstimate est;

  if (mode == RicMode::exact) {
    const std::uint64_t count = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s));
    if (count > kRicExactBudget) {
      std::ostringstream msg;
      msg << "estimate_ric: C(" << n << ", " << s << ") = " << count
          << " supports exceeds the exact-mode budget of " << kRicExactBudget;
      throw BudgetError(msg.str());
    }
    std::vector<Index> idx(static_cast<std::size_t>(s));
    std::iota(idx.begin(), idx.end(), Index{0});
    est.exact = true;
    while (true) {
      est.value = std::max(est.value, isometry_defect(gram, idx, work));
      ++est.supports_evaluated;
      // Next combination in lexicographic order.
      Index i = s - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - s + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (Index j = i + 1; j < s; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return est;
  }

  if (samples == 0) throw ArgumentError("estimate_ric: randomized mode needs samples > 0");
  std::mt19937_64 rng(seed);
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::vector<Index> idx(static_cast<std::size_t>(s));
  for (std::uint64_t t = 0; t < samples; ++t) {
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index j = 0; j < s; ++j) {
      std::uniform_int_distribution<Index> pick(j, n - 1);
      std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(rng))]);
      idx[static_cast<std::size_t>(j)] = pool[static_cast<std::size_t>(j)];
    }
    std::sort(idx.begin(), idx.end());
    est.value = std::max(est.value, isometry_defect(gram, idx, work));
    ++est.supports_evaluated;
  }
  return est;
}

}  // namespace rhtp
