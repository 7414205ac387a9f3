#pragma once

#include "rhtp/common.hpp"

#include <cstdint>
#include <optional>
#include <utility>

namespace rhtp {

/// Numerical tolerances used by the dense substrate. Defaults are roughly
/// 100x double-precision accumulation error at m, n <= 1024.
struct Tolerances {
  double orthogonality = 1e-10;
  double consistency = 1e-12;
  double max_condition = 1e12;
};

/// y = phi * x_star + e, with phi of size m x n.
class ProblemInstance {
 public:
  /// Library mode: no ground truth. K is the sparsity target.
  ProblemInstance(Matrix phi, Vector y, Index K);
  /// Experiment mode. Checks y == phi * x_star + e entrywise.
  ProblemInstance(Matrix phi, Vector y, Index K, Vector x_star, Vector e,
                  const Tolerances& tol = {});

  const Matrix& phi() const noexcept { return phi_; }
  const Vector& y() const noexcept { return y_; }
  const std::optional<Vector>& x_star() const noexcept { return x_star_; }
  const std::optional<Vector>& e() const noexcept { return e_; }
  Index n() const noexcept { return phi_.cols(); }
  Index m() const noexcept { return phi_.rows(); }
  Index K() const noexcept { return K_; }

  /// True when e is present and exactly zero.
  bool noiseless() const;

 private:
  void check_dims() const;

  Matrix phi_;
  Vector y_;
  Index K_;
  std::optional<Vector> x_star_;
  std::optional<Vector> e_;
};

/// Keeps the K largest-magnitude entries of v. Equal magnitudes are ordered by
/// index, lower first, so the result is deterministic.
SparseIterate hard_threshold(const Vector& v, Index K);

/// Minimizer of ||y - phi z||_2 over z supported on `support`, via
/// column-pivoted Householder QR of phi_support.
SparseIterate restricted_least_squares(const Matrix& phi, const Vector& y,
                                       const SupportSet& support,
                                       const Tolerances& tol = {});
SparseIterate restricted_least_squares(const ProblemInstance& inst,
                                       const SupportSet& support,
                                       const Tolerances& tol = {});

/// Orthogonal projection of v onto span{phi_i : i in support}.
Vector projection_onto_span(const Matrix& phi, const SupportSet& support,
                            const Vector& v, const Tolerances& tol = {});

struct Arrangement {
  Vector r;                 // |v| sorted nonincreasing
  std::vector<Index> perm;  // r[j] == |v[perm[j]]|
};

Arrangement nonincreasing_arrangement(const Vector& v);

enum class RicMode { exact, randomized };

struct RicEstimate {
  double value = 0.0;
  bool exact = false;             // false: lower bound from sampled supports
  std::uint64_t supports_evaluated = 0;
};

/// Largest number of supports exact mode will enumerate.
inline constexpr std::uint64_t kRicExactBudget = 1'000'000;

/// Restricted isometry constant of order s:
///   max over |S| = s of max(lambda_max(G_S) - 1, 1 - lambda_min(G_S)).
/// Exact mode enumerates all C(n, s) supports and throws BudgetError above
/// kRicExactBudget. Randomized mode samples `samples` supports from `seed`.
RicEstimate estimate_ric(const Matrix& phi, Index s, RicMode mode = RicMode::exact,
                         std::uint64_t samples = 10000, std::uint64_t seed = 0);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

}  // namespace rhtp
