#pragma once
// Test-side reference computations. None of these call into the library's
// numerical kernels, so agreement with the library is a real cross-check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Idx = Eigen::Index;

inline Mat gaussian(Idx rows, Idx cols, double sd, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, sd);
  Mat a(rows, cols);
  for (Idx j = 0; j < cols; ++j)
    for (Idx i = 0; i < rows; ++i) a(i, j) = nd(gen);
  return a;
}

inline Vec gaussian_vec(Idx n, std::uint64_t seed) { return gaussian(n, 1, 1.0, seed).col(0); }

/// K-sparse vector with a uniformly drawn support and N(0,1) entries.
inline Vec sparse_signal(Idx n, Idx K, std::uint64_t seed, std::vector<Idx>* support = nullptr) {
  std::mt19937_64 gen(seed);
  std::vector<Idx> idx(static_cast<std::size_t>(n));
  for (Idx i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), gen);
  idx.resize(static_cast<std::size_t>(K));
  std::sort(idx.begin(), idx.end());
  std::normal_distribution<double> nd;
  Vec x = Vec::Zero(n);
  for (Idx i : idx) {
    double v = nd(gen);
    while (std::abs(v) < 1e-3) v = nd(gen);
    x[i] = v;
  }
  if (support) *support = idx;
  return x;
}

inline Mat select(const Mat& phi, const std::vector<Idx>& s) {
  Mat out(phi.rows(), static_cast<Idx>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) out.col(static_cast<Idx>(j)) = phi.col(s[j]);
  return out;
}

/// (A^t A)^{-1} A^t y by LU of the Gram matrix.
inline Vec normal_equations(const Mat& phi, const Vec& y, const std::vector<Idx>& s) {
  const Mat A = select(phi, s);
  const Mat G = A.transpose() * A;
  return G.fullPivLu().solve(A.transpose() * y);
}

/// Calls f on every size-k subset of {0..n-1}, by recursion.
inline void for_each_subset(Idx n, Idx k, const std::function<void(const std::vector<Idx>&)>& f) {
  std::vector<Idx> cur;
  std::function<void(Idx)> rec = [&](Idx start) {
    if (static_cast<Idx>(cur.size()) == k) {
      f(cur);
      return;
    }
    for (Idx i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

/// Closed-form eigenvalues of [[a, b], [b, c]].
inline std::pair<double, double> eig2(double a, double b, double c) {
  const double m = 0.5 * (a + c);
  const double r = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return {m - r, m + r};
}

/// delta_2 by enumerating column pairs with 2x2 closed-form eigenvalues.
inline double ric2(const Mat& phi) {
  double d = 0.0;
  for (Idx i = 0; i < phi.cols(); ++i)
    for (Idx j = i + 1; j < phi.cols(); ++j) {
      const auto [lo, hi] =
          eig2(phi.col(i).squaredNorm(), phi.col(i).dot(phi.col(j)), phi.col(j).squaredNorm());
      d = std::max({d, hi - 1.0, 1.0 - lo});
    }
  return d;
}

/// delta_s through singular values of every column subset.
inline double ric_svd(const Mat& phi, Idx s) {
  double d = 0.0;
  for_each_subset(phi.cols(), s, [&](const std::vector<Idx>& S) {
    Eigen::JacobiSVD<Mat> svd(select(phi, S));
    const auto sv = svd.singularValues();
    const double hi = sv.maxCoeff() * sv.maxCoeff();
    const double lo = sv.minCoeff() * sv.minCoeff();
    d = std::max({d, hi - 1.0, 1.0 - lo});
  });
  return d;
}

/// Support of the best K-term least-squares fit, by exhaustive search.
inline std::vector<Idx> best_support(const Mat& phi, const Vec& y, Idx K, double* best_res = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<Idx> arg;
  for_each_subset(phi.cols(), K, [&](const std::vector<Idx>& S) {
    const Vec c = normal_equations(phi, y, S);
    const double r = (y - select(phi, S) * c).norm();
    if (r < best) {
      best = r;
      arg = S;
    }
  });
  if (best_res) *best_res = best;
  return arg;
}

// Smooth power family, written out independently of the library.
inline double gp(double q, double eps, double x) {
  return q * x * std::pow(x * x + eps * eps, q / 2.0 - 1.0);
}
inline double gpp(double q, double eps, double x) {
  const double s = x * x + eps * eps;
  return q * std::pow(s, q / 2.0 - 2.0) * ((q - 1.0) * x * x + eps * eps);
}
inline double psi(double q, double eps, double gamma, double x) { return x - gamma * gp(q, eps, x); }

/// Central difference.
inline double fd(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Inverse of psi by plain bisection on a wide bracket.
inline double psi_inverse_bisect(double q, double eps, double gamma, double y) {
  double lo = -1.0, hi = 1.0;
  while (psi(q, eps, gamma, lo) > y) lo *= 2.0;
  while (psi(q, eps, gamma, hi) < y) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (psi(q, eps, gamma, mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Columns of Q from the QR of a Gaussian matrix, rescaled to unit norm
/// (m <= n: the rows of an orthogonal n x n matrix, columns normalized).
inline Mat normalized_tight_frame(Idx m, Idx n, std::uint64_t seed) {
  const Mat g = gaussian(n, n, 1.0, seed);
  Eigen::HouseholderQR<Mat> qr(g);
  const Mat Q = qr.householderQ();
  Mat phi = Q.topRows(m);
  for (Idx j = 0; j < n; ++j) phi.col(j).normalize();
  return phi;
}

}  // namespace oracle
