#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace rhtp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error taxonomy. Everything derives from rhtp::Error so callers that do not
// care about the distinction can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArgumentError : Error {
  using Error::Error;
};
struct SingularityError : Error {
  using Error::Error;
};
struct BudgetError : Error {
  using Error::Error;
};
struct InternalError : Error {
  using Error::Error;
};
struct InvalidRegularizerError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct InapplicableError : Error {
  using Error::Error;
};

/// Strictly increasing set of 0-based column indices.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::initializer_list<Index> idx) : SupportSet(std::vector<Index>(idx)) {}
  /// Sorts and validates; duplicates are rejected rather than merged.
  explicit SupportSet(std::vector<Index> idx);

  /// Indices of the nonzero entries of v.
  static SupportSet nonzeros(const Vector& v);

  const std::vector<Index>& indices() const noexcept { return idx_; }
  std::size_t size() const noexcept { return idx_.size(); }
  bool empty() const noexcept { return idx_.empty(); }
  Index operator[](std::size_t i) const { return idx_[i]; }
  auto begin() const noexcept { return idx_.begin(); }
  auto end() const noexcept { return idx_.end(); }

  bool contains(Index i) const;
  /// True when every index is < n.
  bool fits(Index n) const noexcept { return idx_.empty() || idx_.back() < n; }

  SupportSet set_union(const SupportSet& o) const;
  SupportSet set_intersection(const SupportSet& o) const;
  SupportSet set_difference(const SupportSet& o) const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> idx_;
};

/// A length-n vector together with the set of coordinates allowed to be
/// nonzero. Entries on the support may still be zero.
struct SparseIterate {
  Vector values;
  SupportSet support;

  static SparseIterate zeros(Index n) { return {Vector::Zero(n), {}}; }
};

/// Columns of phi selected by support, in support order.
Matrix columns(const Matrix& phi, const SupportSet& support);

/// Entries of v selected by support.
Vector restrict_to(const Vector& v, const SupportSet& support);

/// Length-n vector with `vals` scattered onto `support`.
Vector scatter(const Vector& vals, const SupportSet& support, Index n);

}  // namespace rhtp
