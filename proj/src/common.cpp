#include "rhtp/common.hpp"

#include <algorithm>
#include <iterator>

namespace rhtp {

SupportSet::SupportSet(std::vector<Index> idx) : idx_(std::move(idx)) {
  std::sort(idx_.begin(), idx_.end());
  if (std::adjacent_find(idx_.begin(), idx_.end()) != idx_.end())
    throw ArgumentError("support set contains duplicate indices");
  if (!idx_.empty() && idx_.front() < 0)
    throw ArgumentError("support set contains a negative index");
}

SupportSet SupportSet::nonzeros(const Vector& v) {
  std::vector<Index> idx;
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) idx.push_back(i);
  SupportSet s;
  s.idx_ = std::move(idx);
  return s;
}

bool SupportSet::contains(Index i) const {
  return std::binary_search(idx_.begin(), idx_.end(), i);
}

SupportSet SupportSet::set_union(const SupportSet& o) const {
  SupportSet s;
  std::set_union(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(),
                 std::back_inserter(s.idx_));
  return s;
}

SupportSet SupportSet::set_intersection(const SupportSet& o) const {
  SupportSet s;
  std::set_intersection(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(),
                        std::back_inserter(s.idx_));
  return s;
}

SupportSet SupportSet::set_difference(const SupportSet& o) const {
  SupportSet s;
  std::set_difference(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(),
                      std::back_inserter(s.idx_));
  return s;
}

Matrix columns(const Matrix& phi, const SupportSet& support) {
  Matrix sub(phi.rows(), static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Index>(j)) = phi.col(support[j]);
  return sub;
}

Vector restrict_to(const Vector& v, const SupportSet& support) {
  Vector out(static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) out[static_cast<Index>(j)] = v[support[j]];
  return out;
}

Vector scatter(const Vector& vals, const SupportSet& support, Index n) {
  Vector out = Vector::Zero(n);
  for (std::size_t j = 0; j < support.size(); ++j) out[support[j]] = vals[static_cast<Index>(j)];
  return out;
}

}  // namespace rhtp
