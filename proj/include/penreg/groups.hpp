#pragma once

#include "penreg/types.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace penreg {

/// Partition of the predictors into K disjoint groups.
///
/// Arbitrary integer labels are remapped to dense ids 0..K-1 in order of
/// first appearance, so group l always refers to the l-th distinct label
/// met when scanning predictors left to right.
class GroupStructure {
 public:
  GroupStructure() = default;

  static GroupStructure from_labels(std::span<const int> labels);

  /// One group holding all p predictors.
  static GroupStructure single(Index p);

  /// Every predictor in its own group.
  static GroupStructure singletons(Index p);

  Index num_groups() const { return static_cast<Index>(members_.size()); }
  Index num_predictors() const { return static_cast<Index>(group_of_.size()); }
  Index size(Index group) const {
    return static_cast<Index>(members_[static_cast<std::size_t>(group)].size());
  }
  const IndexList& members(Index group) const {
    return members_[static_cast<std::size_t>(group)];
  }
  Index group_of(Index predictor) const {
    return group_of_[static_cast<std::size_t>(predictor)];
  }

  /// Dense label (0..K-1) per predictor.
  std::vector<int> dense_labels() const;

  bool operator==(const GroupStructure&) const = default;

 private:
  std::vector<IndexList> members_;
  IndexList group_of_;
};

/// Euclidean norm of the coordinates of `v` belonging to `group`.
template <typename Derived>
typename Derived::Scalar block_norm(const Eigen::MatrixBase<Derived>& v,
                                    const GroupStructure& groups, Index group) {
  using Scalar = typename Derived::Scalar;
  Scalar sum{0};
  for (Index j : groups.members(group)) sum += v(j) * v(j);
  return std::sqrt(sum);
}

}  // namespace penreg
