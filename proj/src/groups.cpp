#include "penreg/groups.hpp"

#include <unordered_map>

namespace penreg {

GroupStructure GroupStructure::from_labels(std::span<const int> labels) {
  GroupStructure out;
  std::unordered_map<int, Index> dense;
  out.group_of_.reserve(labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    auto [it, inserted] = dense.try_emplace(labels[j], static_cast<Index>(out.members_.size()));
    if (inserted) out.members_.emplace_back();
    out.members_[static_cast<std::size_t>(it->second)].push_back(static_cast<Index>(j));
    out.group_of_.push_back(it->second);
  }
  return out;
}

GroupStructure GroupStructure::single(Index p) {
  std::vector<int> labels(static_cast<std::size_t>(p), 0);
  return from_labels(labels);
}

GroupStructure GroupStructure::singletons(Index p) {
  std::vector<int> labels(static_cast<std::size_t>(p));
  for (std::size_t j = 0; j < labels.size(); ++j) labels[j] = static_cast<int>(j);
  return from_labels(labels);
}

std::vector<int> GroupStructure::dense_labels() const {
  std::vector<int> out;
  out.reserve(group_of_.size());
  for (Index g : group_of_) out.push_back(static_cast<int>(g));
  return out;
}

}  // namespace penreg
