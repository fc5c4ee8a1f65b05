#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace peergroups {

/// Binary symmetric adjacency over children without self-loops.
class PeerNetwork {
 public:
  PeerNetwork() = default;
  explicit PeerNetwork(std::size_t n) : n_(n), adj_(n * n, 0) {}

  static PeerNetwork from_edges(std::size_t n,
                                std::span<const std::pair<std::size_t, std::size_t>> edges);

  std::size_t size() const noexcept { return n_; }
  bool has_edge(std::size_t i, std::size_t j) const noexcept { return adj_[i * n_ + j] != 0; }

  /// Adds or removes the undirected edge {i, j}; self-loops are ignored.
  void set_edge(std::size_t i, std::size_t j, bool present = true) noexcept;

  std::size_t degree(std::size_t i) const noexcept;
  std::size_t edge_count() const noexcept;
  std::vector<std::size_t> neighbors(std::size_t i) const;
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  friend bool operator==(const PeerNetwork&, const PeerNetwork&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;
};

/// Peer groups over children 0..n-1. Groups may overlap (SCM) or form a
/// partition (BE-CD); a child may belong to no group.
class GroupAssignment {
 public:
  GroupAssignment() = default;
  /// Members of each group are sorted and deduplicated.
  GroupAssignment(std::size_t n_children, std::vector<std::vector<std::size_t>> groups);

  std::size_t n_children() const noexcept { return membership_.size(); }
  const std::vector<std::vector<std::size_t>>& groups() const noexcept { return groups_; }
  /// Indices of the groups containing each child.
  const std::vector<std::vector<std::size_t>>& membership() const noexcept { return membership_; }

 private:
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::vector<std::size_t>> membership_;
};

/// Proportion of children belonging to at least one group with at least
/// `min_group_size` members.
double membership_statistic(const GroupAssignment& groups, std::size_t n_children,
                            std::size_t min_group_size = 3);

/// Pair-counting agreement between two groupings: fraction of child pairs on
/// which "share at least one group" agrees. 1 for identical co-membership.
double comembership_agreement(const GroupAssignment& a, const GroupAssignment& b);

}  // namespace peergroups
