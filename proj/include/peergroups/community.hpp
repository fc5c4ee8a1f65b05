#pragma once

// Modularity maximization and the backbone + community detection pipeline.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "peergroups/backbone.hpp"
#include "peergroups/network.hpp"
#include "peergroups/recall.hpp"
#include "peergroups/rng.hpp"

namespace peergroups::community {

/// Mutually exclusive community labels, contiguous from 0 in order of first
/// appearance.
class Partition {
 public:
  Partition() = default;
  /// Relabels to canonical form.
  explicit Partition(std::vector<int> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t n_communities() const noexcept { return n_communities_; }
  int operator[](std::size_t i) const noexcept { return labels_[i]; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  std::vector<std::vector<std::size_t>> communities() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  std::size_t n_communities_ = 0;
};

/// Newman-Girvan modularity; 0 for a graph without edges.
double modularity(const PeerNetwork& n, const Partition& part);

/// 4m^2 Q as an exact integer: sum over communities of 4 m L_c - K_c^2,
/// with L_c the internal edges and K_c the total degree.
std::int64_t modularity_numerator(const PeerNetwork& n, const Partition& part);

struct ModularityOptions {
  std::size_t restarts = 50;
  /// Graphs with at most this many non-isolated vertices are solved exactly.
  std::size_t exact_max_n = 12;
  /// Skip the exact path regardless of size.
  bool force_heuristic = false;
};

/// Best partition found. Isolated vertices are singletons. Among partitions
/// with equal modularity the lexicographically smallest labeling wins.
Partition maximize_modularity(const PeerNetwork& n, RngSeed seed, const ModularityOptions& options = {});

/// Exhaustive branch-and-bound over set partitions. Exact for any size, but
/// exponential; intended for small graphs.
Partition maximize_modularity_exact(const PeerNetwork& n);

/// Multi-restart Louvain followed by a single-vertex refinement sweep.
Partition maximize_modularity_louvain(const PeerNetwork& n, RngSeed seed, std::size_t restarts);

struct BecdOptions {
  backbone::BackboneOptions backbone{};
  ModularityOptions modularity{};
};

struct BecdResult {
  backbone::BackboneResult backbone;
  Partition partition;
  GroupAssignment groups;
};

/// Backbone extraction followed by modularity maximization. Every community
/// becomes a group, singletons included.
BecdResult becd(const RecallMatrix& r, RngSeed seed, const BecdOptions& options = {});
GroupAssignment becd_groups(const RecallMatrix& r, RngSeed seed, const BecdOptions& options = {});

}  // namespace peergroups::community
