#include "peergroups/network.hpp"

#include <algorithm>

#include "peergroups/error.hpp"

namespace peergroups {

PeerNetwork PeerNetwork::from_edges(std::size_t n,
                                    std::span<const std::pair<std::size_t, std::size_t>> edges) {
  PeerNetwork net(n);
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) throw DataError("edge endpoint out of range");
    net.set_edge(i, j);
  }
  return net;
}

void PeerNetwork::set_edge(std::size_t i, std::size_t j, bool present) noexcept {
  if (i == j) return;
  adj_[i * n_ + j] = present ? 1 : 0;
  adj_[j * n_ + i] = present ? 1 : 0;
}

std::size_t PeerNetwork::degree(std::size_t i) const noexcept {
  std::size_t d = 0;
  for (std::size_t j = 0; j < n_; ++j) d += adj_[i * n_ + j];
  return d;
}

std::size_t PeerNetwork::edge_count() const noexcept {
  std::size_t total = 0;
  for (auto a : adj_) total += a;
  return total / 2;
}

std::vector<std::size_t> PeerNetwork::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_; ++j)
    if (adj_[i * n_ + j]) out.push_back(j);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> PeerNetwork::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (adj_[i * n_ + j]) out.emplace_back(i, j);
  return out;
}

GroupAssignment::GroupAssignment(std::size_t n_children, std::vector<std::vector<std::size_t>> groups)
    : groups_(std::move(groups)), membership_(n_children) {
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    auto& members = groups_[g];
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (std::size_t child : members) {
      if (child >= n_children) throw DataError("group member out of range");
      membership_[child].push_back(g);
    }
  }
}

double membership_statistic(const GroupAssignment& groups, std::size_t n_children,
                            std::size_t min_group_size) {
  if (n_children == 0) throw ConfigError("membership statistic needs at least one child");
  std::vector<char> counted(n_children, 0);
  for (const auto& g : groups.groups()) {
    if (g.size() < min_group_size) continue;
    for (std::size_t child : g)
      if (child < n_children) counted[child] = 1;
  }
  const auto hits = std::count(counted.begin(), counted.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(n_children);
}

double comembership_agreement(const GroupAssignment& a, const GroupAssignment& b) {
  const std::size_t n = std::max(a.n_children(), b.n_children());
  if (n < 2) return 1.0;
  auto together = [](const GroupAssignment& g, std::size_t i, std::size_t j) {
    if (i >= g.n_children() || j >= g.n_children()) return false;
    const auto& gi = g.membership()[i];
    const auto& gj = g.membership()[j];
    for (std::size_t x : gi)
      if (std::find(gj.begin(), gj.end(), x) != gj.end()) return true;
    return false;
  };
  std::size_t agree = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++pairs;
      if (together(a, i, j) == together(b, i, j)) ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

}  // namespace peergroups
