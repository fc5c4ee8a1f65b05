#include "peergroups/community.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "peergroups/error.hpp"

namespace peergroups::community {

Partition::Partition(std::vector<int> labels) : labels_(std::move(labels)) {
  std::unordered_map<int, int> relabel;
  for (auto& l : labels_) {
    auto [it, inserted] = relabel.try_emplace(l, static_cast<int>(relabel.size()));
    l = it->second;
  }
  n_communities_ = relabel.size();
}

std::vector<std::vector<std::size_t>> Partition::communities() const {
  std::vector<std::vector<std::size_t>> out(n_communities_);
  for (std::size_t v = 0; v < labels_.size(); ++v) out[static_cast<std::size_t>(labels_[v])].push_back(v);
  return out;
}

std::int64_t modularity_numerator(const PeerNetwork& n, const Partition& part) {
  if (part.size() != n.size()) throw ConfigError("partition does not cover the network");
  const auto m = static_cast<std::int64_t>(n.edge_count());
  std::vector<std::int64_t> internal(part.n_communities(), 0), degree(part.n_communities(), 0);
  for (std::size_t v = 0; v < n.size(); ++v) degree[static_cast<std::size_t>(part[v])] += static_cast<std::int64_t>(n.degree(v));
  for (auto [u, v] : n.edges())
    if (part[u] == part[v]) ++internal[static_cast<std::size_t>(part[u])];
  std::int64_t total = 0;
  for (std::size_t c = 0; c < part.n_communities(); ++c) total += 4 * m * internal[c] - degree[c] * degree[c];
  return total;
}

double modularity(const PeerNetwork& n, const Partition& part) {
  const auto numerator = modularity_numerator(n, part);
  const auto m = static_cast<double>(n.edge_count());
  if (m == 0.0) return 0.0;
  return static_cast<double>(numerator) / (4.0 * m * m);
}

namespace {

bool better(std::int64_t q, const Partition& p, std::int64_t best_q, const Partition& best) {
  if (q != best_q) return q > best_q;
  return p.labels() < best.labels();
}

Partition components_partition(const PeerNetwork& n) {
  std::vector<int> labels(n.size(), -1);
  int next = 0;
  for (std::size_t s = 0; s < n.size(); ++s) {
    if (labels[s] >= 0) continue;
    labels[s] = next;
    std::vector<std::size_t> queue{s};
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (std::size_t v : n.neighbors(queue[h]))
        if (labels[v] < 0) {
          labels[v] = next;
          queue.push_back(v);
        }
    ++next;
  }
  return Partition(std::move(labels));
}

// Branch and bound over restricted growth strings of the non-isolated
// vertices, visited in lexicographic order, so the first optimum found is the
// canonical tie winner. Scores are the exact integer 4 m^2 Q.
class ExactSearch {
 public:
  ExactSearch(const PeerNetwork& net, std::int64_t lower_bound) : net_(net), lower_bound_(lower_bound) {
    for (std::size_t v = 0; v < net.size(); ++v)
      if (net.degree(v) > 0) order_.push_back(v);
    m_ = static_cast<std::int64_t>(net.edge_count());
    const std::size_t t = order_.size();
    degree_.resize(t);
    earlier_.resize(t);
    std::vector<std::int64_t> gain_bound(t);
    for (std::size_t a = 0; a < t; ++a) {
      degree_[a] = static_cast<std::int64_t>(net.degree(order_[a]));
      for (std::size_t b = 0; b < a; ++b)
        if (net.has_edge(order_[a], order_[b])) earlier_[a].push_back(b);
      // Joining community c gains 4m a - 2 K_c k - k^2 with a <= K_c and a
      // bounded by the already-placed neighbours.
      const auto back = static_cast<std::int64_t>(earlier_[a].size());
      const auto k = degree_[a];
      gain_bound[a] = std::max(-k * k, back * (4 * m_ - 2 * k) - k * k);
    }
    suffix_bound_.assign(t + 1, 0);
    for (std::size_t a = t; a-- > 0;) suffix_bound_[a] = suffix_bound_[a + 1] + gain_bound[a];
    label_.assign(t, -1);
    links_.assign(t, std::vector<std::int64_t>(t + 1, 0));
  }

  Partition solve() {
    community_degree_.clear();
    if (!order_.empty()) descend(0, 0);
    std::vector<int> labels(net_.size(), -1);
    for (std::size_t a = 0; a < order_.size(); ++a) labels[order_[a]] = best_label_[a];
    int next = static_cast<int>(order_.size());
    for (auto& l : labels)
      if (l < 0) l = next++;
    return Partition(std::move(labels));
  }

 private:
  void descend(std::size_t depth, std::int64_t score) {
    if (depth == order_.size()) {
      if (!found_ || score > best_) {
        found_ = true;
        best_ = score;
        best_label_ = label_;
      }
      return;
    }
    const std::int64_t reach = score + suffix_bound_[depth];
    if (found_ ? reach <= best_ : reach < lower_bound_) return;

    auto& links = links_[depth];
    const std::size_t open = community_degree_.size();
    std::fill(links.begin(), links.begin() + static_cast<std::ptrdiff_t>(open), 0);
    for (std::size_t b : earlier_[depth]) ++links[static_cast<std::size_t>(label_[b])];
    const auto k = degree_[depth];
    for (std::size_t c = 0; c < open; ++c) {
      label_[depth] = static_cast<int>(c);
      community_degree_[c] += k;
      descend(depth + 1, score + 4 * m_ * links[c] - 2 * (community_degree_[c] - k) * k - k * k);
      community_degree_[c] -= k;
    }
    label_[depth] = static_cast<int>(open);
    community_degree_.push_back(k);
    descend(depth + 1, score - k * k);
    community_degree_.pop_back();
    label_[depth] = -1;
  }

  const PeerNetwork& net_;
  std::int64_t lower_bound_;
  std::vector<std::size_t> order_;
  std::int64_t m_ = 0;
  std::vector<std::int64_t> degree_;
  std::vector<std::vector<std::size_t>> earlier_;
  std::vector<std::int64_t> suffix_bound_;
  std::vector<int> label_;
  std::vector<std::vector<std::int64_t>> links_;
  std::vector<std::int64_t> community_degree_;
  bool found_ = false;
  std::int64_t best_ = 0;
  std::vector<int> best_label_;
};

// Weighted graph for Louvain levels; weights are integer edge counts and a
// node's self weight counts each internal edge twice.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> adj;
  std::vector<std::int64_t> self;
  std::vector<std::int64_t> degree;
  std::int64_t two_m = 0;

  std::size_t size() const { return adj.size(); }
};

LevelGraph level_from_network(const PeerNetwork& n) {
  LevelGraph g;
  g.adj.resize(n.size());
  g.self.assign(n.size(), 0);
  g.degree.assign(n.size(), 0);
  for (auto [u, v] : n.edges()) {
    g.adj[u].emplace_back(v, 1);
    g.adj[v].emplace_back(u, 1);
    ++g.degree[u];
    ++g.degree[v];
  }
  g.two_m = 2 * static_cast<std::int64_t>(n.edge_count());
  return g;
}

// Local moving phase: moves each node to the neighbouring community with the
// largest positive gain 2m w_ic - k_i tot_c until a full pass changes nothing.
// Returns whether any node moved.
bool local_moving(const LevelGraph& g, std::vector<std::size_t>& community, Rng& rng, bool shuffle,
                  std::size_t max_passes = 1000) {
  const std::size_t n = g.size();
  std::vector<std::int64_t> tot(n, 0);
  for (std::size_t v = 0; v < n; ++v) tot[community[v]] += g.degree[v];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::int64_t> weight_to(n, 0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t v : order) {
      const std::size_t old_c = community[v];
      touched.clear();
      for (auto [u, w] : g.adj[v]) {
        if (u == v) continue;
        const std::size_t c = community[u];
        if (weight_to[c] == 0) touched.push_back(c);
        weight_to[c] += w;
      }
      tot[old_c] -= g.degree[v];
      std::size_t best_c = old_c;
      std::int64_t best_gain = g.two_m * weight_to[old_c] - g.degree[v] * tot[old_c];
      for (std::size_t c : touched) {
        const std::int64_t gain = g.two_m * weight_to[c] - g.degree[v] * tot[c];
        if (gain > best_gain) {
          best_gain = gain;
          best_c = c;
        }
      }
      tot[best_c] += g.degree[v];
      community[v] = best_c;
      if (best_c != old_c) moved = true;
      for (std::size_t c : touched) weight_to[c] = 0;
      weight_to[old_c] = 0;
    }
    if (!moved) break;
    any_move = true;
  }
  return any_move;
}

std::vector<std::size_t> compact(std::vector<std::size_t>& community) {
  std::unordered_map<std::size_t, std::size_t> relabel;
  for (auto& c : community) {
    auto [it, inserted] = relabel.try_emplace(c, relabel.size());
    c = it->second;
  }
  return community;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<std::size_t>& community, std::size_t k) {
  LevelGraph out;
  out.adj.resize(k);
  out.self.assign(k, 0);
  out.degree.assign(k, 0);
  out.two_m = g.two_m;
  std::vector<std::unordered_map<std::size_t, std::int64_t>> links(k);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const std::size_t cv = community[v];
    out.degree[cv] += g.degree[v];
    out.self[cv] += g.self[v];
    for (auto [u, w] : g.adj[v]) {
      const std::size_t cu = community[u];
      if (cu == cv) out.self[cv] += w;  // each internal edge seen from both ends
      else links[cv][cu] += w;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::pair<std::size_t, std::int64_t>> row(links[c].begin(), links[c].end());
    std::sort(row.begin(), row.end());
    out.adj[c] = std::move(row);
  }
  return out;
}

Partition louvain_once(const PeerNetwork& net, const LevelGraph& base, Rng& rng) {
  const std::size_t n = net.size();
  std::vector<std::size_t> assignment(n);
  std::iota(assignment.begin(), assignment.end(), std::size_t{0});
  LevelGraph g = base;
  for (;;) {
    std::vector<std::size_t> community(g.size());
    std::iota(community.begin(), community.end(), std::size_t{0});
    const bool moved = local_moving(g, community, rng, true);
    compact(community);
    const std::size_t k = community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
    for (auto& a : assignment) a = community[a];
    if (!moved || k == g.size()) break;
    g = aggregate(g, community, k);
  }
  // Single-vertex refinement on the original graph.
  local_moving(base, assignment, rng, false);
  std::vector<int> labels(assignment.begin(), assignment.end());
  return Partition(std::move(labels));
}

}  // namespace

Partition maximize_modularity_exact(const PeerNetwork& n) {
  return ExactSearch(n, std::numeric_limits<std::int64_t>::min()).solve();
}

Partition maximize_modularity_louvain(const PeerNetwork& net, RngSeed seed, std::size_t restarts) {
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  Partition best = components_partition(net);
  std::int64_t best_q = modularity_numerator(net, best);
  if (net.edge_count() == 0) return Partition([&] {
    std::vector<int> l(net.size());
    std::iota(l.begin(), l.end(), 0);
    return l;
  }());
  const LevelGraph base = level_from_network(net);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng = make_rng(derive_seed(seed, r));
    Partition candidate = louvain_once(net, base, rng);
    const auto q = modularity_numerator(net, candidate);
    if (better(q, candidate, best_q, best)) {
      best = std::move(candidate);
      best_q = q;
    }
  }
  return best;
}

Partition maximize_modularity(const PeerNetwork& n, RngSeed seed, const ModularityOptions& options) {
  if (options.restarts < 1) throw ConfigError("restarts must be at least 1");
  Partition heuristic = maximize_modularity_louvain(n, seed, options.restarts);
  if (options.force_heuristic) return heuristic;
  std::size_t active = 0;
  for (std::size_t v = 0; v < n.size(); ++v) active += n.degree(v) > 0 ? 1 : 0;
  if (active > options.exact_max_n) return heuristic;
  return ExactSearch(n, modularity_numerator(n, heuristic)).solve();
}

BecdResult becd(const RecallMatrix& r, RngSeed seed, const BecdOptions& options) {
  BecdResult out;
  out.backbone = backbone::extract_backbone(r, options.backbone);
  out.partition = maximize_modularity(out.backbone.network, seed, options.modularity);
  out.groups = GroupAssignment(r.n_children(), out.partition.communities());
  return out;
}

GroupAssignment becd_groups(const RecallMatrix& r, RngSeed seed, const BecdOptions& options) {
  return becd(r, seed, options).groups;
}

}  // namespace peergroups::community
