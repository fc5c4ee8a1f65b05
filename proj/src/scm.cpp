#include "peergroups/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "peergroups/error.hpp"
#include "peergroups/kernels.hpp"

namespace peergroups::scm {

CooccurrenceMatrix::CooccurrenceMatrix(std::size_t n, std::vector<std::int32_t> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n * n) throw DataError("co-occurrence matrix shape mismatch");
}

SimilarityMatrix::SimilarityMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n * n) throw DataError("similarity matrix shape mismatch");
}

CooccurrenceMatrix cooccurrence(const RecallMatrix& r) {
  const auto& k = kernels::active();
  const std::size_t n = r.n_children();
  std::vector<std::int32_t> c(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const auto shared = static_cast<std::int32_t>(k.and_popcount(r.row_bits(i), r.row_bits(j)));
      c[i * n + j] = shared;
      c[j * n + i] = shared;
    }
  }
  return CooccurrenceMatrix(n, std::move(c));
}

namespace {

// Pearson correlation from exact integer moments: cov and var numerators are
// n * sum(xy) - sum(x) sum(y), so only the final division rounds.
double pearson_from_moments(std::int64_t cov, std::int64_t var_x, std::int64_t var_y) {
  if (var_x <= 0 || var_y <= 0) return 0.0;
  const double s = static_cast<double>(cov) /
                   std::sqrt(static_cast<double>(var_x) * static_cast<double>(var_y));
  return std::clamp(s, -1.0, 1.0);
}

SimilarityMatrix similarity_full(const CooccurrenceMatrix& c) {
  const auto& k = kernels::active();
  const std::size_t n = c.size();
  const auto len = static_cast<std::int64_t>(n);
  std::vector<std::int64_t> sum(n, 0);
  std::vector<std::int64_t> var(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = c.values().subspan(i * n, n);  // symmetric: row i == column i
    sum[i] = std::accumulate(col.begin(), col.end(), std::int64_t{0});
    var[i] = len * k.dot_i32(col, col) - sum[i] * sum[i];
  }
  std::vector<double> s(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s[i * n + i] = var[i] > 0 ? 1.0 : 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto cov = len * k.dot_i32(c.values().subspan(i * n, n), c.values().subspan(j * n, n)) -
                       sum[i] * sum[j];
      const double v = pearson_from_moments(cov, var[i], var[j]);
      s[i * n + j] = v;
      s[j * n + i] = v;
    }
  }
  return SimilarityMatrix(n, std::move(s));
}

SimilarityMatrix similarity_excluding_pair(const CooccurrenceMatrix& c) {
  const std::size_t n = c.size();
  std::vector<double> s(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    bool varies = false;
    for (std::size_t k = 1; k < n && !varies; ++k) varies = c(k, i) != c(0, i);
    s[i * n + i] = varies ? 1.0 : 0.0;
  }
  if (n < 4) return SimilarityMatrix(n, std::move(s));
  const auto len = static_cast<std::int64_t>(n - 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const std::int64_t x = c(k, i);
        const std::int64_t y = c(k, j);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
      }
      const double v = pearson_from_moments(len * sxy - sx * sy, len * sxx - sx * sx, len * syy - sy * sy);
      s[i * n + j] = v;
      s[j * n + i] = v;
    }
  }
  return SimilarityMatrix(n, std::move(s));
}

// Seed order: descending degree, ties by child order.
std::vector<std::size_t> seed_order(const PeerNetwork& net) {
  std::vector<std::size_t> order(net.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> deg(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) deg[v] = net.degree(v);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return deg[a] > deg[b]; });
  return order;
}

class GroupGrower {
 public:
  GroupGrower(const PeerNetwork& net, const std::vector<std::size_t>& order)
      : net_(net), order_(order), in_(net.size(), 0), ties_(net.size(), 0) {}

  std::vector<std::size_t> grow(std::size_t a, std::size_t b) {
    reset();
    add(a);
    add(b);
    expand_loose();
    prune();
    expand_strict();
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < net_.size(); ++v)
      if (in_[v]) members.push_back(v);
    return members;
  }

 private:
  void reset() {
    std::fill(in_.begin(), in_.end(), 0);
    std::fill(ties_.begin(), ties_.end(), 0);
    size_ = 0;
  }

  void add(std::size_t v) {
    in_[v] = 1;
    ++size_;
    for (std::size_t u = 0; u < net_.size(); ++u)
      if (net_.has_edge(u, v)) ++ties_[u];
  }

  void remove(std::size_t v) {
    in_[v] = 0;
    --size_;
    for (std::size_t u = 0; u < net_.size(); ++u)
      if (net_.has_edge(u, v)) --ties_[u];
  }

  // A candidate joins when tied to at least half of the current members.
  void expand_loose() {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t c : order_) {
        if (!in_[c] && 2 * ties_[c] >= size_) {
          add(c);
          changed = true;
        }
      }
    }
  }

  // Drops the weakest member while anyone is tied to fewer than half of the
  // others; ties go to the member latest in seed order.
  void prune() {
    while (size_ > 1) {
      std::size_t worst = net_.size();
      for (std::size_t v : order_) {
        if (in_[v] && 2 * ties_[v] < size_ - 1 && (worst == net_.size() || ties_[v] <= ties_[worst])) {
          worst = v;
        }
      }
      if (worst == net_.size()) return;
      remove(worst);
    }
  }

  // Same join rule, but refuses candidates that would push an existing member
  // below the rule.
  void expand_strict() {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t c : order_) {
        if (in_[c] || 2 * ties_[c] < size_) continue;
        bool keeps_rule = true;
        for (std::size_t v = 0; v < net_.size() && keeps_rule; ++v)
          if (in_[v] && !net_.has_edge(v, c) && 2 * ties_[v] < size_) keeps_rule = false;
        if (keeps_rule) {
          add(c);
          changed = true;
        }
      }
    }
  }

  const PeerNetwork& net_;
  const std::vector<std::size_t>& order_;
  std::vector<char> in_;
  std::vector<std::size_t> ties_;
  std::size_t size_ = 0;
};

bool is_subset(const std::vector<std::size_t>& small, const std::vector<std::size_t>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

SimilarityMatrix similarity(const CooccurrenceMatrix& c, const SimilarityOptions& options) {
  return options.include_diagonal ? similarity_full(c) : similarity_excluding_pair(c);
}

PeerNetwork threshold_network(const SimilarityMatrix& s, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  const std::size_t n = s.size();
  PeerNetwork net(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (s(i, j) >= threshold) net.set_edge(i, j);
  return net;
}

bool satisfies_fifty_percent(const PeerNetwork& n, std::span<const std::size_t> members) {
  for (std::size_t v : members) {
    std::size_t ties = 0;
    for (std::size_t u : members) ties += n.has_edge(u, v) ? 1 : 0;
    if (2 * ties < members.size() - 1) return false;
  }
  return true;
}

GroupAssignment identify_groups_fifty_percent(const PeerNetwork& net) {
  const auto order = seed_order(net);
  std::vector<std::size_t> rank(net.size());
  for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;

  GroupGrower grower(net, order);
  std::set<std::vector<std::size_t>> found;
  std::vector<std::vector<std::size_t>> grown;
  for (std::size_t u : order) {
    for (std::size_t v : order) {
      if (rank[v] <= rank[u] || !net.has_edge(u, v)) continue;
      auto members = grower.grow(u, v);
      if (members.size() >= 2 && found.insert(members).second) grown.push_back(std::move(members));
    }
  }

  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t g = 0; g < grown.size(); ++g) {
    bool contained = false;
    for (std::size_t h = 0; h < grown.size() && !contained; ++h)
      contained = h != g && grown[h].size() > grown[g].size() && is_subset(grown[g], grown[h]);
    if (!contained) groups.push_back(grown[g]);
  }
  return GroupAssignment(net.size(), std::move(groups));
}

GroupAssignment identify_groups_profile(const SimilarityMatrix& s, double threshold,
                                        std::span<const int> salience) {
  const std::size_t n = s.size();
  if (!salience.empty() && salience.size() != n) throw ConfigError("salience length mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!salience.empty()) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return salience[a] > salience[b]; });
  }

  std::vector<char> processed(n, 0);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t seed : order) {
    if (processed[seed]) continue;
    std::vector<char> in(n, 0);
    std::vector<std::size_t> members{seed};
    in[seed] = 1;
    processed[seed] = 1;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t c : order) {
        if (in[c]) continue;
        const bool linked = std::any_of(members.begin(), members.end(),
                                        [&](std::size_t m) { return s(c, m) >= threshold; });
        if (linked) {
          in[c] = 1;
          processed[c] = 1;
          members.push_back(c);
          changed = true;
        }
      }
    }
    if (members.size() >= 2) groups.push_back(std::move(members));
  }
  return GroupAssignment(n, std::move(groups));
}

GroupAssignment identify_groups_components(const PeerNetwork& net) {
  const std::size_t n = net.size();
  std::vector<char> seen(n, 0);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> component{start};
    seen[start] = 1;
    for (std::size_t head = 0; head < component.size(); ++head) {
      for (std::size_t v : net.neighbors(component[head])) {
        if (!seen[v]) {
          seen[v] = 1;
          component.push_back(v);
        }
      }
    }
    if (component.size() >= 2) groups.push_back(std::move(component));
  }
  return GroupAssignment(n, std::move(groups));
}

}  // namespace peergroups::scm
