#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "peergroups/community.hpp"
#include "peergroups/fixtures.hpp"

using namespace peergroups;
using namespace peergroups::community;

namespace {

PeerNetwork edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> e) {
  return PeerNetwork::from_edges(n, e);
}

PeerNetwork two_triangles() { return edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}); }

}  // namespace

TEST_CASE("partitions are canonical") {
  const Partition p({5, 5, 2, 9, 2});
  CHECK(p.labels() == std::vector<int>{0, 0, 1, 2, 1});
  CHECK(p.n_communities() == 3);
  CHECK(p.communities() == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 4}, {3}});
  CHECK(Partition({1, 0}) == Partition({0, 1}));
}

TEST_CASE("modularity examples") {
  const auto g = two_triangles();
  CHECK(modularity(g, Partition(std::vector<int>(6, 0))) == doctest::Approx(0.0).scale(1.0));
  CHECK(modularity(g, Partition({0, 0, 0, 1, 1, 1})) == doctest::Approx(0.5));
  CHECK(modularity(PeerNetwork(4), Partition({0, 1, 0, 1})) == 0.0);
  CHECK(modularity_numerator(g, Partition({0, 0, 0, 1, 1, 1})) == 4 * 6 * 6 / 2);
}

TEST_CASE("modularity equals the double-loop definition on graphs up to 8 vertices") {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + t % 8;
    const auto g = oracle::random_graph(n, 0.1 + 0.1 * (t % 8), rng);
    std::uniform_int_distribution<int> lab(0, static_cast<int>(n) - 1);
    std::vector<int> labels(n);
    for (auto& l : labels) l = lab(rng);
    const double q = modularity(g, Partition(labels));
    CHECK(q == doctest::Approx(oracle::modularity(g, labels)).epsilon(1e-12).scale(1.0));
    CHECK(q >= -0.5);
    CHECK(q <= 1.0);
  }
}

TEST_CASE("maximization examples") {
  CHECK(maximize_modularity(two_triangles(), RngSeed{1}).labels() == std::vector<int>{0, 0, 0, 1, 1, 1});
  PeerNetwork k5(5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) k5.set_edge(i, j);
  CHECK(maximize_modularity(k5, RngSeed{1}).n_communities() == 1);
  CHECK(maximize_modularity(PeerNetwork(4), RngSeed{1}).n_communities() == 4);
  // Heuristic path on the same inputs.
  const ModularityOptions heuristic{.restarts = 10, .exact_max_n = 12, .force_heuristic = true};
  CHECK(maximize_modularity(two_triangles(), RngSeed{1}, heuristic).labels() == std::vector<int>{0, 0, 0, 1, 1, 1});
  CHECK(maximize_modularity(k5, RngSeed{1}, heuristic).n_communities() == 1);
  CHECK(maximize_modularity(PeerNetwork(4), RngSeed{1}, heuristic).n_communities() == 4);
}

TEST_CASE("exact path matches exhaustive enumeration") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 150; ++t) {
    const std::size_t n = 1 + t % 10;
    const auto g = oracle::random_graph(n, 0.15 + 0.1 * (t % 7), rng);
    const auto best = oracle::best_partition(g);
    const auto got = maximize_modularity(g, RngSeed{static_cast<std::uint64_t>(t)});
    CHECK(modularity_numerator(g, got) == best.numerator);
    CHECK(got.labels() == best.labels);
    CHECK(maximize_modularity_exact(g).labels() == best.labels);
  }
}

TEST_CASE("optimum beats the trivial partitions and is deterministic") {
  std::mt19937_64 rng(18);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 15 + t % 20;  // heuristic sizes
    const auto g = oracle::random_graph(n, 0.1 + 0.02 * (t % 10), rng);
    const auto p = maximize_modularity(g, RngSeed{7});
    std::vector<int> singletons(n);
    for (std::size_t i = 0; i < n; ++i) singletons[i] = static_cast<int>(i);
    CHECK(modularity(g, p) >= modularity(g, Partition(singletons)));
    CHECK(modularity(g, p) >= modularity(g, Partition(std::vector<int>(n, 0))) - 1e-15);
    CHECK(p == maximize_modularity(g, RngSeed{7}));
    for (std::size_t v = 0; v < n; ++v)
      if (g.degree(v) == 0) {
        const auto lab = p[v];
        CHECK(std::count(p.labels().begin(), p.labels().end(), lab) == 1);
      }
  }
}

TEST_CASE("Louvain reaches the optimum on most small graphs") {
  std::mt19937_64 rng(19);
  int hits = 0;
  const int total = 200;
  for (int t = 0; t < total; ++t) {
    const auto g = oracle::random_graph(3 + t % 9, 0.15 + 0.1 * (t % 6), rng);
    const auto best = oracle::best_partition(g);
    const auto m = static_cast<double>(g.edge_count());
    const double q_best = m == 0 ? 0.0 : static_cast<double>(best.numerator) / (4.0 * m * m);
    const auto h = maximize_modularity_louvain(g, RngSeed{static_cast<std::uint64_t>(t)}, 50);
    hits += std::abs(modularity(g, h) - q_best) <= 1e-9;
  }
  CHECK(hits >= total * 95 / 100);
}

TEST_CASE("BE-CD on a planted three-block classroom") {
  std::mt19937_64 rng(20);
  std::vector<std::vector<std::size_t>> reports;
  for (int k = 0; k < 45; ++k) {
    const std::size_t base = static_cast<std::size_t>(k % 3) * 5;
    std::vector<std::size_t> block{base, base + 1, base + 2, base + 3, base + 4};
    std::shuffle(block.begin(), block.end(), rng);
    block.resize(3 + k % 2);
    reports.push_back(block);
  }
  std::vector<ChildId> kids;
  for (int i = 0; i < 15; ++i) kids.push_back("k" + std::to_string(i));
  const auto r = RecallMatrix::from_reports(kids, reports);
  const auto result = becd(r, RngSeed{1});
  CHECK(membership_statistic(result.groups, 15) == 1.0);
  CHECK(result.partition.labels() == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2});
}

TEST_CASE("BE-CD edge cases and the surrogate classroom") {
  const auto single = RecallMatrix::from_reports({"a", "b", "c", "d"}, {{0, 1, 2}});
  CHECK(membership_statistic(becd_groups(single, RngSeed{1}), 4) == 0.0);

  std::istringstream in{std::string(fixtures::surrogate_classroom_text())};
  const auto r = load_reports(in);
  const auto a = becd(r, RngSeed{3});
  CHECK(membership_statistic(a.groups, 26) >= 24.0 / 26.0);
  const auto b = becd(r, RngSeed{3});
  CHECK(a.partition == b.partition);
  // Heather and Ken are the two children left without a group.
  for (const char* name : {"Heather", "Ken"}) {
    const auto idx = static_cast<std::size_t>(std::find(r.children().begin(), r.children().end(), name) -
                                              r.children().begin());
    for (auto g : a.groups.membership()[idx]) CHECK(a.groups.groups()[g].size() < 3);
  }
}
