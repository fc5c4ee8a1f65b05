#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "peergroups/error.hpp"
#include "peergroups/fixtures.hpp"
#include "peergroups/scm.hpp"

using namespace peergroups;
using namespace peergroups::scm;

namespace {

RecallMatrix from_lists(std::size_t n, const std::vector<std::vector<std::size_t>>& reports) {
  std::vector<ChildId> kids;
  for (std::size_t i = 0; i < n; ++i) kids.push_back(std::string(1, static_cast<char>('A' + i)));
  return RecallMatrix::from_reports(kids, reports);
}

SimilarityMatrix sim_from(std::size_t n, std::vector<double> v) { return SimilarityMatrix(n, std::move(v)); }

PeerNetwork edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> e) {
  return PeerNetwork::from_edges(n, e);
}

std::vector<double> column(const oracle::Dense& c, std::size_t j) {
  std::vector<double> out;
  for (const auto& row : c) out.push_back(row[j]);
  return out;
}

}  // namespace

TEST_CASE("co-occurrence small cases") {
  const auto one = cooccurrence(from_lists(3, {{0, 1, 2}}));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(one(i, j) == 1);

  const auto blocks = cooccurrence(from_lists(4, {{0, 1}, {2, 3}}));
  CHECK(blocks(0, 1) == 1);
  CHECK(blocks(2, 3) == 1);
  CHECK(blocks(0, 2) == 0);
  CHECK(blocks(1, 3) == 0);

  // R = [[1,1],[1,0]]
  const std::vector<std::uint8_t> e{1, 1, 1, 0};
  const auto c = cooccurrence(RecallMatrix::from_dense({"a", "b"}, 2, e));
  CHECK(c(0, 0) == 2);
  CHECK(c(0, 1) == 1);
  CHECK(c(1, 0) == 1);
  CHECK(c(1, 1) == 1);
}

TEST_CASE("co-occurrence equals the brute-force product on random matrices up to 10x10") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 400; ++t) {
    const std::size_t rows = 1 + t % 10;
    const std::size_t cols = 1 + (t / 10) % 10;
    const auto r = oracle::random_recall(rows, cols, 0.15 + 0.07 * (t % 10), rng);
    const auto expect = oracle::matmul_transpose(oracle::to_dense(r));
    const auto got = cooccurrence(r);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < rows; ++j) REQUIRE(got(i, j) == expect[i][j]);
  }
}

TEST_CASE("similarity equals Pearson correlation of co-occurrence columns") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto r = oracle::random_recall(3 + t % 12, 2 + t % 17, 0.3, rng);
    const auto c = oracle::matmul_transpose(oracle::to_dense(r));
    const auto s = similarity(cooccurrence(r));
    const std::size_t n = r.n_children();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double expect = oracle::pearson(column(c, i), column(c, j));
        if (std::isnan(expect)) CHECK(s(i, j) == 0.0);
        else CHECK(s(i, j) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(s(i, j) == s(j, i));
        CHECK(std::abs(s(i, j)) <= 1.0);
      }
  }
}

TEST_CASE("similarity without the pair's own rows") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto r = oracle::random_recall(5 + t % 8, 6, 0.35, rng);
    const auto c = oracle::matmul_transpose(oracle::to_dense(r));
    const auto s = similarity(cooccurrence(r), {.include_diagonal = false});
    const std::size_t n = r.n_children();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        std::vector<double> x, y;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          x.push_back(c[k][i]);
          y.push_back(c[k][j]);
        }
        const double expect = oracle::pearson(x, y);
        if (std::isnan(expect)) CHECK(s(i, j) == 0.0);
        else CHECK(s(i, j) == doctest::Approx(expect).epsilon(1e-12));
      }
  }
}

TEST_CASE("similarity degenerate columns and identical columns") {
  // Dee is never named: constant zero column.
  std::istringstream in("id,r1,r2,r3\nAnn,1,1,0\nBob,1,1,0\nCy,0,1,1\nDee,0,0,0\n");
  const auto s = similarity(cooccurrence(load_matrix_csv(in)));
  CHECK(s(0, 1) == doctest::Approx(1.0));
  for (std::size_t j = 0; j < 4; ++j) CHECK(s(3, j) == 0.0);
  CHECK(s(0, 0) == doctest::Approx(1.0));

  // C = [[2,1],[1,1]]: column 2 is constant.
  const std::vector<std::uint8_t> e{1, 1, 1, 0};
  const auto s2 = similarity(cooccurrence(RecallMatrix::from_dense({"a", "b"}, 2, e)));
  CHECK(s2(0, 1) == 0.0);
}

TEST_CASE("similarity ignores report order") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    const auto r = oracle::random_recall(9, 12, 0.3, rng);
    std::vector<std::size_t> perm(12);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::uint8_t> e(9 * 12);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 12; ++j) e[i * 12 + j] = r.at(i, perm[j]);
    const auto shuffled = RecallMatrix::from_dense(r.children(), 12, e);
    const auto a = similarity(cooccurrence(r));
    const auto b = similarity(cooccurrence(shuffled));
    for (std::size_t k = 0; k < a.values().size(); ++k) CHECK(a.values()[k] == b.values()[k]);
  }
}

TEST_CASE("thresholding") {
  auto s = sim_from(3, {1, 0.4, 0.39999, 0.4, 1, -0.2, 0.39999, -0.2, 1});
  const auto n = threshold_network(s, 0.4);
  CHECK(n.has_edge(0, 1));
  CHECK_FALSE(n.has_edge(0, 2));
  CHECK_FALSE(n.has_edge(0, 0));
  CHECK(threshold_network(sim_from(3, std::vector<double>(9, 0.0)), 0.4).edge_count() == 0);
  const auto all = threshold_network(s, 0.0);
  CHECK(all.has_edge(0, 2));
  CHECK_FALSE(all.has_edge(1, 2));
  CHECK_THROWS_AS(threshold_network(s, -0.1), ConfigError);
  CHECK_THROWS_AS(threshold_network(s, 1.5), ConfigError);
}

TEST_CASE("raising the threshold only removes edges") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    const auto s = similarity(cooccurrence(oracle::random_recall(12, 20, 0.3, rng)));
    for (int step = 0; step < 19; ++step) {
      const auto a = threshold_network(s, 0.05 * step);
      const auto b = threshold_network(s, 0.05 * (step + 1));
      for (const auto& [i, j] : b.edges()) CHECK(a.has_edge(i, j));
    }
  }
}

TEST_CASE("fifty-percent rule examples") {
  const auto two_triangles = identify_groups_fifty_percent(edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}));
  REQUIRE(two_triangles.groups().size() == 2);
  for (const auto& m : two_triangles.membership()) CHECK(m.size() == 1);

  CHECK(identify_groups_fifty_percent(PeerNetwork(5)).groups().empty());

  const auto clique_pendant =
      identify_groups_fifty_percent(edges(5, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {3, 4}}));
  REQUIRE(clique_pendant.groups().size() == 1);
  CHECK(clique_pendant.groups()[0] == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(clique_pendant.membership()[4].empty());
}

TEST_CASE("fifty-percent groups always satisfy the rule (exhaustive subsets, n <= 8)") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + t % 7;
    const auto g = oracle::random_graph(n, 0.2 + 0.1 * (t % 6), rng);
    const auto valid = oracle::fifty_percent_subsets(g);
    const auto groups = identify_groups_fifty_percent(g);
    for (const auto& grp : groups.groups()) {
      CHECK(valid.count(grp) == 1);
      CHECK(satisfies_fifty_percent(g, grp));
    }
    // No emitted group is contained in another.
    for (const auto& a : groups.groups())
      for (const auto& b : groups.groups())
        if (&a != &b) CHECK_FALSE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  }
}

TEST_CASE("profile rule examples") {
  auto pair = sim_from(3, {1, 0.9, 0, 0.9, 1, 0, 0, 0, 1});
  const auto g1 = identify_groups_profile(pair, 0.4);
  REQUIRE(g1.groups().size() == 1);
  CHECK(g1.groups()[0] == std::vector<std::size_t>{0, 1});

  const auto g2 = identify_groups_profile(sim_from(3, std::vector<double>(9, 0.5)), 0.4);
  REQUIRE(g2.groups().size() == 1);
  CHECK(g2.groups()[0].size() == 3);

  auto chain = sim_from(3, {1, 0.5, 0.0, 0.5, 1, 0.5, 0.0, 0.5, 1});
  const std::vector<int> salience{1, 1, 5};
  const auto g3 = identify_groups_profile(chain, 0.4, salience);
  REQUIRE(g3.groups().size() == 1);
  CHECK(g3.groups()[0] == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("components rule examples") {
  CHECK(identify_groups_components(edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}})).groups().size() == 2);
  CHECK(identify_groups_components(PeerNetwork(4)).groups().empty());
  const auto path = identify_groups_components(edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}));
  REQUIRE(path.groups().size() == 1);
  CHECK(path.groups()[0].size() == 5);
}

TEST_CASE("membership statistic") {
  CHECK(membership_statistic(GroupAssignment(26, {{0, 1, 2, 3}, {4, 5, 6}}), 26) == doctest::Approx(7.0 / 26));
  CHECK(membership_statistic(GroupAssignment(6, {{0, 1}, {2, 3}}), 6) == 0.0);
  CHECK(membership_statistic(GroupAssignment(10, {{0, 1, 2}, {3, 4, 5}}), 10) == doctest::Approx(0.6));
  // Duplicated groups and relabeled children change nothing.
  const GroupAssignment a(8, {{0, 1, 2}, {2, 5, 6, 7}});
  const GroupAssignment dup(8, {{0, 1, 2}, {2, 5, 6, 7}, {0, 1, 2}});
  const GroupAssignment relabeled(8, {{7, 6, 5}, {5, 2, 1, 0}});
  CHECK(membership_statistic(a, 8) == membership_statistic(dup, 8));
  CHECK(membership_statistic(a, 8) == membership_statistic(relabeled, 8));
}

TEST_CASE("surrogate classroom: fifty-percent rule recovers the planted groups") {
  std::istringstream in{std::string(fixtures::surrogate_classroom_text())};
  const auto r = load_reports(in);
  REQUIRE(r.n_children() == 26);
  REQUIRE(r.n_reports() == 61);
  const auto groups = identify_groups_fifty_percent(threshold_network(similarity(cooccurrence(r)), 0.4));
  CHECK(membership_statistic(groups, 26) == 1.0);

  std::vector<std::vector<std::size_t>> planted;
  for (const auto& names : oracle::planted_groups(fixtures::surrogate_classroom_text())) {
    std::vector<std::size_t> idx;
    for (const auto& name : names)
      idx.push_back(static_cast<std::size_t>(std::find(r.children().begin(), r.children().end(), name) -
                                             r.children().begin()));
    planted.push_back(idx);
  }
  REQUIRE(planted.size() == 5);
  CHECK(comembership_agreement(groups, GroupAssignment(26, planted)) >= 0.95);
}
