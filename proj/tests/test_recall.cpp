#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "peergroups/error.hpp"
#include "peergroups/recall.hpp"

using namespace peergroups;

namespace {

RecallMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return load_reports(in);
}

}  // namespace

TEST_CASE("report lists: comments, blank lines and first-appearance order") {
  const auto r = parse("# classroom\nAnn, Bob ,Cy\n\n  \nBob,Dee  # trailing comment\n");
  REQUIRE(r.n_children() == 4);
  REQUIRE(r.n_reports() == 2);
  CHECK(r.children() == std::vector<ChildId>{"Ann", "Bob", "Cy", "Dee"});
  CHECK(r.at(0, 0));
  CHECK(r.at(1, 1));
  CHECK_FALSE(r.at(0, 1));
  CHECK(r.report_members(1) == std::vector<std::size_t>{1, 3});
  CHECK(r.child_reports(1) == std::vector<std::size_t>{0, 1});
  CHECK(r.total_ones() == 5);
}

TEST_CASE("report lists reject malformed input") {
  CHECK_THROWS_AS(parse("Ann,,Bob\n"), DataError);
  CHECK_THROWS_AS(parse("Ann,Bob,Ann\n"), DataError);
  CHECK_THROWS_AS(parse("# nothing here\n\n"), DataError);
}

TEST_CASE("matrix CSV loader") {
  std::istringstream ok("id,r1,r2,r3\nAnn,1,0,1\nBob,0,1,1\nCy,0,0,0\n");
  const auto r = load_matrix_csv(ok);
  CHECK(r.n_children() == 3);
  CHECK(r.report_ids() == std::vector<std::string>{"r1", "r2", "r3"});
  CHECK(r.at(0, 2));
  CHECK(margins(r).row_sums == std::vector<int>{2, 2, 0});

  std::istringstream bad_cell("id,r1\nAnn,2\n");
  CHECK_THROWS_AS(load_matrix_csv(bad_cell), DataError);
  std::istringstream ragged("id,r1,r2\nAnn,1\n");
  CHECK_THROWS_AS(load_matrix_csv(ragged), DataError);
  std::istringstream empty_col("id,r1,r2\nAnn,1,0\n");
  CHECK_THROWS_AS(load_matrix_csv(empty_col), DataError);
}

TEST_CASE("serializers round-trip") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto r = oracle::random_recall(2 + t % 9, 1 + t % 13, 0.4, rng);
    const auto [named, dropped] = drop_never_named(r);
    CHECK(parse(to_report_list(named)) .n_reports() == named.n_reports());
    const auto back = parse(to_report_list(named));
    // Report lists order rows by first appearance; compare as sets of reports.
    for (std::size_t j = 0; j < named.n_reports(); ++j) {
      std::vector<ChildId> a, b;
      for (auto i : named.report_members(j)) a.push_back(named.children()[i]);
      for (auto i : back.report_members(j)) b.push_back(back.children()[i]);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
    std::istringstream csv(to_matrix_csv(r));
    CHECK(load_matrix_csv(csv) == r);
  }
}

TEST_CASE("packed rows agree with dense entries") {
  std::mt19937_64 rng(5);
  for (std::size_t cols : {1u, 63u, 64u, 65u, 130u, 200u}) {
    const auto r = oracle::random_recall(7, cols, 0.3, rng);
    for (std::size_t i = 0; i < r.n_children(); ++i) {
      const auto bits = r.row_bits(i);
      CHECK(bits.size() == (cols + 63) / 64);
      for (std::size_t j = 0; j < cols; ++j) CHECK(static_cast<bool>(bits[j / 64] >> (j % 64) & 1u) == r.at(i, j));
    }
  }
}

TEST_CASE("never-named children and limits") {
  std::istringstream in("id,r1,r2\nAnn,1,0\nBob,0,0\nCy,1,1\n");
  const auto r = load_matrix_csv(in);
  const auto [kept, dropped] = drop_never_named(r);
  CHECK(kept.n_children() == 2);
  CHECK(dropped == std::vector<ChildId>{"Bob"});

  std::string big;
  for (int i = 0; i < 21; ++i) big += (i ? "," : "") + std::string("c") + std::to_string(i);
  const auto wide = parse(big + "\n");
  CHECK(validate_scm_limits(wide).size() == 1);
  CHECK(validate_scm_limits(parse("a,b\n")).empty());
}

TEST_CASE("missing files are configuration errors") {
  CHECK_THROWS_AS(load_recall_file("/nonexistent/reports.txt"), ConfigError);
  CHECK_THROWS_AS(load_recall_file("/nonexistent/matrix.csv"), ConfigError);
}
