#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "peergroups/backbone.hpp"
#include "peergroups/error.hpp"
#include "peergroups/fixtures.hpp"
#include "peergroups/null_models.hpp"
#include "peergroups/scm.hpp"

using namespace peergroups;
using namespace peergroups::backbone;

namespace {

double expected_margin_error(const RecallMatrix& r, const CellProbabilityMatrix& p) {
  const auto m = margins(r);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.n_children(); ++i) {
    long double s = 0;
    for (std::size_t j = 0; j < r.n_reports(); ++j) s += p(i, j);
    worst = std::max(worst, static_cast<double>(std::abs(s - m.row_sums[i])));
  }
  for (std::size_t j = 0; j < r.n_reports(); ++j) {
    long double s = 0;
    for (std::size_t i = 0; i < r.n_children(); ++i) s += p(i, j);
    worst = std::max(worst, static_cast<double>(std::abs(s - m.col_sums[j])));
  }
  return worst;
}

RecallMatrix surrogate() {
  std::istringstream in{std::string(fixtures::surrogate_classroom_text())};
  return load_reports(in);
}

}  // namespace

TEST_CASE("upper tail equals enumeration over all outcomes, m <= 12") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t m = 1 + t % 12;
    std::vector<double> p(m);
    for (auto& x : p) x = t % 5 == 0 ? std::round(u(rng) * 4) / 4 : u(rng);
    for (std::size_t k = 0; k <= m; ++k)
      worst = std::max(worst, std::abs(poisson_binomial_upper_tail(p, k, TailMethod::kExact) -
                                       oracle::tail_by_enumeration(p, k)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("upper tail special cases") {
  const std::vector<double> p{0.2, 0.7, 0.4};
  CHECK(poisson_binomial_upper_tail(p, 0) == 1.0);
  CHECK(poisson_binomial_upper_tail(std::vector<double>{1.0, 1.0}, 2) == 1.0);
  CHECK(poisson_binomial_upper_tail(p, 4) == 0.0);
  CHECK(poisson_binomial_upper_tail(std::vector<double>{0.0, 0.0}, 1) == 0.0);
}

TEST_CASE("equal probabilities reduce to the binomial survival function") {
  for (std::size_t m : {5u, 20u, 61u, 200u}) {
    for (double prob : {0.01, 0.13, 0.5, 0.9}) {
      const std::vector<double> p(m, prob);
      for (std::size_t k = 0; k <= m; k += 1 + m / 20)
        CHECK(poisson_binomial_upper_tail(p, k) == doctest::Approx(oracle::binomial_tail(m, prob, k)).epsilon(1e-10).scale(1e-300));
    }
  }
}

TEST_CASE("upper tail is non-increasing in the observed count") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> p(1 + t * 3);
    for (auto& x : p) x = u(rng) * u(rng);
    double prev = 1.0;
    for (std::size_t k = 0; k <= p.size(); ++k) {
      const double cur = poisson_binomial_upper_tail(p, k);
      CHECK(cur <= prev + 1e-15);  // rounding near 1
      CHECK(cur >= 0.0);
      prev = cur;
    }
  }
}

TEST_CASE("refined normal approximation tracks the exact tail for many trials") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  std::vector<double> p(6000);
  for (auto& x : p) x = u(rng);
  const double mu = std::accumulate(p.begin(), p.end(), 0.0);
  for (double shift : {-40.0, 0.0, 30.0, 60.0}) {
    const auto k = static_cast<std::size_t>(mu + shift);
    const double exact = poisson_binomial_upper_tail(p, k, TailMethod::kExact);
    CHECK(poisson_binomial_upper_tail(p, k, TailMethod::kRefinedNormal) == doctest::Approx(exact).epsilon(0.02).scale(1e-3));
    CHECK(poisson_binomial_upper_tail(p, k) == poisson_binomial_upper_tail(p, k, TailMethod::kRefinedNormal));
  }
}

TEST_CASE("BiCM: saturated and exchangeable matrices") {
  const auto ones = RecallMatrix::from_dense({"a", "b", "c"}, 2, std::vector<std::uint8_t>(6, 1));
  const auto p1 = fit_bicm(ones);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(p1(i, j) == 1.0);

  // Every row names k = 2 of m = 4 reports, every report has 3 of 6 children.
  std::vector<std::uint8_t> e{1, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 1};
  const auto reg = RecallMatrix::from_dense({"a", "b", "c", "d", "e", "f"}, 4, e);
  const auto p2 = fit_bicm(reg);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(p2(i, j) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("BiCM reproduces observed margins") {
  const auto r = surrogate();
  const auto p = fit_bicm(r);
  CHECK(p.residual() < 1e-6);
  CHECK(expected_margin_error(r, p) < 1e-6);

  std::mt19937_64 rng(13);
  for (int t = 0; t < 60; ++t) {
    const auto m = oracle::random_recall(3 + t % 38, 2 + (t * 13) % 199, 0.05 + 0.01 * (t % 30), rng);
    const auto fit = fit_bicm(m);
    CHECK(expected_margin_error(m, fit) < 1e-6);
    for (std::size_t i = 0; i < m.n_children(); ++i)
      for (double v : fit.row(i)) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("BiCM handles forced rows and columns") {
  // Row 0 full, row 3 empty; column 0 is empty once row 0 is peeled.
  std::vector<std::uint8_t> e{1, 1, 1, 1, 0, 1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0};
  const auto r = RecallMatrix::from_dense({"a", "b", "c", "d"}, 4, e);
  const auto p = fit_bicm(r);
  CHECK(expected_margin_error(r, p) < 1e-6);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(p(0, j) == 1.0);
    CHECK(p(3, j) == 0.0);
  }
}

TEST_CASE("BiCM reports non-convergence with its residual") {
  const auto r = surrogate();
  try {
    fit_bicm(r, {.tolerance = 1e-6, .max_iterations = 1});
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 1e-6);
  }
}

TEST_CASE("backbone: alpha validation and alpha = 1") {
  const auto r = surrogate();
  CHECK_THROWS_AS(extract_backbone(r, {.alpha = 0.0}), ConfigError);
  CHECK_THROWS_AS(extract_backbone(r, {.alpha = 1.5}), ConfigError);
  const auto all = extract_backbone(r, {.alpha = 1.0});
  const auto c = scm::cooccurrence(r);
  for (std::size_t i = 0; i < r.n_children(); ++i)
    for (std::size_t j = 0; j < r.n_children(); ++j) {
      if (i == j) continue;
      CHECK(all.network.has_edge(i, j) == (c(i, j) >= 1));
      CHECK(all.pvalue(i, j) >= 0.0);
      CHECK(all.pvalue(i, j) <= 1.0);
    }
}

TEST_CASE("backbone: planted two-block classroom") {
  // Reports always name four or five children from one block.
  std::mt19937_64 rng(14);
  std::vector<std::vector<std::size_t>> reports;
  for (int k = 0; k < 80; ++k) {
    const std::size_t base = k % 2 == 0 ? 0 : 6;
    std::vector<std::size_t> block(6);
    std::iota(block.begin(), block.end(), base);
    std::shuffle(block.begin(), block.end(), rng);
    block.resize(k % 3 == 0 ? 4 : 5);
    reports.push_back(block);
  }
  std::vector<ChildId> kids;
  for (int i = 0; i < 12; ++i) kids.push_back("k" + std::to_string(i));
  const auto r = RecallMatrix::from_reports(kids, reports);
  const auto b = extract_backbone(r);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = i + 1; j < 12; ++j) CHECK(b.network.has_edge(i, j) == ((i < 6) == (j < 6)));
}

TEST_CASE("backbone: Holm adjustment is monotone and never below raw p") {
  const auto r = surrogate();
  const auto b = extract_backbone(r, {.alpha = 0.05, .correction = Correction::kHolm});
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < b.n; ++i)
    for (std::size_t j = i + 1; j < b.n; ++j) {
      CHECK(b.adjusted_pvalues[i * b.n + j] >= b.pvalues[i * b.n + j]);
      CHECK(b.network.has_edge(i, j) == (b.adjusted_pvalues[i * b.n + j] <= 0.05));
      pairs.emplace_back(b.pvalues[i * b.n + j], b.adjusted_pvalues[i * b.n + j]);
    }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t k = 1; k < pairs.size(); ++k) CHECK(pairs[k].second >= pairs[k - 1].second);
  const auto raw = extract_backbone(r);
  CHECK(b.network.edge_count() <= raw.network.edge_count());
}

TEST_CASE("backbone edges do not depend on child or report order") {
  std::mt19937_64 rng(15);
  const auto r = surrogate();
  std::vector<std::size_t> rp(r.n_children()), cp(r.n_reports());
  std::iota(rp.begin(), rp.end(), std::size_t{0});
  std::iota(cp.begin(), cp.end(), std::size_t{0});
  std::shuffle(rp.begin(), rp.end(), rng);
  std::shuffle(cp.begin(), cp.end(), rng);
  std::vector<std::uint8_t> e(r.n_children() * r.n_reports());
  std::vector<ChildId> kids;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    kids.push_back(r.children()[rp[i]]);
    for (std::size_t j = 0; j < cp.size(); ++j) e[i * cp.size() + j] = r.at(rp[i], cp[j]);
  }
  const auto permuted = RecallMatrix::from_dense(kids, cp.size(), e);
  const auto a = extract_backbone(r);
  const auto b = extract_backbone(permuted);
  for (std::size_t i = 0; i < rp.size(); ++i)
    for (std::size_t j = 0; j < rp.size(); ++j)
      if (i != j) CHECK(b.network.has_edge(i, j) == a.network.has_edge(rp[i], rp[j]));
}

TEST_CASE("backbone on fixed-margin shuffles retains few dyads") {
  const auto r = surrogate();
  std::size_t tested = 0;
  std::size_t kept = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto b = extract_backbone(null_models::curveball_randomize(r, std::nullopt, RngSeed{s}));
    tested += b.tested_dyads;
    kept += b.network.edge_count();
  }
  CHECK(static_cast<double>(kept) / static_cast<double>(tested) <= 0.05);
}
