#include "peergroups/null_models.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "peergroups/error.hpp"

namespace peergroups::null_models {
namespace {

constexpr std::size_t kMaxReportSize = 20;
constexpr double kMinShape = 0.05;
constexpr double kMaxConcentration = 200.0;
constexpr double kSalienceConcentration = 2.0;

double sample_beta(BetaShape shape, Rng& rng) {
  std::gamma_distribution<double> ga(shape.alpha, 1.0);
  std::gamma_distribution<double> gb(shape.beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y > 0.0) return x / (x + y);
  // Both gamma draws underflowed; fall back to the Bernoulli limit.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < shape.alpha / (shape.alpha + shape.beta) ? 1.0 : 0.0;
}

// Bisection on a monotone function; `increasing` gives its direction.
template <class F>
double bisect(F&& f, double lo, double hi, double target, bool increasing, int steps = 200) {
  for (int it = 0; it < steps; ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool below = f(mid) < target;
    if (below == increasing) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Inclusion probabilities proportional to weight for a sample of size k,
// capped at 1 with the excess spread over the uncapped items.
std::vector<double> inclusion_probabilities(std::span<const double> weights, std::size_t k) {
  const std::size_t n = weights.size();
  std::vector<double> pi(n, 1.0);
  if (k >= n) return pi;
  std::vector<char> capped(n, 0);
  for (bool changed = true; changed;) {
    changed = false;
    double free_weight = 0.0;
    std::size_t n_capped = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) ++n_capped;
      else free_weight += weights[i];
    }
    const double scale = static_cast<double>(k - n_capped) / free_weight;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) {
        pi[i] = 1.0;
      } else {
        pi[i] = weights[i] * scale;
        if (pi[i] >= 1.0) {
          capped[i] = 1;
          changed = true;
        }
      }
    }
  }
  return pi;
}

// Skewness of row sums expected across children when every report of size
// s includes child i independently with probability pi_i(s): the spread of
// the expected sums plus the Bernoulli noise around them.
double expected_row_sum_skew(std::span<const double> weights, std::span<const std::size_t> sizes,
                             std::span<const std::size_t> counts) {
  const std::size_t n = weights.size();
  std::vector<double> e(n, 0.0), v(n, 0.0), t(n, 0.0);
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const auto pi = inclusion_probabilities(weights, sizes[g]);
    const double c = static_cast<double>(counts[g]);
    for (std::size_t i = 0; i < n; ++i) {
      const double q = pi[i] * (1.0 - pi[i]);
      e[i] += c * pi[i];
      v[i] += c * q;
      t[i] += c * q * (1.0 - 2.0 * pi[i]);
    }
  }
  const double nn = static_cast<double>(n);
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / nn;
  double m2 = 0.0, m3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = e[i] - mean;
    m2 += d * d + v[i];
    m3 += d * d * d + 3.0 * d * v[i] + t[i];
  }
  m2 /= nn;
  m3 /= nn;
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

// Randomized systematic sampling of k items without replacement, with
// inclusion probabilities proportional to weight (capped at 1, the excess
// spread over the uncapped items).
std::vector<std::size_t> weighted_sample(std::span<const double> weights, std::size_t k, Rng& rng) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> out;
  if (k >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  const auto pi = inclusion_probabilities(weights, k);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const double start = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cum = 0.0;
  double next = start;
  for (std::size_t t = 0; t < n && out.size() < k; ++t) {
    cum += pi[order[t]];
    // The last item closes the sum exactly, whatever the rounding.
    if (t + 1 == n) cum = static_cast<double>(k) + 1.0;
    if (cum > next) {
      out.push_back(order[t]);
      next += 1.0;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

RecallMatrix curveball_randomize(const RecallMatrix& r, std::optional<std::size_t> n_trades, RngSeed seed) {
  const std::size_t n = r.n_children();
  const std::size_t trades = n_trades.value_or(5 * n);
  if (n < 2 || trades == 0) return r;

  std::vector<std::vector<std::size_t>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = r.child_reports(i);

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> shared, only_a, only_b, pool;
  for (std::size_t t = 0; t < trades; ++t) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    shared.clear();
    only_a.clear();
    only_b.clear();
    std::set_intersection(rows[a].begin(), rows[a].end(), rows[b].begin(), rows[b].end(),
                          std::back_inserter(shared));
    std::set_difference(rows[a].begin(), rows[a].end(), rows[b].begin(), rows[b].end(),
                        std::back_inserter(only_a));
    std::set_difference(rows[b].begin(), rows[b].end(), rows[a].begin(), rows[a].end(),
                        std::back_inserter(only_b));
    if (only_a.empty() || only_b.empty()) continue;
    pool = only_a;
    pool.insert(pool.end(), only_b.begin(), only_b.end());
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto split = pool.begin() + static_cast<std::ptrdiff_t>(only_a.size());
    auto rebuild = [&](std::vector<std::size_t>& row, auto first, auto last) {
      row = shared;
      row.insert(row.end(), first, last);
      std::sort(row.begin(), row.end());
    };
    rebuild(rows[a], pool.begin(), split);
    rebuild(rows[b], split, pool.end());
  }

  std::vector<std::uint8_t> entries(n * r.n_reports(), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : rows[i]) entries[i * r.n_reports() + j] = 1;
  return RecallMatrix::from_dense(r.children(), r.n_reports(), entries, r.report_ids());
}

double beta_skewness(BetaShape s) {
  const double a = s.alpha;
  const double b = s.beta;
  return 2.0 * (b - a) * std::sqrt(a + b + 1.0) / ((a + b + 2.0) * std::sqrt(a * b));
}

BetaShape beta_for_mean_and_skew(double mean, double target_skew) {
  if (!(mean > 0.0 && mean < 1.0)) throw ConfigError("Beta mean must lie in (0, 1)");
  auto shape = [mean](double nu) { return BetaShape{mean * nu, (1.0 - mean) * nu}; };
  const double nu_min = kMinShape / std::min(mean, 1.0 - mean);
  const double nu_max = std::max(nu_min, kMaxConcentration);
  // At fixed mean, |skew| falls monotonically with the concentration and its
  // sign is that of 1 - 2 mean. Targets outside the reachable band are clamped.
  auto skew = [&](double nu) { return beta_skewness(shape(nu)); };
  const double s_lo = skew(nu_max);
  const double s_hi = skew(nu_min);
  const double reach_min = std::min(s_lo, s_hi);
  const double reach_max = std::max(s_lo, s_hi);
  if (target_skew <= reach_min) return shape(s_lo <= s_hi ? nu_max : nu_min);
  if (target_skew >= reach_max) return shape(s_lo >= s_hi ? nu_max : nu_min);
  const bool increasing = s_lo > s_hi;
  // Work in log-concentration for numerical spread.
  const double log_nu = bisect([&](double t) { return skew(std::exp(t)); }, std::log(nu_min),
                               std::log(nu_max), target_skew, increasing);
  return shape(std::exp(log_nu));
}

BetaShape beta_for_skew(double target_skew, double concentration) {
  if (!(concentration > 0.0)) throw ConfigError("Beta concentration must be positive");
  const double lo = kMinShape / concentration;
  const double hi = 1.0 - lo;
  auto skew = [&](double mean) { return beta_skewness({mean * concentration, (1.0 - mean) * concentration}); };
  // Skew decreases in the mean.
  const double mean = target_skew >= skew(lo)   ? lo
                      : target_skew <= skew(hi) ? hi
                                                : bisect(skew, lo, hi, target_skew, false);
  return {mean * concentration, (1.0 - mean) * concentration};
}

void validate(const ClassroomProfile& p) {
  if (p.n_children < 2) throw ConfigError("a classroom needs at least 2 children");
  if (p.n_reports < 1) throw ConfigError("a classroom needs at least 1 report");
  if (!(p.nomination_probability > 0.0 && p.nomination_probability < 1.0))
    throw ConfigError("nomination probability must lie in (0, 1)");
  if (!std::isfinite(p.nomination_skew) || !std::isfinite(p.group_size_skew))
    throw ConfigError("skew targets must be finite");
}

GeneratedClassroom generate_classroom(const ClassroomProfile& profile, RngSeed seed) {
  validate(profile);
  const std::size_t n = profile.n_children;
  const std::size_t max_size = std::min(kMaxReportSize, n);
  const double target_mean =
      std::clamp(profile.nomination_probability * static_cast<double>(n), 1.0, static_cast<double>(max_size));
  const double unit_mean = std::clamp((target_mean - 1.0) / static_cast<double>(max_size - 1), 0.01, 0.99);
  const BetaShape size_shape = beta_for_mean_and_skew(unit_mean, profile.group_size_skew);

  Rng rng = make_rng(seed);
  std::vector<std::size_t> sizes(profile.n_reports);
  for (auto& size : sizes) {
    const double x = sample_beta(size_shape, rng);
    size = std::min(n, 1 + static_cast<std::size_t>(std::lround(x * static_cast<double>(max_size - 1))));
  }
  std::vector<double> uniforms(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (auto& u : uniforms) {
    do u = unif(rng);
    while (u == 0.0);
  }

  // Salience weights are Beta quantiles of fixed uniforms; the Beta mean (at
  // concentration 2) is chosen so the skew expected in the realized row sums,
  // given these report sizes, matches the target.
  std::vector<std::size_t> distinct(sizes), counts;
  std::sort(distinct.begin(), distinct.end());
  for (std::size_t k = 0; k < distinct.size();) {
    std::size_t next = k;
    while (next < distinct.size() && distinct[next] == distinct[k]) ++next;
    counts.push_back(next - k);
    k = next;
  }
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> weights(n);
  auto fill_weights = [&](double mean) {
    const double a = mean * kSalienceConcentration;
    const double b = (1.0 - mean) * kSalienceConcentration;
    for (std::size_t i = 0; i < n; ++i) weights[i] = std::max(boost::math::ibeta_inv(a, b, uniforms[i]), 1e-12);
  };
  auto realized_skew = [&](double mean) {
    fill_weights(mean);
    return expected_row_sum_skew(weights, distinct, counts);
  };
  // With only n fixed uniforms the curve is not monotone near the ends, so
  // scan a grid, bisect inside the first bracketing cell, else take the
  // closest grid point.
  const double lo = kMinShape / kSalienceConcentration;
  const double hi = 1.0 - lo;
  constexpr int kGrid = 40;
  const double target = profile.nomination_skew;
  std::vector<double> grid(kGrid + 1), value(kGrid + 1);
  for (int g = 0; g <= kGrid; ++g) {
    grid[g] = lo + (hi - lo) * g / kGrid;
    value[g] = realized_skew(grid[g]);
  }
  double mean = grid[0];
  double best = std::abs(value[0] - target);
  bool bracketed = false;
  for (int g = 0; g < kGrid && !bracketed; ++g) {
    if ((value[g] - target) * (value[g + 1] - target) <= 0.0) {
      mean = bisect(realized_skew, grid[g], grid[g + 1], target, value[g + 1] > value[g], 40);
      bracketed = true;
    }
  }
  for (int g = 1; g <= kGrid && !bracketed; ++g) {
    if (std::abs(value[g] - target) < best) {
      best = std::abs(value[g] - target);
      mean = grid[g];
    }
  }
  fill_weights(mean);

  std::vector<std::vector<std::size_t>> reports(profile.n_reports);
  for (std::size_t j = 0; j < reports.size(); ++j) reports[j] = weighted_sample(weights, sizes[j], rng);

  std::vector<ChildId> children;
  children.reserve(n);
  for (std::size_t i = 0; i < n; ++i) children.push_back("c" + std::to_string(i + 1));
  GeneratedClassroom out{RecallMatrix::from_reports(std::move(children), reports), {}};
  out.margins = margins(out.matrix);
  return out;
}

double skewness(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3) throw DataError("skewness needs at least 3 values");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }))
    throw DataError("skewness of a constant vector is undefined");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  const double g1 = m3 / std::pow(m2, 1.5);
  const double nn = static_cast<double>(n);
  return g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
}

}  // namespace peergroups::null_models
