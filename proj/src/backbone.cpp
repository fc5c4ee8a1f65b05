#include "peergroups/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <Eigen/Dense>

#include "peergroups/error.hpp"
#include "peergroups/kernels.hpp"
#include "peergroups/scm.hpp"

namespace peergroups::backbone {

CellProbabilityMatrix::CellProbabilityMatrix(std::size_t rows, std::size_t cols, std::vector<double> p,
                                             std::size_t iterations, double residual)
    : rows_(rows), cols_(cols), p_(std::move(p)), iterations_(iterations), residual_(residual) {
  if (p_.size() != rows * cols) throw DataError("probability matrix shape mismatch");
}

namespace {

constexpr double kUnset = -1.0;
constexpr std::size_t kExactTailLimit = 5000;

double margin_residual(const RecallMatrix& r, std::span<const double> p) {
  const auto m = margins(r);
  const std::size_t rows = r.n_children();
  const std::size_t cols = r.n_reports();
  std::vector<double> col_exp(cols, 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double row_exp = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      row_exp += p[i * cols + j];
      col_exp[j] += p[i * cols + j];
    }
    worst = std::max(worst, std::abs(row_exp - m.row_sums[i]));
  }
  for (std::size_t j = 0; j < cols; ++j) worst = std::max(worst, std::abs(col_exp[j] - m.col_sums[j]));
  return worst;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double refined_normal_upper_tail(std::span<const double> probs, std::size_t observed) {
  double mu = 0.0, var = 0.0, third = 0.0;
  for (double p : probs) {
    mu += p;
    var += p * (1.0 - p);
    third += p * (1.0 - p) * (1.0 - 2.0 * p);
  }
  const double k = static_cast<double>(observed) - 1.0;
  if (var <= 0.0) return mu >= static_cast<double>(observed) - 0.5 ? 1.0 : 0.0;
  const double sigma = std::sqrt(var);
  const double gamma = third / (var * sigma);
  const double x = (k + 0.5 - mu) / sigma;
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  const double cdf = normal_cdf(x) + gamma * (1.0 - x * x) * pdf / 6.0;
  return std::clamp(1.0 - cdf, 0.0, 1.0);
}

// Truncated convolution: bins 0..observed-1 hold P(X = k); bin `observed`
// absorbs P(X >= observed), so the tail never comes from a subtraction.
double exact_upper_tail(std::span<const double> probs, std::size_t observed) {
  const auto& k = kernels::active();
  std::vector<double> cur(observed + 1, 0.0);
  std::vector<double> next(observed + 1, 0.0);
  cur[0] = 1.0;
  for (double p : probs) {
    if (p == 0.0) continue;
    next[observed] = cur[observed] + cur[observed - 1] * p;
    k.bernoulli_step(std::span<const double>(cur.data(), observed), std::span<double>(next.data(), observed), p);
    cur.swap(next);
  }
  return std::clamp(cur[observed], 0.0, 1.0);
}


constexpr double kNewtonTolerance = 1e-3;  // solve well below the reported tolerance

// Damped Newton on log multipliers. Rows (columns) with equal targets share a
// multiplier at the solution, so the system is solved over degree classes.
void newton_refine(std::span<const double> rt, std::span<const double> ct, std::vector<double>& x,
                   std::vector<double>& y, const BicmOptions& options, std::size_t& iterations) {
  auto classes = [](std::span<const double> t, std::vector<double>& value, std::vector<double>& count,
                    std::vector<std::size_t>& of) {
    value.assign(t.begin(), t.end());
    std::sort(value.begin(), value.end());
    value.erase(std::unique(value.begin(), value.end()), value.end());
    count.assign(value.size(), 0.0);
    of.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      of[i] = static_cast<std::size_t>(std::lower_bound(value.begin(), value.end(), t[i]) - value.begin());
      count[of[i]] += 1.0;
    }
  };
  std::vector<double> rv, rn, cv, cn;
  std::vector<std::size_t> rof, cof;
  classes(rt, rv, rn, rof);
  classes(ct, cv, cn, cof);
  const std::size_t na = rv.size();
  const std::size_t nb = cv.size();

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(na + nb));
  for (std::size_t i = 0; i < rt.size(); ++i) theta[static_cast<Eigen::Index>(rof[i])] += std::log(x[i]) / rn[rof[i]];
  for (std::size_t j = 0; j < ct.size(); ++j)
    theta[static_cast<Eigen::Index>(na + cof[j])] += std::log(y[j]) / cn[cof[j]];

  const auto n = static_cast<Eigen::Index>(na + nb);
  auto evaluate = [&](const Eigen::VectorXd& t, Eigen::VectorXd& f, Eigen::MatrixXd* jac) {
    f.setZero(n);
    if (jac) jac->setZero(n, n);
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t b = 0; b < nb; ++b) {
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ib = static_cast<Eigen::Index>(na + b);
        const double q = 1.0 / (1.0 + std::exp(-(t[ia] + t[ib])));
        f[ia] += cn[b] * q;
        f[ib] += rn[a] * q;
        if (jac) {
          const double w = q * (1.0 - q);
          (*jac)(ia, ia) += cn[b] * w;
          (*jac)(ia, ib) += cn[b] * w;
          (*jac)(ib, ib) += rn[a] * w;
          (*jac)(ib, ia) += rn[a] * w;
        }
      }
    }
    for (std::size_t a = 0; a < na; ++a) f[static_cast<Eigen::Index>(a)] -= rv[a];
    for (std::size_t b = 0; b < nb; ++b) f[static_cast<Eigen::Index>(na + b)] -= cv[b];
    return f.cwiseAbs().maxCoeff();
  };

  Eigen::VectorXd f, f_try;
  Eigen::MatrixXd jac;
  double worst = evaluate(theta, f, &jac);
  while (worst >= kNewtonTolerance * options.tolerance) {
    if (iterations >= options.max_iterations || !std::isfinite(worst)) {
      throw ConvergenceError("bipartite configuration model did not converge (residual " +
                                 std::to_string(worst) + ")",
                             worst);
    }
    ++iterations;
    // The system has one gauge direction (x -> cx, y -> y/c); the minimum
    // norm solution steps orthogonally to it.
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-f);
    double scale = 1.0;
    double trial = 0.0;
    for (int halvings = 0; halvings < 40; ++halvings, scale *= 0.5) {
      trial = evaluate(theta + scale * step, f_try, nullptr);
      if (trial < worst) break;
    }
    if (!(trial < worst)) {
      throw ConvergenceError("bipartite configuration model stalled (residual " + std::to_string(worst) + ")",
                             worst);
    }
    theta += scale * step;
    worst = evaluate(theta, f, &jac);
  }
  for (std::size_t i = 0; i < rt.size(); ++i) x[i] = std::exp(theta[static_cast<Eigen::Index>(rof[i])]);
  for (std::size_t j = 0; j < ct.size(); ++j) y[j] = std::exp(theta[static_cast<Eigen::Index>(na + cof[j])]);
}

}  // namespace

CellProbabilityMatrix fit_bicm(const RecallMatrix& r, const BicmOptions& options) {
  if (r.total_ones() == 0) throw DataError("cannot fit a null model to an all-zero matrix");
  const std::size_t rows = r.n_children();
  const std::size_t cols = r.n_reports();
  const auto m = margins(r);
  std::vector<double> p(rows * cols, kUnset);

  // Peel rows and columns whose cells are forced: empty ones to 0, full ones
  // to 1 (which lowers the remaining targets on the other side).
  std::vector<long> row_target(m.row_sums.begin(), m.row_sums.end());
  std::vector<long> col_target(m.col_sums.begin(), m.col_sums.end());
  std::vector<char> row_active(rows, 1), col_active(cols, 1);
  long active_rows = static_cast<long>(rows);
  long active_cols = static_cast<long>(cols);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < rows; ++i) {
      if (!row_active[i]) continue;
      if (row_target[i] < 0 || row_target[i] > active_cols) throw DataError("inconsistent margins");
      if (row_target[i] != 0 && row_target[i] != active_cols) continue;
      const double v = row_target[i] == 0 ? 0.0 : 1.0;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!col_active[j]) continue;
        p[i * cols + j] = v;
        if (v == 1.0) --col_target[j];
      }
      row_active[i] = 0;
      --active_rows;
      changed = true;
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!col_active[j]) continue;
      if (col_target[j] < 0 || col_target[j] > active_rows) throw DataError("inconsistent margins");
      if (col_target[j] != 0 && col_target[j] != active_rows) continue;
      const double v = col_target[j] == 0 ? 0.0 : 1.0;
      for (std::size_t i = 0; i < rows; ++i) {
        if (!row_active[i]) continue;
        p[i * cols + j] = v;
        if (v == 1.0) --row_target[i];
      }
      col_active[j] = 0;
      --active_cols;
      changed = true;
    }
  }

  std::vector<std::size_t> ri, cj;
  for (std::size_t i = 0; i < rows; ++i)
    if (row_active[i]) ri.push_back(i);
  for (std::size_t j = 0; j < cols; ++j)
    if (col_active[j]) cj.push_back(j);

  std::size_t iterations = 0;
  if (!ri.empty() && !cj.empty()) {
    const auto& k = kernels::active();
    std::vector<double> rt(ri.size()), ct(cj.size());
    for (std::size_t a = 0; a < ri.size(); ++a) rt[a] = static_cast<double>(row_target[ri[a]]);
    for (std::size_t b = 0; b < cj.size(); ++b) ct[b] = static_cast<double>(col_target[cj[b]]);
    const double total = std::accumulate(rt.begin(), rt.end(), 0.0);
    std::vector<double> x(ri.size()), y(cj.size()), x_next(ri.size());
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = rt[a] / std::sqrt(total);
    for (std::size_t b = 0; b < y.size(); ++b) y[b] = ct[b] / std::sqrt(total);

    // A short run of the alternating fixed point gets close cheaply; Newton
    // finishes, since the fixed point can crawl for long-tailed margins.
    const std::size_t warm = std::min<std::size_t>(options.max_iterations, 200);
    double residual = 0.0;
    for (;;) {
      for (std::size_t b = 0; b < y.size(); ++b) y[b] = ct[b] / k.ratio_sum(y[b], x);
      residual = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) {
        const double s = k.ratio_sum(x[a], y);
        residual = std::max(residual, std::abs(rt[a] - x[a] * s));
        x_next[a] = rt[a] / s;
      }
      ++iterations;
      if (residual < kNewtonTolerance * options.tolerance || iterations >= warm) break;
      x.swap(x_next);
    }
    if (residual >= kNewtonTolerance * options.tolerance) {
      newton_refine(rt, ct, x, y, options, iterations);
    }
    for (std::size_t a = 0; a < ri.size(); ++a) {
      for (std::size_t b = 0; b < cj.size(); ++b) {
        const double xy = x[a] * y[b];
        p[ri[a] * cols + cj[b]] = xy / (1.0 + xy);
      }
    }
  }

  const double residual = margin_residual(r, p);
  if (residual >= options.tolerance) {
    throw ConvergenceError("bipartite configuration model residual " + std::to_string(residual) +
                               " above tolerance",
                           residual);
  }
  return CellProbabilityMatrix(rows, cols, std::move(p), iterations, residual);
}

double poisson_binomial_upper_tail(std::span<const double> probs, std::size_t observed, TailMethod method) {
  if (observed == 0) return 1.0;
  if (observed > probs.size()) return 0.0;
  const bool exact = method == TailMethod::kExact ||
                     (method == TailMethod::kAuto && probs.size() <= kExactTailLimit);
  return exact ? exact_upper_tail(probs, observed) : refined_normal_upper_tail(probs, observed);
}

BackboneResult extract_backbone(const RecallMatrix& r, const BackboneOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  const auto p = fit_bicm(r, options.bicm);
  const auto c = scm::cooccurrence(r);
  const std::size_t n = r.n_children();
  const std::size_t m = r.n_reports();

  BackboneResult out;
  out.n = n;
  out.alpha = options.alpha;
  out.correction = options.correction;
  out.pvalues.assign(n * n, 1.0);
  out.network = PeerNetwork(n);

  std::vector<std::tuple<double, std::size_t, std::size_t>> tested;
  std::vector<double> probs(m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pi = p.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto observed = c(i, j);
      if (observed < 1) continue;
      const auto pj = p.row(j);
      for (std::size_t k = 0; k < m; ++k) probs[k] = pi[k] * pj[k];
      const double pv = poisson_binomial_upper_tail(probs, static_cast<std::size_t>(observed));
      out.pvalues[i * n + j] = pv;
      out.pvalues[j * n + i] = pv;
      tested.emplace_back(pv, i, j);
    }
  }
  out.tested_dyads = tested.size();
  out.adjusted_pvalues = out.pvalues;

  if (options.correction == Correction::kHolm) {
    std::sort(tested.begin(), tested.end());
    const double total = static_cast<double>(tested.size());
    double running = 0.0;
    for (std::size_t rank = 0; rank < tested.size(); ++rank) {
      auto [pv, i, j] = tested[rank];
      running = std::max(running, std::min(1.0, (total - static_cast<double>(rank)) * pv));
      out.adjusted_pvalues[i * n + j] = running;
      out.adjusted_pvalues[j * n + i] = running;
    }
  }

  for (const auto& [pv, i, j] : tested) {
    if (out.adjusted_pvalues[i * n + j] <= options.alpha) out.network.set_edge(i, j);
  }
  return out;
}

}  // namespace peergroups::backbone
