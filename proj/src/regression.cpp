#include "peergroups/regression.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "peergroups/error.hpp"

namespace peergroups::regression {

RegressionResult ols(std::span<const double> predictors, std::span<const double> outcome,
                     const std::vector<std::string>& names) {
  const auto n = static_cast<Eigen::Index>(outcome.size());
  const auto k = static_cast<Eigen::Index>(names.size());
  if (predictors.size() != outcome.size() * names.size()) throw DataError("design matrix shape mismatch");
  if (n < k + 2) throw DataError("too few observations for the number of predictors");

  Eigen::MatrixXd x(n, k + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) x(i, j + 1) = predictors[static_cast<std::size_t>(i * k + j)];
    y(i) = outcome[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < k + 1) throw DataError("design matrix is rank deficient");

  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::LDLT<Eigen::MatrixXd> normal(xtx);
  const Eigen::VectorXd b = normal.solve(x.transpose() * y);
  const Eigen::VectorXd residual = y - x * b;
  const double rss = residual.squaredNorm();
  const double y_mean = y.mean();
  const double tss = (y.array() - y_mean).square().sum();
  const double sigma2 = rss / static_cast<double>(n - k - 1);
  const Eigen::MatrixXd cov = normal.solve(Eigen::MatrixXd::Identity(k + 1, k + 1)) * sigma2;

  auto sample_sd = [n](const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(n - 1));
  };
  const double sd_y = sample_sd(y);

  RegressionResult out;
  out.n_observations = static_cast<std::size_t>(n);
  out.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 0.0;
  out.coefficients.push_back({"intercept", b(0), std::sqrt(std::max(cov(0, 0), 0.0)), 0.0});
  for (Eigen::Index j = 0; j < k; ++j) {
    Coefficient c;
    c.name = names[static_cast<std::size_t>(j)];
    c.b = b(j + 1);
    c.se = std::sqrt(std::max(cov(j + 1, j + 1), 0.0));
    c.beta = sd_y > 0.0 ? c.b * sample_sd(x.col(j + 1)) / sd_y : 0.0;
    out.coefficients.push_back(std::move(c));
  }
  return out;
}

RegressionResult ols_regression(std::span<const experiments::RunRecord> records) {
  if (records.size() < 10) throw DataError("regression needs at least 10 records");
  const std::vector<std::string> names{"n_children", "n_reports", "nomination_probability", "nomination_skew",
                                       "group_size_skew"};
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(records.size() * names.size());
  for (const auto& r : records) {
    x.push_back(static_cast<double>(r.n_children));
    x.push_back(static_cast<double>(r.n_reports));
    x.push_back(r.nomination_probability);
    x.push_back(r.nomination_skew);
    x.push_back(r.group_size_skew);
    y.push_back(r.p);
  }
  return ols(x, y, names);
}

}  // namespace peergroups::regression
