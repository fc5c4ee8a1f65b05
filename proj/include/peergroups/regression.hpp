#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "peergroups/experiments.hpp"

namespace peergroups::regression {

struct Coefficient {
  std::string name;
  double b = 0.0;     // unstandardized
  double se = 0.0;    // standard error
  double beta = 0.0;  // standardized (0 for the intercept)
};

struct RegressionResult {
  std::vector<Coefficient> coefficients;  // intercept first
  double r_squared = 0.0;
  std::size_t n_observations = 0;
};

/// Ordinary least squares with an intercept, solved through the normal
/// equations. `predictors` is row-major, n_obs x names.size(). Throws
/// DataError when the design matrix is rank deficient or has too few rows.
RegressionResult ols(std::span<const double> predictors, std::span<const double> outcome,
                     const std::vector<std::string>& names);

/// P regressed on the five realized classroom characteristics: children,
/// reports, nomination probability, nomination skew, report-size skew.
/// Needs at least 10 records.
RegressionResult ols_regression(std::span<const experiments::RunRecord> records);

}  // namespace peergroups::regression
