#pragma once

// Stochastic degree sequence model backbone of the child co-occurrence
// projection.

#include <cstddef>
#include <span>
#include <vector>

#include "peergroups/network.hpp"
#include "peergroups/recall.hpp"

namespace peergroups::backbone {

/// Null probability of each recall-matrix cell, same shape as R.
class CellProbabilityMatrix {
 public:
  CellProbabilityMatrix() = default;
  CellProbabilityMatrix(std::size_t rows, std::size_t cols, std::vector<double> p,
                        std::size_t iterations, double residual);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return p_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {p_.data() + i * cols_, cols_}; }

  std::size_t iterations() const noexcept { return iterations_; }
  /// Max absolute difference between expected and observed margins.
  double residual() const noexcept { return residual_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> p_;
  std::size_t iterations_ = 0;
  double residual_ = 0.0;
};

struct BicmOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 10000;
};

/// Maximum-entropy bipartite configuration model: p_ij = x_i y_j / (1 + x_i y_j)
/// with expected row and column sums equal to the observed ones. Rows or
/// columns that are empty or full are fixed at 0 or 1 before solving.
/// Throws ConvergenceError (carrying the residual) past max_iterations and
/// DataError for an all-zero matrix.
CellProbabilityMatrix fit_bicm(const RecallMatrix& r, const BicmOptions& options = {});

enum class TailMethod {
  kExact,          // dynamic-programming convolution
  kRefinedNormal,  // refined normal approximation
  kAuto,           // exact up to 5000 trials
};

/// P(X >= observed) for X a sum of independent Bernoulli(probs[k]).
double poisson_binomial_upper_tail(std::span<const double> probs, std::size_t observed,
                                   TailMethod method = TailMethod::kAuto);

enum class Correction { kNone, kHolm };

struct BackboneOptions {
  double alpha = 0.05;
  Correction correction = Correction::kNone;
  BicmOptions bicm{};
};

/// Dyads with zero co-occurrence are not tested: p = 1, never an edge.
struct BackboneResult {
  std::size_t n = 0;
  std::vector<double> pvalues;           // n x n, raw upper-tail p-values
  std::vector<double> adjusted_pvalues;  // n x n, after correction
  PeerNetwork network;
  double alpha = 0.05;
  Correction correction = Correction::kNone;
  std::size_t tested_dyads = 0;

  double pvalue(std::size_t i, std::size_t j) const noexcept { return pvalues[i * n + j]; }
};

/// Upper-tail test of each dyad's co-occurrence against the SDSM null;
/// edges where the (adjusted) p-value is <= alpha. Throws ConfigError for
/// alpha outside (0, 1].
BackboneResult extract_backbone(const RecallMatrix& r, const BackboneOptions& options = {});

}  // namespace peergroups::backbone
