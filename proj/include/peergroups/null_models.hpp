#pragma once

// Random recall matrices: margin-preserving shuffles of an observed matrix
// and parametric synthetic classrooms.

#include <cstddef>
#include <optional>
#include <span>

#include "peergroups/recall.hpp"
#include "peergroups/rng.hpp"

namespace peergroups::null_models {

/// Curveball trades: pick two rows, pool the reports only one of them
/// appears in, and redeal that pool keeping both row sizes. Row and column
/// sums are preserved exactly. `n_trades` defaults to 5 x n_children.
RecallMatrix curveball_randomize(const RecallMatrix& r, std::optional<std::size_t> n_trades,
                                 RngSeed seed);

/// Five-parameter synthetic classroom.
struct ClassroomProfile {
  std::size_t n_children = 26;
  std::size_t n_reports = 61;
  /// Expected fraction of the classroom named in one report, in (0, 1).
  double nomination_probability = 0.2;
  /// Target skewness of how often each child is named.
  double nomination_skew = 0.0;
  /// Target skewness of report sizes.
  double group_size_skew = 0.0;
};

/// Throws ConfigError for profiles the generator cannot honour.
void validate(const ClassroomProfile& profile);

struct GeneratedClassroom {
  RecallMatrix matrix;
  Margins margins;
};

/// Report sizes come from a moment-matched Beta on [1, min(20, n_children)];
/// child salience weights are Beta quantiles whose mean is tuned so the
/// expected skew of the realized row sums meets the nomination skew. Each
/// report is a systematic sample without replacement with inclusion
/// probability proportional to salience (capped at 1).
GeneratedClassroom generate_classroom(const ClassroomProfile& profile, RngSeed seed);

/// Adjusted Fisher-Pearson sample skewness G1. Throws DataError for fewer
/// than three values or a constant vector.
double skewness(std::span<const double> x);

/// Beta(alpha, beta) parameters with mean `mean` whose skewness is as close
/// to `target_skew` as the mean permits.
struct BetaShape {
  double alpha;
  double beta;
};
BetaShape beta_for_mean_and_skew(double mean, double target_skew);
/// Beta with concentration alpha + beta = `concentration` and the given skew.
BetaShape beta_for_skew(double target_skew, double concentration = 2.0);
double beta_skewness(BetaShape shape);

}  // namespace peergroups::null_models
