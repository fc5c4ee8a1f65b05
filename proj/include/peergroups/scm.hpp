#pragma once

// Social cognitive mapping: co-occurrence, correlation similarity,
// thresholding and group identification.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "peergroups/network.hpp"
#include "peergroups/recall.hpp"

namespace peergroups::scm {

/// Symmetric count matrix C = R R^T. C(i, i) is the number of reports naming i.
class CooccurrenceMatrix {
 public:
  CooccurrenceMatrix() = default;
  CooccurrenceMatrix(std::size_t n, std::vector<std::int32_t> values);

  std::size_t size() const noexcept { return n_; }
  std::int32_t operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
  std::span<const std::int32_t> values() const noexcept { return values_; }

  friend bool operator==(const CooccurrenceMatrix&, const CooccurrenceMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::int32_t> values_;
};

/// Pearson correlations between columns of C, in [-1, 1].
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

CooccurrenceMatrix cooccurrence(const RecallMatrix& r);

struct SimilarityOptions {
  /// Correlate whole columns, diagonal entries included. When false the
  /// correlation of columns i and j skips rows i and j.
  bool include_diagonal = true;
};

/// Single correlation pass. Columns with zero variance correlate 0 with
/// everything, themselves included.
SimilarityMatrix similarity(const CooccurrenceMatrix& c, const SimilarityOptions& options = {});

inline constexpr double kDefaultThreshold = 0.4;

/// Edge {i, j} iff i != j and S(i, j) >= threshold. Throws ConfigError for
/// thresholds outside [0, 1].
PeerNetwork threshold_network(const SimilarityMatrix& s, double threshold = kDefaultThreshold);

/// Groups in which every member is tied to at least half of the other
/// members. Candidate groups grow from every edge; seeds are visited by
/// descending degree, ties by child order. Overlap allowed; groups smaller
/// than two, duplicates and groups contained in another are dropped.
GroupAssignment identify_groups_fifty_percent(const PeerNetwork& n);

/// Incremental correlation-profile rule: a group starts from the most
/// salient unprocessed child and absorbs anyone with S >= threshold to at
/// least one current member. `salience` breaks seed order (higher first,
/// then child order); pass an empty span to use child order alone.
GroupAssignment identify_groups_profile(const SimilarityMatrix& s, double threshold,
                                        std::span<const int> salience = {});

/// Connected components with at least two children.
GroupAssignment identify_groups_components(const PeerNetwork& n);

/// Does `members` satisfy the 50% rule on `n`? Used for post-hoc checks.
bool satisfies_fifty_percent(const PeerNetwork& n, std::span<const std::size_t> members);

}  // namespace peergroups::scm
