#pragma once

// Benchmark evaluation and Monte Carlo false-positive audits.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peergroups/community.hpp"
#include "peergroups/network.hpp"
#include "peergroups/null_models.hpp"
#include "peergroups/recall.hpp"
#include "peergroups/rng.hpp"
#include "peergroups/scm.hpp"

namespace peergroups::experiments {

enum class Method { kScmFifty, kScmProfile, kScmComponents, kBecd };

std::string_view method_name(Method m) noexcept;
/// Accepts "scm-fifty", "scm-profile", "scm-components", "becd" (and the
/// short SCM rule names "fifty", "profile", "components").
Method parse_method(std::string_view name);

struct PipelineConfig {
  double threshold = scm::kDefaultThreshold;
  scm::SimilarityOptions similarity{};
  community::BecdOptions becd{};
};

/// Runs one identification pipeline end to end.
GroupAssignment run_pipeline(const RecallMatrix& r, Method method, const PipelineConfig& config,
                             RngSeed seed);

struct RunRecord {
  std::size_t trial = 0;
  Method method = Method::kScmFifty;
  /// Empty for shuffles of an observed classroom.
  std::optional<null_models::ClassroomProfile> profile;
  std::size_t n_children = 0;
  std::size_t n_reports = 0;
  /// Realized mean report size divided by the number of children.
  double nomination_probability = 0.0;
  /// Realized skewness of row sums and of column sums (0 when constant).
  double nomination_skew = 0.0;
  double group_size_skew = 0.0;
  std::size_t n_groups = 0;
  double p = 0.0;
};

struct AuditSummary {
  std::size_t n_trials = 0;
  double frac_p_positive = 0.0;
  double mean_p = 0.0;
  double sd_p = 0.0;  // sample standard deviation, 0 for one trial
  double min_p = 0.0;
  double max_p = 0.0;
  /// Mean P over trials with P > 0 (0 when there are none).
  double mean_positive_p = 0.0;
};

AuditSummary summarize(std::span<const RunRecord> records);

/// Counts of P in [0, 0.05), [0.05, 0.10), ..., [0.95, 1.0]; 20 bins.
std::vector<std::size_t> histogram(std::span<const RunRecord> records, double bin_width = 0.05);

struct BenchmarkResult {
  GroupAssignment groups;
  double p = 0.0;
};
BenchmarkResult run_benchmark_study(const RecallMatrix& r, Method method,
                                    const PipelineConfig& config = {}, RngSeed seed = {});

struct AuditOptions {
  std::size_t n_trials = 1000;
  RngSeed seed{};
  std::size_t threads = 1;
  PipelineConfig pipeline{};
  std::optional<std::size_t> curveball_trades;
};

struct AuditResult {
  std::vector<RunRecord> records;
  AuditSummary summary;
  std::size_t resampled_profiles = 0;
};

/// Trial t uses seed derive_seed(master, t); records come back in trial order
/// whatever the thread count.
AuditResult run_shuffle_audit(const RecallMatrix& r, Method method, const AuditOptions& options);

/// Inclusive bounds for each generator parameter; sampled uniformly.
struct ProfileRanges {
  std::pair<std::size_t, std::size_t> n_children{15, 40};
  std::pair<std::size_t, std::size_t> n_reports{15, 200};
  std::pair<double, double> nomination_probability{0.10, 0.45};
  std::pair<double, double> nomination_skew{-1.77, 1.99};
  std::pair<double, double> group_size_skew{-0.52, 2.37};
};

null_models::ClassroomProfile sample_profile(const ProfileRanges& ranges, Rng& rng);

AuditResult run_profile_audit(const ProfileRanges& ranges, Method method, const AuditOptions& options);

/// Fills the realized classroom characteristics of a record from R.
void measure_classroom(const RecallMatrix& r, RunRecord& record);

}  // namespace peergroups::experiments
