#include "peergroups/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "peergroups/error.hpp"

namespace peergroups::experiments {
namespace {

// Runs body(t) for t in [0, n) on up to `threads` workers. Results are
// written by index, so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t t = 0; t < n; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < n; t = next++) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double skew_or_zero(const std::vector<int>& values) {
  std::vector<double> x(values.begin(), values.end());
  if (x.size() < 3 || std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return 0.0;
  return null_models::skewness(x);
}

RunRecord finish_record(const RecallMatrix& r, Method method, const PipelineConfig& config, RngSeed seed,
                        std::size_t trial) {
  RunRecord rec;
  rec.trial = trial;
  rec.method = method;
  measure_classroom(r, rec);
  const auto groups = run_pipeline(r, method, config, seed);
  rec.n_groups = groups.groups().size();
  rec.p = membership_statistic(groups, r.n_children());
  return rec;
}

template <class T>
T uniform_in(std::pair<T, T> range, Rng& rng) {
  if constexpr (std::is_integral_v<T>) {
    return std::uniform_int_distribution<T>(range.first, range.second)(rng);
  } else {
    if (range.first == range.second) return range.first;
    return std::uniform_real_distribution<T>(range.first, range.second)(rng);
  }
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::kScmFifty: return "scm-fifty";
    case Method::kScmProfile: return "scm-profile";
    case Method::kScmComponents: return "scm-components";
    case Method::kBecd: return "becd";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "scm-fifty" || name == "fifty") return Method::kScmFifty;
  if (name == "scm-profile" || name == "profile") return Method::kScmProfile;
  if (name == "scm-components" || name == "components") return Method::kScmComponents;
  if (name == "becd") return Method::kBecd;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

GroupAssignment run_pipeline(const RecallMatrix& r, Method method, const PipelineConfig& config, RngSeed seed) {
  if (method == Method::kBecd) return community::becd_groups(r, seed, config.becd);
  const auto s = scm::similarity(scm::cooccurrence(r), config.similarity);
  switch (method) {
    case Method::kScmFifty: return scm::identify_groups_fifty_percent(scm::threshold_network(s, config.threshold));
    case Method::kScmComponents: return scm::identify_groups_components(scm::threshold_network(s, config.threshold));
    case Method::kScmProfile: {
      if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
      return scm::identify_groups_profile(s, config.threshold, margins(r).row_sums);
    }
    case Method::kBecd: break;
  }
  throw ConfigError("unsupported method");
}

void measure_classroom(const RecallMatrix& r, RunRecord& record) {
  const auto m = margins(r);
  record.n_children = r.n_children();
  record.n_reports = r.n_reports();
  record.nomination_probability =
      static_cast<double>(r.total_ones()) / (static_cast<double>(r.n_reports()) * static_cast<double>(r.n_children()));
  record.nomination_skew = skew_or_zero(m.row_sums);
  record.group_size_skew = skew_or_zero(m.col_sums);
}

AuditSummary summarize(std::span<const RunRecord> records) {
  if (records.empty()) throw ConfigError("cannot summarize zero records");
  AuditSummary s;
  s.n_trials = records.size();
  double sum = 0.0;
  double positive_sum = 0.0;
  std::size_t positive = 0;
  s.min_p = records.front().p;
  s.max_p = records.front().p;
  for (const auto& r : records) {
    sum += r.p;
    s.min_p = std::min(s.min_p, r.p);
    s.max_p = std::max(s.max_p, r.p);
    if (r.p > 0.0) {
      ++positive;
      positive_sum += r.p;
    }
  }
  const double n = static_cast<double>(records.size());
  s.mean_p = sum / n;
  s.frac_p_positive = static_cast<double>(positive) / n;
  s.mean_positive_p = positive ? positive_sum / static_cast<double>(positive) : 0.0;
  if (records.size() > 1) {
    double ss = 0.0;
    for (const auto& r : records) ss += (r.p - s.mean_p) * (r.p - s.mean_p);
    s.sd_p = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::vector<std::size_t> histogram(std::span<const RunRecord> records, double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) throw ConfigError("bin width must lie in (0, 1]");
  const auto bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& r : records) {
    // Small epsilon keeps exact multiples such as 0.15 in their own bin.
    auto b = static_cast<std::size_t>(std::floor(r.p / bin_width + 1e-9));
    counts[std::min(b, bins - 1)] += 1;
  }
  return counts;
}

BenchmarkResult run_benchmark_study(const RecallMatrix& r, Method method, const PipelineConfig& config,
                                    RngSeed seed) {
  BenchmarkResult out;
  out.groups = run_pipeline(r, method, config, seed);
  out.p = membership_statistic(out.groups, r.n_children());
  return out;
}

AuditResult run_shuffle_audit(const RecallMatrix& r, Method method, const AuditOptions& options) {
  if (options.n_trials < 1) throw ConfigError("an audit needs at least one trial");
  AuditResult out;
  out.records.resize(options.n_trials);
  parallel_for(options.n_trials, options.threads, [&](std::size_t t) {
    const RngSeed trial_seed = derive_seed(options.seed, t);
    const auto shuffled = null_models::curveball_randomize(r, options.curveball_trades, trial_seed);
    out.records[t] = finish_record(shuffled, method, options.pipeline, derive_seed(trial_seed, 1), t);
  });
  out.summary = summarize(out.records);
  return out;
}

null_models::ClassroomProfile sample_profile(const ProfileRanges& ranges, Rng& rng) {
  null_models::ClassroomProfile p;
  p.n_children = uniform_in(ranges.n_children, rng);
  p.n_reports = uniform_in(ranges.n_reports, rng);
  p.nomination_probability = uniform_in(ranges.nomination_probability, rng);
  p.nomination_skew = uniform_in(ranges.nomination_skew, rng);
  p.group_size_skew = uniform_in(ranges.group_size_skew, rng);
  return p;
}

AuditResult run_profile_audit(const ProfileRanges& ranges, Method method, const AuditOptions& options) {
  if (options.n_trials < 1) throw ConfigError("an audit needs at least one trial");
  if (ranges.n_children.first > ranges.n_children.second || ranges.n_reports.first > ranges.n_reports.second ||
      ranges.nomination_probability.first > ranges.nomination_probability.second ||
      ranges.nomination_skew.first > ranges.nomination_skew.second ||
      ranges.group_size_skew.first > ranges.group_size_skew.second) {
    throw ConfigError("profile range bounds are reversed");
  }
  constexpr std::size_t kMaxAttempts = 100;
  AuditResult out;
  out.records.resize(options.n_trials);
  std::vector<std::size_t> resampled(options.n_trials, 0);
  parallel_for(options.n_trials, options.threads, [&](std::size_t t) {
    const RngSeed trial_seed = derive_seed(options.seed, t);
    Rng rng = make_rng(trial_seed);
    for (std::size_t attempt = 0;; ++attempt) {
      const auto profile = sample_profile(ranges, rng);
      try {
        null_models::validate(profile);
      } catch (const ConfigError&) {
        if (attempt + 1 >= kMaxAttempts) throw;
        ++resampled[t];
        continue;
      }
      const auto classroom = null_models::generate_classroom(profile, derive_seed(trial_seed, 2 + attempt));
      out.records[t] = finish_record(classroom.matrix, method, options.pipeline, derive_seed(trial_seed, 1), t);
      out.records[t].profile = profile;
      break;
    }
  });
  out.resampled_profiles = std::accumulate(resampled.begin(), resampled.end(), std::size_t{0});
  out.summary = summarize(out.records);
  return out;
}

}  // namespace peergroups::experiments
