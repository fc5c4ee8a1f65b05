#include "peergroups/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "peergroups/backbone.hpp"
#include "peergroups/community.hpp"
#include "peergroups/error.hpp"
#include "peergroups/experiments.hpp"
#include "peergroups/fixtures.hpp"
#include "peergroups/kernels.hpp"
#include "peergroups/null_models.hpp"
#include "peergroups/output.hpp"
#include "peergroups/regression.hpp"
#include "peergroups/scm.hpp"

#ifndef PEERGROUPS_VERSION
#define PEERGROUPS_VERSION "dev"
#endif

namespace peergroups::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out = ".";
};

struct ScmOptions {
  std::string input;
  double threshold = scm::kDefaultThreshold;
  std::string rule = "fifty";
  bool exclude_pair = false;
  std::string out_network = "network.csv";
  std::string out_groups = "groups.json";
};

struct BecdCliOptions {
  std::string input;
  double alpha = 0.05;
  std::string correction = "none";
  std::size_t restarts = 50;
  std::size_t exact_max_n = 12;
  std::size_t max_iterations = 10000;
  std::string out_pvalues = "pvalues.csv";
  std::string out_network = "network.csv";
  std::string out_groups = "groups.json";
};

struct SimulateOptions {
  std::string mode = "generate";
  std::string input;
  std::string profile;
  std::size_t trials = 1;
  std::optional<std::size_t> trades;
  std::string out_dir;
};

struct AuditCliOptions {
  std::string study;
  std::string method;
  std::size_t trials = 1000;
  std::string input;
  double threshold = scm::kDefaultThreshold;
  double alpha = 0.05;
  std::size_t restarts = 50;
};

// Files are collected first and written only after the whole computation
// succeeded, so a failing run leaves no partial outputs behind.
class OutputSet {
 public:
  explicit OutputSet(fs::path root) : root_(std::move(root)) {}

  void add(const std::string& name, std::string content) {
    const fs::path rel(name);
    if (rel.empty() || rel.is_absolute()) throw ConfigError("output name '" + name + "' must be a relative path");
    for (const auto& part : rel)
      if (part == "..") throw ConfigError("output name '" + name + "' escapes the output directory");
    files_.emplace_back(rel, std::move(content));
  }

  void commit() const {
    for (const auto& [rel, content] : files_) {
      const fs::path path = root_ / rel;
      fs::create_directories(path.parent_path().empty() ? root_ : path.parent_path());
      std::ofstream out(path, std::ios::binary);
      if (!out) throw ConfigError("cannot write '" + path.string() + "'");
      out << content;
      if (!out) throw ConfigError("failed writing '" + path.string() + "'");
    }
  }

 private:
  fs::path root_;
  std::vector<std::pair<fs::path, std::string>> files_;
};

Json manifest_base(const std::string& subcommand, const GlobalOptions& g) {
  Json j;
  j["schema_version"] = output::kSchemaVersion;
  j["tool"] = "peergroups";
  j["version"] = PEERGROUPS_VERSION;
  j["subcommand"] = subcommand;
  j["seed"] = g.seed;
  j["threads"] = g.threads;
  j["kernels"] = std::string(kernels::isa_name(kernels::active().isa));
  return j;
}

RecallMatrix load_input(const std::string& path) {
  if (path.empty()) throw ConfigError("an input file is required");
  if (!fs::exists(path)) throw ConfigError("input file '" + path + "' does not exist");
  return load_recall_file(path);
}

RecallMatrix surrogate_classroom() {
  std::istringstream in{std::string(fixtures::surrogate_classroom_text())};
  return load_reports(in);
}

backbone::Correction parse_correction(const std::string& s) {
  if (s == "none") return backbone::Correction::kNone;
  if (s == "holm") return backbone::Correction::kHolm;
  throw ConfigError("unknown correction '" + s + "'");
}

int run_scm(const GlobalOptions& g, const ScmOptions& o, std::ostream& out, std::ostream& err) {
  const auto r = load_input(o.input);
  for (const auto& w : validate_scm_limits(r)) err << "warning: " << w << '\n';
  if (!(o.threshold >= 0.0 && o.threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  const auto rule = experiments::parse_method(o.rule);
  if (rule == experiments::Method::kBecd) throw ConfigError("use the becd subcommand for backbone extraction");

  const auto s = scm::similarity(scm::cooccurrence(r), {.include_diagonal = !o.exclude_pair});
  const auto net = scm::threshold_network(s, o.threshold);
  GroupAssignment groups;
  switch (rule) {
    case experiments::Method::kScmFifty: groups = scm::identify_groups_fifty_percent(net); break;
    case experiments::Method::kScmComponents: groups = scm::identify_groups_components(net); break;
    default: groups = scm::identify_groups_profile(s, o.threshold, margins(r).row_sums); break;
  }
  const double p = membership_statistic(groups, r.n_children());

  OutputSet files(g.out);
  files.add(o.out_network, output::network_csv(net, r.children()));
  files.add(o.out_groups, output::groups_json(groups, r.children(), p));
  Json m = manifest_base("scm", g);
  m["config"] = {{"input", o.input},         {"threshold", o.threshold},     {"rule", o.rule},
                 {"exclude_pair", o.exclude_pair}, {"out_network", o.out_network}, {"out_groups", o.out_groups}};
  files.add("manifest.json", m.dump(2) + "\n");
  files.commit();
  out << "P = " << output::format_double(p) << '\n';
  return kOk;
}

int run_becd(const GlobalOptions& g, const BecdCliOptions& o, std::ostream& out, std::ostream& err) {
  const auto r = load_input(o.input);
  for (const auto& w : validate_scm_limits(r)) err << "warning: " << w << '\n';
  community::BecdOptions opts;
  opts.backbone.alpha = o.alpha;
  opts.backbone.correction = parse_correction(o.correction);
  opts.modularity.restarts = o.restarts;
  opts.modularity.exact_max_n = o.exact_max_n;
  opts.backbone.bicm.max_iterations = o.max_iterations;
  const auto result = community::becd(r, RngSeed{g.seed}, opts);
  const double p = membership_statistic(result.groups, r.n_children());

  OutputSet files(g.out);
  files.add(o.out_pvalues, output::pvalues_csv(result.backbone, r.children()));
  files.add(o.out_network, output::network_csv(result.backbone.network, r.children()));
  files.add(o.out_groups, output::groups_json(result.groups, r.children(), p));
  Json m = manifest_base("becd", g);
  m["config"] = {{"input", o.input},
                 {"alpha", o.alpha},
                 {"correction", o.correction},
                 {"restarts", o.restarts},
                 {"exact_max_n", o.exact_max_n},
                 {"max_iterations", o.max_iterations},
                 {"out_pvalues", o.out_pvalues},
                 {"out_network", o.out_network},
                 {"out_groups", o.out_groups}};
  m["tested_dyads"] = result.backbone.tested_dyads;
  files.add("manifest.json", m.dump(2) + "\n");
  files.commit();
  out << "P = " << output::format_double(p) << '\n';
  return kOk;
}

null_models::ClassroomProfile load_profile(const std::string& path) {
  null_models::ClassroomProfile p;
  if (path.empty()) return p;
  if (!fs::exists(path)) throw ConfigError("profile file '" + path + "' does not exist");
  std::ifstream in(path);
  Json j;
  try {
    j = Json::parse(in);
    p.n_children = j.value("n_children", p.n_children);
    p.n_reports = j.value("n_reports", p.n_reports);
    p.nomination_probability = j.value("nomination_probability", p.nomination_probability);
    p.nomination_skew = j.value("nomination_skew", p.nomination_skew);
    p.group_size_skew = j.value("group_size_skew", p.group_size_skew);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad profile JSON: ") + e.what());
  }
  null_models::validate(p);
  return p;
}

int run_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out) {
  if (o.trials < 1) throw ConfigError("--trials must be at least 1");
  const std::string dir = o.out_dir.empty() ? g.out : o.out_dir;
  OutputSet files(dir);
  Json m = manifest_base("simulate", g);
  Json config{{"mode", o.mode}, {"trials", o.trials}};
  if (o.mode == "shuffle") {
    const auto r = o.input.empty() ? surrogate_classroom() : load_input(o.input);
    config["input"] = o.input.empty() ? "builtin:surrogate" : o.input;
    config["trades"] = o.trades ? Json(*o.trades) : Json(5 * r.n_children());
    for (std::size_t t = 0; t < o.trials; ++t) {
      const auto shuffled = null_models::curveball_randomize(r, o.trades, derive_seed(RngSeed{g.seed}, t));
      char name[32];
      std::snprintf(name, sizeof(name), "trial_%04zu.txt", t);
      files.add(name, to_report_list(shuffled));
    }
  } else if (o.mode == "generate") {
    const auto profile = load_profile(o.profile);
    config["profile"] = {{"n_children", profile.n_children},
                         {"n_reports", profile.n_reports},
                         {"nomination_probability", profile.nomination_probability},
                         {"nomination_skew", profile.nomination_skew},
                         {"group_size_skew", profile.group_size_skew}};
    for (std::size_t t = 0; t < o.trials; ++t) {
      const auto c = null_models::generate_classroom(profile, derive_seed(RngSeed{g.seed}, t));
      char name[32];
      std::snprintf(name, sizeof(name), "trial_%04zu.txt", t);
      // Never-named children would vanish from a report list; keep them visible.
      std::string text = to_report_list(c.matrix);
      std::string unnamed;
      for (std::size_t i = 0; i < c.matrix.n_children(); ++i)
        if (c.margins.row_sums[i] == 0) unnamed += (unnamed.empty() ? "" : ",") + c.matrix.children()[i];
      if (!unnamed.empty()) text = "# never named: " + unnamed + "\n" + text;
      files.add(name, std::move(text));
    }
  } else {
    throw ConfigError("--mode must be shuffle or generate");
  }
  m["config"] = std::move(config);
  files.add("manifest.json", m.dump(2) + "\n");
  files.commit();
  out << "wrote " << o.trials << " recall matrices to " << dir << '\n';
  return kOk;
}

int run_audit(const GlobalOptions& g, const AuditCliOptions& o, std::ostream& out) {
  static const std::map<std::string, std::pair<char, experiments::Method>> kStudies{
      {"1", {'b', experiments::Method::kScmFifty}},  {"2", {'s', experiments::Method::kScmFifty}},
      {"3", {'p', experiments::Method::kScmFifty}},  {"4a", {'b', experiments::Method::kBecd}},
      {"4b", {'s', experiments::Method::kBecd}},     {"4c", {'p', experiments::Method::kBecd}}};
  const auto study = kStudies.find(o.study);
  if (study == kStudies.end()) throw ConfigError("--study must be one of 1, 2, 3, 4a, 4b, 4c");
  const char kind = study->second.first;
  const auto method = o.method.empty() ? study->second.second : experiments::parse_method(o.method);
  if (o.trials < 1) throw ConfigError("--trials must be at least 1");

  experiments::AuditOptions opts;
  opts.n_trials = o.trials;
  opts.seed = RngSeed{g.seed};
  opts.threads = g.threads;
  opts.pipeline.threshold = o.threshold;
  opts.pipeline.becd.backbone.alpha = o.alpha;
  opts.pipeline.becd.modularity.restarts = o.restarts;

  std::optional<RecallMatrix> input;
  if (kind != 'p') input = o.input.empty() ? surrogate_classroom() : load_input(o.input);

  OutputSet files(g.out);
  experiments::AuditResult result;
  if (kind == 'b') {
    const auto bench = experiments::run_benchmark_study(*input, method, opts.pipeline, RngSeed{g.seed});
    experiments::RunRecord rec;
    rec.method = method;
    experiments::measure_classroom(*input, rec);
    rec.n_groups = bench.groups.groups().size();
    rec.p = bench.p;
    result.records = {rec};
    result.summary = experiments::summarize(result.records);
    files.add("groups.json", output::groups_json(bench.groups, input->children(), bench.p));
  } else if (kind == 's') {
    result = experiments::run_shuffle_audit(*input, method, opts);
  } else {
    result = experiments::run_profile_audit(experiments::ProfileRanges{}, method, opts);
  }

  files.add("records.csv", output::records_csv(result.records));
  files.add("summary.json", output::summary_json(result.summary));
  files.add("histogram.csv", output::histogram_csv(result.records));
  if (o.study == "3") files.add("regression.json", output::regression_json(regression::ols_regression(result.records)));

  Json m = manifest_base("audit", g);
  m["config"] = {{"study", o.study},
                 {"method", std::string(experiments::method_name(method))},
                 {"trials", kind == 'b' ? std::size_t{1} : o.trials},
                 {"input", kind == 'p' ? "generated" : (o.input.empty() ? "builtin:surrogate" : o.input)},
                 {"threshold", o.threshold},
                 {"alpha", o.alpha},
                 {"restarts", o.restarts}};
  m["trial_seeds"] = "derive_seed(seed, trial_index)";
  if (kind == 'p') m["resampled_profiles"] = result.resampled_profiles;
  files.add("manifest.json", m.dump(2) + "\n");
  files.commit();

  const auto& s = result.summary;
  out << "study " << o.study << " (" << experiments::method_name(method) << "): trials=" << s.n_trials
      << " frac_P_positive=" << output::format_double(s.frac_p_positive)
      << " mean_P=" << output::format_double(s.mean_p) << " sd_P=" << output::format_double(s.sd_p) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Peer-group identification from peer-report data, with null-model audits", "peergroups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PEERGROUPS_VERSION);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master RNG seed")->envname("PEERGROUPS_SEED");
  app.add_option("--threads", g.threads, "Worker threads for Monte Carlo trials")
      ->envname("PEERGROUPS_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory")->envname("PEERGROUPS_OUT");

  ScmOptions so;
  auto* scm_cmd = app.add_subcommand("scm", "Social cognitive mapping");
  scm_cmd->fallthrough();
  scm_cmd->add_option("input", so.input, "Report list or matrix CSV")->required();
  scm_cmd->add_option("--threshold", so.threshold, "Correlation cut-off")->envname("PEERGROUPS_THRESHOLD");
  scm_cmd->add_option("--rule", so.rule, "Group identification rule")
      ->check(CLI::IsMember({"fifty", "profile", "components"}));
  scm_cmd->add_flag("--exclude-pair", so.exclude_pair, "Correlate columns without rows i and j");
  scm_cmd->add_option("--out-network", so.out_network, "Network CSV name inside --out");
  scm_cmd->add_option("--out-groups", so.out_groups, "Groups JSON name inside --out");

  BecdCliOptions bo;
  auto* becd_cmd = app.add_subcommand("becd", "Backbone extraction and community detection");
  becd_cmd->fallthrough();
  becd_cmd->add_option("input", bo.input, "Report list or matrix CSV")->required();
  becd_cmd->add_option("--alpha", bo.alpha, "Significance level")->envname("PEERGROUPS_ALPHA");
  becd_cmd->add_option("--correction", bo.correction, "Multiple-test correction")
      ->check(CLI::IsMember({"none", "holm"}));
  becd_cmd->add_option("--restarts", bo.restarts, "Louvain restarts")->check(CLI::PositiveNumber);
  becd_cmd->add_option("--exact-max-n", bo.exact_max_n, "Largest graph solved by exhaustive search");
  becd_cmd->add_option("--max-iterations", bo.max_iterations, "Null-model solver iteration cap")
      ->check(CLI::PositiveNumber);
  becd_cmd->add_option("--out-pvalues", bo.out_pvalues, "P-value CSV name inside --out");
  becd_cmd->add_option("--out-network", bo.out_network, "Backbone CSV name inside --out");
  becd_cmd->add_option("--out-groups", bo.out_groups, "Groups JSON name inside --out");

  SimulateOptions mo;
  auto* sim_cmd = app.add_subcommand("simulate", "Write random recall matrices");
  sim_cmd->fallthrough();
  sim_cmd->add_option("--mode", mo.mode, "shuffle or generate")->check(CLI::IsMember({"shuffle", "generate"}));
  sim_cmd->add_option("--input", mo.input, "Matrix to shuffle (default: built-in surrogate classroom)");
  sim_cmd->add_option("--profile", mo.profile, "Classroom profile JSON for generate mode");
  sim_cmd->add_option("--trials", mo.trials, "Number of matrices");
  sim_cmd->add_option("--trades", mo.trades, "Curveball trades per shuffle (default 5 x children)");
  sim_cmd->add_option("--out-dir", mo.out_dir, "Directory for trial files (default --out)");

  AuditCliOptions ao;
  auto* audit_cmd = app.add_subcommand("audit", "Run a benchmark or false-positive audit");
  audit_cmd->fallthrough();
  audit_cmd->add_option("--study", ao.study, "1, 2, 3, 4a, 4b or 4c")->required();
  audit_cmd->add_option("--method", ao.method, "scm-fifty, scm-profile, scm-components or becd");
  audit_cmd->add_option("--trials", ao.trials, "Monte Carlo trials")->envname("PEERGROUPS_TRIALS");
  audit_cmd->add_option("--input", ao.input, "Observed classroom (default: built-in surrogate classroom)");
  audit_cmd->add_option("--threshold", ao.threshold, "SCM correlation cut-off");
  audit_cmd->add_option("--alpha", ao.alpha, "Backbone significance level");
  audit_cmd->add_option("--restarts", ao.restarts, "Louvain restarts")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << PEERGROUPS_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*scm_cmd) return run_scm(g, so, out, err);
    if (*becd_cmd) return run_becd(g, bo, out, err);
    if (*sim_cmd) return run_simulate(g, mo, out);
    if (*audit_cmd) return run_audit(g, ao, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ConvergenceError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace peergroups::cli
