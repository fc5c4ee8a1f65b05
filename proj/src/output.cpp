#include "peergroups/output.hpp"

#include <charconv>
#include <sstream>

#include "json.hpp"

namespace peergroups::output {
namespace {

using Json = nlohmann::ordered_json;

std::string matrix_csv(std::size_t n, std::span<const ChildId> children, auto&& cell) {
  std::ostringstream out;
  out << "child";
  for (const auto& c : children) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << children[i];
    for (std::size_t j = 0; j < n; ++j) out << ',' << cell(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

std::string network_csv(const PeerNetwork& n, std::span<const ChildId> children) {
  return matrix_csv(n.size(), children, [&](std::size_t i, std::size_t j) { return n.has_edge(i, j) ? '1' : '0'; });
}

std::string pvalues_csv(const backbone::BackboneResult& b, std::span<const ChildId> children) {
  return matrix_csv(b.n, children, [&](std::size_t i, std::size_t j) { return format_double(b.pvalue(i, j)); });
}

std::string groups_json(const GroupAssignment& g, std::span<const ChildId> children, double p) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["P"] = p;
  Json groups = Json::array();
  for (const auto& members : g.groups()) {
    Json ids = Json::array();
    for (std::size_t m : members) ids.push_back(children[m]);
    groups.push_back(std::move(ids));
  }
  j["groups"] = std::move(groups);
  Json membership = Json::array();
  for (std::size_t i = 0; i < g.n_children(); ++i) {
    membership.push_back(Json{{"child", children[i]}, {"groups", g.membership()[i]}});
  }
  j["membership"] = std::move(membership);
  return j.dump(2) + "\n";
}

std::string records_csv(std::span<const experiments::RunRecord> records) {
  std::ostringstream out;
  out << "schema_version,trial,method,source,target_n_children,target_n_reports,"
         "target_nomination_probability,target_nomination_skew,target_group_size_skew,"
         "n_children,n_reports,nomination_probability,nomination_skew,group_size_skew,n_groups,P\n";
  for (const auto& r : records) {
    out << kSchemaVersion << ',' << r.trial << ',' << experiments::method_name(r.method) << ',';
    if (r.profile) {
      const auto& p = *r.profile;
      out << "generated," << p.n_children << ',' << p.n_reports << ',' << format_double(p.nomination_probability)
          << ',' << format_double(p.nomination_skew) << ',' << format_double(p.group_size_skew);
    } else {
      out << "shuffle,,,,,";
    }
    out << ',' << r.n_children << ',' << r.n_reports << ',' << format_double(r.nomination_probability) << ','
        << format_double(r.nomination_skew) << ',' << format_double(r.group_size_skew) << ',' << r.n_groups << ','
        << format_double(r.p) << '\n';
  }
  return out.str();
}

std::string summary_json(const experiments::AuditSummary& s) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["n_trials"] = s.n_trials;
  j["frac_P_positive"] = s.frac_p_positive;
  j["mean_P"] = s.mean_p;
  j["sd_P"] = s.sd_p;
  j["min_P"] = s.min_p;
  j["max_P"] = s.max_p;
  j["mean_P_among_positive"] = s.mean_positive_p;
  return j.dump(2) + "\n";
}

std::string histogram_csv(std::span<const experiments::RunRecord> records) {
  constexpr double kWidth = 0.05;
  const auto counts = experiments::histogram(records, kWidth);
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < counts.size(); ++b) {
    out << format_double(static_cast<double>(b) * kWidth) << ','
        << format_double(static_cast<double>(b + 1) * kWidth) << ',' << counts[b] << '\n';
  }
  return out.str();
}

std::string regression_json(const regression::RegressionResult& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["outcome"] = "P";
  j["predictors_note"] = "realized classroom characteristics measured on each generated matrix, not sampled targets";
  j["n_observations"] = r.n_observations;
  j["r_squared"] = r.r_squared;
  Json coefs = Json::array();
  for (const auto& c : r.coefficients) coefs.push_back(Json{{"name", c.name}, {"b", c.b}, {"se", c.se}, {"beta", c.beta}});
  j["coefficients"] = std::move(coefs);
  return j.dump(2) + "\n";
}

}  // namespace peergroups::output
