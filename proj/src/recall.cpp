#include "peergroups/recall.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "peergroups/error.hpp"

namespace peergroups {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                           : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

std::vector<std::string> default_report_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t j = 0; j < n; ++j) ids.push_back("r" + std::to_string(j + 1));
  return ids;
}

void check_unique_children(const std::vector<ChildId>& children) {
  std::unordered_set<std::string_view> seen;
  for (const auto& c : children) {
    if (c.empty()) throw DataError("empty child id");
    if (!seen.insert(c).second) throw DataError("duplicate child id '" + c + "'");
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file '" + path.string() + "'");
  return in;
}

}  // namespace

RecallMatrix RecallMatrix::from_reports(std::vector<ChildId> children,
                                        const std::vector<std::vector<std::size_t>>& reports,
                                        std::vector<std::string> report_ids) {
  check_unique_children(children);
  RecallMatrix r;
  r.children_ = std::move(children);
  r.n_reports_ = reports.size();
  r.report_ids_ = report_ids.empty() ? default_report_ids(reports.size()) : std::move(report_ids);
  if (r.report_ids_.size() != reports.size()) throw DataError("report id count mismatch");
  r.entries_.assign(r.children_.size() * r.n_reports_, 0);
  for (std::size_t j = 0; j < reports.size(); ++j) {
    if (reports[j].empty()) throw DataError("report " + std::to_string(j + 1) + " names no child");
    for (std::size_t i : reports[j]) {
      if (i >= r.children_.size()) throw DataError("report member index out of range");
      auto& cell = r.entries_[i * r.n_reports_ + j];
      if (cell) {
        throw DataError("report " + std::to_string(j + 1) + " lists '" + r.children_[i] + "' twice");
      }
      cell = 1;
    }
  }
  r.finish();
  return r;
}

RecallMatrix RecallMatrix::from_dense(std::vector<ChildId> children, std::size_t n_reports,
                                      std::span<const std::uint8_t> entries,
                                      std::vector<std::string> report_ids) {
  check_unique_children(children);
  if (entries.size() != children.size() * n_reports) throw DataError("matrix shape mismatch");
  RecallMatrix r;
  r.children_ = std::move(children);
  r.n_reports_ = n_reports;
  r.report_ids_ = report_ids.empty() ? default_report_ids(n_reports) : std::move(report_ids);
  if (r.report_ids_.size() != n_reports) throw DataError("report id count mismatch");
  r.entries_.resize(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k] > 1) throw DataError("matrix entries must be 0 or 1");
    r.entries_[k] = entries[k];
  }
  for (std::size_t j = 0; j < n_reports; ++j) {
    bool any = false;
    for (std::size_t i = 0; i < r.children_.size() && !any; ++i) any = r.entries_[i * n_reports + j] != 0;
    if (!any) throw DataError("report '" + r.report_ids_[j] + "' names no child");
  }
  r.finish();
  return r;
}

void RecallMatrix::finish() {
  words_per_row_ = (n_reports_ + 63) / 64;
  bits_.assign(children_.size() * words_per_row_, 0);
  total_ones_ = 0;
  for (std::size_t i = 0; i < children_.size(); ++i) {
    for (std::size_t j = 0; j < n_reports_; ++j) {
      if (entries_[i * n_reports_ + j]) {
        bits_[i * words_per_row_ + j / 64] |= std::uint64_t{1} << (j % 64);
        ++total_ones_;
      }
    }
  }
}

std::vector<std::size_t> RecallMatrix::report_members(std::size_t report) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < children_.size(); ++i)
    if (at(i, report)) out.push_back(i);
  return out;
}

std::vector<std::size_t> RecallMatrix::child_reports(std::size_t child) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_reports_; ++j)
    if (at(child, j)) out.push_back(j);
  return out;
}

RecallMatrix load_reports(std::istream& in) {
  std::vector<ChildId> children;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> reports;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(strip_comment(line));
    if (content.empty()) continue;
    std::vector<std::size_t> members;
    for (std::string_view token : split_commas(content)) {
      if (token.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": empty member name");
      }
      auto [it, inserted] = index.try_emplace(std::string(token), children.size());
      if (inserted) children.emplace_back(token);
      if (std::find(members.begin(), members.end(), it->second) != members.end()) {
        throw DataError("line " + std::to_string(line_no) + ": duplicate member '" +
                        std::string(token) + "'");
      }
      members.push_back(it->second);
    }
    reports.push_back(std::move(members));
  }
  if (in.bad()) throw DataError("I/O failure while reading reports");
  if (reports.empty()) throw DataError("no reports in input");
  return RecallMatrix::from_reports(std::move(children), reports);
}

RecallMatrix load_reports_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_reports(in);
}

RecallMatrix load_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> report_ids;
  bool have_header = false;
  std::vector<ChildId> children;
  std::vector<std::uint8_t> entries;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    auto cells = split_commas(content);
    if (!have_header) {
      for (std::size_t k = 1; k < cells.size(); ++k) report_ids.emplace_back(cells[k]);
      if (report_ids.empty()) throw DataError("matrix CSV header lists no reports");
      have_header = true;
      continue;
    }
    if (cells.size() != report_ids.size() + 1) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(report_ids.size() + 1) + " cells");
    }
    children.emplace_back(cells[0]);
    for (std::size_t k = 1; k < cells.size(); ++k) {
      if (cells[k] == "0") entries.push_back(0);
      else if (cells[k] == "1") entries.push_back(1);
      else throw DataError("line " + std::to_string(line_no) + ": cell '" + std::string(cells[k]) +
                           "' is not 0 or 1");
    }
  }
  if (in.bad()) throw DataError("I/O failure while reading matrix");
  if (!have_header || children.empty()) throw DataError("empty matrix CSV");
  const std::size_t n_reports = report_ids.size();
  return RecallMatrix::from_dense(std::move(children), n_reports, entries, std::move(report_ids));
}

RecallMatrix load_matrix_csv_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_matrix_csv(in);
}

RecallMatrix load_recall_file(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_matrix_csv_file(path);
  return load_reports_file(path);
}

std::string to_report_list(const RecallMatrix& r) {
  std::ostringstream out;
  for (std::size_t j = 0; j < r.n_reports(); ++j) {
    bool first = true;
    for (std::size_t i : r.report_members(j)) {
      if (!first) out << ',';
      out << r.children()[i];
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

std::string to_matrix_csv(const RecallMatrix& r) {
  std::ostringstream out;
  out << "child";
  for (const auto& id : r.report_ids()) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < r.n_children(); ++i) {
    out << r.children()[i];
    for (std::size_t j = 0; j < r.n_reports(); ++j) out << ',' << (r.at(i, j) ? '1' : '0');
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> validate_scm_limits(const RecallMatrix& r, const ScmLimits& limits) {
  std::vector<std::string> warnings;
  if (r.n_reports() > limits.max_reports) {
    warnings.push_back(std::to_string(r.n_reports()) + " reports exceed the SCM 4.0 limit of " +
                       std::to_string(limits.max_reports));
  }
  if (r.n_children() > limits.max_children) {
    warnings.push_back(std::to_string(r.n_children()) + " children exceed the SCM 4.0 limit of " +
                       std::to_string(limits.max_children));
  }
  const auto m = margins(r);
  for (std::size_t j = 0; j < m.col_sums.size(); ++j) {
    if (static_cast<std::size_t>(m.col_sums[j]) > limits.max_report_size) {
      warnings.push_back("report '" + r.report_ids()[j] + "' names " + std::to_string(m.col_sums[j]) +
                         " children, above the SCM 4.0 limit of " +
                         std::to_string(limits.max_report_size));
    }
  }
  return warnings;
}

std::pair<RecallMatrix, std::vector<ChildId>> drop_never_named(const RecallMatrix& r) {
  std::vector<ChildId> kept;
  std::vector<ChildId> dropped;
  std::vector<std::uint8_t> entries;
  for (std::size_t i = 0; i < r.n_children(); ++i) {
    const auto row = r.row(i);
    if (std::find(row.begin(), row.end(), std::uint8_t{1}) == row.end()) {
      dropped.push_back(r.children()[i]);
      continue;
    }
    kept.push_back(r.children()[i]);
    entries.insert(entries.end(), row.begin(), row.end());
  }
  if (kept.empty()) throw DataError("no child appears in any report");
  if (dropped.empty()) return {r, {}};
  return {RecallMatrix::from_dense(std::move(kept), r.n_reports(), entries, r.report_ids()),
          std::move(dropped)};
}

Margins margins(const RecallMatrix& r) {
  Margins m;
  m.row_sums.assign(r.n_children(), 0);
  m.col_sums.assign(r.n_reports(), 0);
  for (std::size_t i = 0; i < r.n_children(); ++i) {
    for (std::size_t j = 0; j < r.n_reports(); ++j) {
      if (r.at(i, j)) {
        ++m.row_sums[i];
        ++m.col_sums[j];
      }
    }
  }
  return m;
}

}  // namespace peergroups
