#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace peergroups {

using ChildId = std::string;

/// Binary children x reports incidence matrix. Row i is a child, column j a
/// peer report; entry (i, j) is set when child i was named in report j.
/// Reporter identity is never stored.
///
/// Immutable after construction. Every column names at least one child;
/// rows may be empty (children who were never named).
class RecallMatrix {
 public:
  RecallMatrix() = default;

  /// Builds from per-report member lists (indices into `children`).
  /// Throws DataError on duplicate child ids, out-of-range or duplicate
  /// members, or empty reports.
  static RecallMatrix from_reports(std::vector<ChildId> children,
                                   const std::vector<std::vector<std::size_t>>& reports,
                                   std::vector<std::string> report_ids = {});

  /// Builds from a dense row-major 0/1 matrix.
  static RecallMatrix from_dense(std::vector<ChildId> children, std::size_t n_reports,
                                 std::span<const std::uint8_t> entries,
                                 std::vector<std::string> report_ids = {});

  std::size_t n_children() const noexcept { return children_.size(); }
  std::size_t n_reports() const noexcept { return n_reports_; }
  const std::vector<ChildId>& children() const noexcept { return children_; }
  const std::vector<std::string>& report_ids() const noexcept { return report_ids_; }

  bool at(std::size_t child, std::size_t report) const noexcept {
    return entries_[child * n_reports_ + report] != 0;
  }
  std::span<const std::uint8_t> row(std::size_t child) const noexcept {
    return {entries_.data() + child * n_reports_, n_reports_};
  }
  std::span<const std::uint8_t> entries() const noexcept { return entries_; }

  /// Row as a packed bit set, `words_per_row()` 64-bit words, report j at bit j.
  std::span<const std::uint64_t> row_bits(std::size_t child) const noexcept {
    return {bits_.data() + child * words_per_row_, words_per_row_};
  }
  std::size_t words_per_row() const noexcept { return words_per_row_; }

  /// Indices of the children named in report j, ascending.
  std::vector<std::size_t> report_members(std::size_t report) const;
  /// Indices of the reports naming child i, ascending.
  std::vector<std::size_t> child_reports(std::size_t child) const;

  std::size_t total_ones() const noexcept { return total_ones_; }

  friend bool operator==(const RecallMatrix& a, const RecallMatrix& b) {
    return a.children_ == b.children_ && a.n_reports_ == b.n_reports_ &&
           a.entries_ == b.entries_;
  }

 private:
  void finish();

  std::vector<ChildId> children_;
  std::vector<std::string> report_ids_;
  std::size_t n_reports_ = 0;
  std::vector<std::uint8_t> entries_;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
  std::size_t total_ones_ = 0;
};

/// Report-list text: one report per line, members comma separated, `#` starts
/// a comment. Blank lines are skipped. Rows follow first-appearance order.
RecallMatrix load_reports(std::istream& in);
RecallMatrix load_reports_file(const std::filesystem::path& path);

/// Binary matrix CSV: header row of report ids (first cell is ignored), then
/// one row per child with the child id followed by "0"/"1" cells.
RecallMatrix load_matrix_csv(std::istream& in);
RecallMatrix load_matrix_csv_file(const std::filesystem::path& path);

/// Picks the loader by extension: `.csv` is a matrix, anything else a report list.
RecallMatrix load_recall_file(const std::filesystem::path& path);

/// Inverse of load_reports for matrices without never-named children.
std::string to_report_list(const RecallMatrix& r);
std::string to_matrix_csv(const RecallMatrix& r);

/// Warnings for each violated limit of the SCM 4.0 program. Never rejects.
struct ScmLimits {
  std::size_t max_reports = 2000;
  std::size_t max_children = 400;
  std::size_t max_report_size = 20;
};
std::vector<std::string> validate_scm_limits(const RecallMatrix& r, const ScmLimits& limits = {});

/// Removes children who appear in no report. Throws DataError when nothing
/// would remain.
std::pair<RecallMatrix, std::vector<ChildId>> drop_never_named(const RecallMatrix& r);

struct Margins {
  std::vector<int> row_sums;  // salience of each child
  std::vector<int> col_sums;  // size of each report
};
Margins margins(const RecallMatrix& r);

}  // namespace peergroups
