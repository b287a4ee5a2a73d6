#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace advmg {

enum class RowFlag { Ok, Diverged, ImagFlagged };
std::string to_string(RowFlag flag);
RowFlag parse_row_flag(const std::string& s);

struct ResultRow {
  std::string scheme;
  std::size_t nx = 0;
  std::size_t nt = 0;
  std::size_t m = 0;
  std::size_t levels = 0;
  std::string metric;
  double value = 0.0;
  RowFlag flag = RowFlag::Ok;
  std::string note;

  /// scheme/nx/nt/m/levels/metric, used to match rows against a baseline.
  std::string key() const;
};

/// Rows in insertion order; CSV columns scheme,nx,nt,m,levels,metric,value,flag,note.
class ResultTable {
 public:
  void add(ResultRow row) { rows_.push_back(std::move(row)); }
  void append(const ResultTable& other);
  const std::vector<ResultRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const ResultRow* find(const std::string& key) const;

  void write_csv(std::ostream& out) const;
  static ResultTable read_csv(std::istream& in);
  static ResultTable load(const std::filesystem::path& path);

 private:
  std::vector<ResultRow> rows_;
};

/// Formats numbers the same way on every run: integers exactly, reals with 10
/// significant digits.
std::string format_value(double v);

struct BaselineTolerance {
  double iteration_slack = 1.0;  // |delta| <= slack passes with a note
  double relative = 1e-6;        // other metrics
};

enum class DiffStatus { Pass, Note, Fail };
std::string to_string(DiffStatus status);

struct DiffEntry {
  std::string key;
  DiffStatus status = DiffStatus::Pass;
  std::string message;
};

struct DiffReport {
  std::vector<DiffEntry> entries;  // only rows that differ

  bool passed() const;
  std::size_t count(DiffStatus status) const;
  /// "key,status,message" rows.
  void write_csv(std::ostream& out) const;
};

DiffReport compare_baseline(const ResultTable& result, const ResultTable& baseline,
                            const BaselineTolerance& tolerance = {});
/// Throws MissingBaseline when the file does not exist.
DiffReport compare_baseline(const ResultTable& result, const std::filesystem::path& baseline,
                            const BaselineTolerance& tolerance = {});

}  // namespace advmg
