#include "advmg/results.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "advmg/errors.hpp"

namespace advmg {
namespace {

constexpr const char* kHeader = "scheme,nx,nt,m,levels,metric,value,flag,note";

bool is_iteration_metric(const std::string& metric) {
  return metric == "iterations" || metric.ends_with("_iterations");
}

std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

double parse_value(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace

std::string to_string(RowFlag flag) {
  switch (flag) {
    case RowFlag::Ok: return "ok";
    case RowFlag::Diverged: return "diverged";
    case RowFlag::ImagFlagged: return "imag_flagged";
  }
  return "ok";
}

RowFlag parse_row_flag(const std::string& s) {
  if (s == "ok" || s.empty()) return RowFlag::Ok;
  if (s == "diverged") return RowFlag::Diverged;
  if (s == "imag_flagged") return RowFlag::ImagFlagged;
  throw InvalidArgument("unknown row flag '" + s + "'");
}

std::string ResultRow::key() const {
  std::ostringstream out;
  out << scheme << '/' << nx << '/' << nt << '/' << m << '/' << levels << '/' << metric;
  return out.str();
}

void ResultTable::append(const ResultTable& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

const ResultRow* ResultTable::find(const std::string& key) const {
  for (const auto& row : rows_)
    if (row.key() == key) return &row;
  return nullptr;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == std::trunc(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void ResultTable::write_csv(std::ostream& out) const {
  out << kHeader << '\n';
  for (const auto& r : rows_) {
    out << escape(r.scheme) << ',' << r.nx << ',' << r.nt << ',' << r.m << ',' << r.levels << ','
        << escape(r.metric) << ',' << format_value(r.value) << ',' << to_string(r.flag) << ','
        << escape(r.note) << '\n';
  }
}

ResultTable ResultTable::read_csv(std::istream& in) {
  ResultTable table;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    if (number == 1 && line.starts_with("scheme,")) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) throw ConfigError("expected 9 CSV fields", number);
    try {
      ResultRow r;
      r.scheme = f[0];
      r.nx = std::stoull(f[1]);
      r.nt = std::stoull(f[2]);
      r.m = std::stoull(f[3]);
      r.levels = std::stoull(f[4]);
      r.metric = f[5];
      r.value = parse_value(f[6]);
      r.flag = parse_row_flag(f[7]);
      r.note = f[8];
      table.add(std::move(r));
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), number);
    }
  }
  return table;
}

ResultTable ResultTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open results file " + path.string());
  return read_csv(in);
}

std::string to_string(DiffStatus status) {
  switch (status) {
    case DiffStatus::Pass: return "pass";
    case DiffStatus::Note: return "note";
    case DiffStatus::Fail: return "fail";
  }
  return "pass";
}

bool DiffReport::passed() const { return count(DiffStatus::Fail) == 0; }

std::size_t DiffReport::count(DiffStatus status) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.status == status;
  return n;
}

void DiffReport::write_csv(std::ostream& out) const {
  out << "key,status,message\n";
  for (const auto& e : entries)
    out << escape(e.key) << ',' << to_string(e.status) << ',' << escape(e.message) << '\n';
}

DiffReport compare_baseline(const ResultTable& result, const ResultTable& baseline,
                            const BaselineTolerance& tolerance) {
  DiffReport report;
  std::map<std::string, const ResultRow*> current;
  for (const auto& r : result.rows()) current.emplace(r.key(), &r);

  for (const auto& b : baseline.rows()) {
    const auto key = b.key();
    const auto it = current.find(key);
    if (it == current.end()) {
      report.entries.push_back({key, DiffStatus::Fail, "missing from result"});
      continue;
    }
    const ResultRow& r = *it->second;
    current.erase(it);
    if (r.flag != b.flag) {
      report.entries.push_back(
          {key, DiffStatus::Fail, "flag " + to_string(r.flag) + " vs baseline " + to_string(b.flag)});
      continue;
    }
    const bool both_nan = std::isnan(r.value) && std::isnan(b.value);
    if (both_nan || r.value == b.value) continue;
    const double delta = r.value - b.value;
    const std::string message =
        format_value(r.value) + " vs baseline " + format_value(b.value);
    if (is_iteration_metric(b.metric)) {
      const auto status =
          std::abs(delta) <= tolerance.iteration_slack ? DiffStatus::Note : DiffStatus::Fail;
      report.entries.push_back({key, status, message});
    } else {
      const double scale = std::max(std::abs(b.value), 1e-300);
      const bool close = std::isfinite(delta) && std::abs(delta) <= tolerance.relative * scale;
      report.entries.push_back({key, close ? DiffStatus::Note : DiffStatus::Fail, message});
    }
  }
  for (const auto& [key, row] : current)
    report.entries.push_back({key, DiffStatus::Note, "not in baseline"});
  return report;
}

DiffReport compare_baseline(const ResultTable& result, const std::filesystem::path& baseline,
                            const BaselineTolerance& tolerance) {
  if (!std::filesystem::exists(baseline))
    throw MissingBaseline("baseline not found: " + baseline.string());
  return compare_baseline(result, ResultTable::load(baseline), tolerance);
}

}  // namespace advmg
