#include "advmg/presets.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "advmg/errors.hpp"

namespace advmg {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("ADVMG_PRESET_DIR"); env && *env) return env;
  const std::filesystem::path source = ADVMG_SOURCE_PRESET_DIR;
  if (std::filesystem::exists(source)) return source;
  return ADVMG_INSTALL_PRESET_DIR;
}

PresetTable PresetTable::parse(std::istream& in) {
  PresetTable table;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) fields.push_back(trim(field));
    if (fields.size() < 3) throw ConfigError("expected scheme,m,values...", number);
    try {
      Entry entry{SchemeId::parse(fields[0]), std::stoul(fields[1]), {}};
      for (std::size_t i = 2; i < fields.size(); ++i) entry.values.push_back(std::stoi(fields[i]));
      table.entries_.push_back(std::move(entry));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), number);
    }
  }
  return table;
}

PresetTable PresetTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open preset file " + path.string(), 0);
  return parse(in);
}

PresetTable PresetTable::load_default(const std::string& name) {
  const auto path = preset_dir() / name;
  if (!std::filesystem::exists(path)) return {};
  return load(path);
}

std::optional<std::vector<int>> PresetTable::find(const SchemeId& scheme, std::size_t m) const {
  for (const auto& e : entries_)
    if (e.scheme == scheme && e.m == m) return e.values;
  return std::nullopt;
}

void PresetTable::set(const SchemeId& scheme, std::size_t m, std::vector<int> values) {
  for (auto& e : entries_) {
    if (e.scheme == scheme && e.m == m) {
      e.values = std::move(values);
      return;
    }
  }
  entries_.push_back(Entry{scheme, m, std::move(values)});
}

void PresetTable::write(std::ostream& out) const {
  for (const auto& e : entries_) {
    out << e.scheme.name() << ',' << e.m;
    for (int v : e.values) out << ',' << v;
    out << '\n';
  }
}

const PresetTable& erk_pattern_presets() {
  static const PresetTable table = PresetTable::load_default("erk_patterns.txt");
  return table;
}

const PresetTable& multilevel_width_presets() {
  static const PresetTable table = PresetTable::load_default("multilevel_widths.txt");
  return table;
}

double sdirk_threshold(int order, std::size_t m) {
  static constexpr std::array<std::array<double, 6>, 4> kEta{{
      {0.1, 0.125, 0.25, 0.5, 0.5, 0.6},
      {0.05, 0.1, 0.1, 0.2, 0.2, 0.2},
      {0.005, 0.01, 0.02, 0.02, 0.02, 0.04},
      {0.005, 0.01, 0.01, 0.01, 0.02, 0.02},
  }};
  if (order < 1 || order > 4) throw InvalidArgument("SDIRK order must be 1..4");
  std::size_t index = 0;
  for (std::size_t v = 2; v < m && index < 6; v *= 2) ++index;
  if (index >= 6 || (std::size_t{2} << index) != m)
    throw InvalidArgument("no SDIRK threshold preset for m = " + std::to_string(m));
  return kEta[static_cast<std::size_t>(order - 1)][index];
}

}  // namespace advmg
