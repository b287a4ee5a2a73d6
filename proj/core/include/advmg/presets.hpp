#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "advmg/discretization.hpp"

namespace advmg {

/// Directory holding preset files: $ADVMG_PRESET_DIR, else the source tree,
/// else the installed data directory.
std::filesystem::path preset_dir();

/// Lines of the form `scheme,m,v1,v2,...`; '#' starts a comment.
class PresetTable {
 public:
  struct Entry {
    SchemeId scheme;
    std::size_t m = 0;
    std::vector<int> values;
  };

  static PresetTable parse(std::istream& in);
  static PresetTable load(const std::filesystem::path& path);
  /// Loads `name` from preset_dir(); an absent file gives an empty table.
  static PresetTable load_default(const std::string& name);

  std::optional<std::vector<int>> find(const SchemeId& scheme, std::size_t m) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  void set(const SchemeId& scheme, std::size_t m, std::vector<int> values);
  void write(std::ostream& out) const;

 private:
  std::vector<Entry> entries_;
};

/// Two-level ERK patterns (diagonal indices) from erk_patterns.txt.
const PresetTable& erk_pattern_presets();
/// Multilevel ERK window widths per coarse level from multilevel_widths.txt.
const PresetTable& multilevel_width_presets();

/// Threshold eta for SDIRKp with coarsening m in {2, 4, ..., 64}.
double sdirk_threshold(int order, std::size_t m);

}  // namespace advmg
