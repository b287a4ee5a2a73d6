#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "advmg/discretization.hpp"
#include "advmg/mgrit.hpp"

namespace advmg {

enum class ExperimentId {
  Table2, Table3, Table5, Table6, TableB, Fig1, Fig2, Fig3, Fig4, Fig5, Custom
};

std::string to_string(ExperimentId id);
ExperimentId parse_experiment_id(const std::string& s);

enum class PsiMethod { Ideal, Rediscretize, PhiPattern, Lsq, Nonlinear, Threshold };
std::string to_string(PsiMethod method);
PsiMethod parse_psi_method(const std::string& s);

struct GridSize {
  std::size_t nx = 0;
  std::size_t nt = 0;  // 0 selects the scheme preset for nx
  bool operator==(const GridSize&) const = default;
};

/// Flat key=value experiment description. Keys may repeat to build lists.
struct ExperimentConfig {
  ExperimentId id = ExperimentId::Custom;
  std::vector<SchemeId> schemes;
  std::vector<GridSize> grids;
  std::vector<std::size_t> m;
  std::vector<std::size_t> levels;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  std::size_t max_iters = 1000;
  std::filesystem::path output_dir;
  unsigned threads = 0;  // 0: hardware concurrency
  bool plots = true;
  bool large = false;
  Cycle cycle = Cycle::V;
  Relaxation relaxation = Relaxation::FCF;
  PsiMethod psi = PsiMethod::Lsq;

  /// Throws ConfigError (with the offending line number) on bad input.
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Defaults for an experiment id at desk scale (or full scale with `large`).
  static ExperimentConfig defaults(ExperimentId id, bool large = false);

  /// Fills empty lists from defaults(id, large).
  void complete();
  /// Checks invariants: known schemes, power-of-two grids, tol > 0.
  void validate() const;
  void write(std::ostream& out) const;
};

/// Output directory: explicit value, else $ADVMG_OUTPUT_DIR, else the config
/// value, else "advmg-out".
std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& flag,
                                         const ExperimentConfig& config);

}  // namespace advmg
