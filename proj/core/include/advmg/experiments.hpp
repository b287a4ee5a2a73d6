#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advmg/config.hpp"
#include "advmg/optimizer.hpp"
#include "advmg/results.hpp"

namespace advmg {

struct ExperimentInfo {
  ExperimentId id;
  std::string name;
  std::string description;
};

/// Every experiment id with the table or figure it reproduces.
const std::vector<ExperimentInfo>& list_experiments();

struct ExperimentResult {
  ResultTable table;
  std::vector<std::filesystem::path> artifacts;
  std::size_t unexpected_divergences = 0;
};

/// Runs the experiment, writing results.csv plus per-experiment CSV/SVG files
/// into `output_dir` (nothing is written when it is empty).
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& output_dir = {});

/// Runs jobs on at most `threads` workers and concatenates their rows in job order.
ResultTable run_jobs(const std::vector<std::function<ResultTable()>>& jobs, unsigned threads);

/// Coarse stepper for a two-level solve of `spec` with factor m. `psi` is
/// empty when the fit was rejected (flag and note say why).
struct CoarseOperator {
  std::optional<Stepper> psi;
  RowFlag flag = RowFlag::Ok;
  std::string note;
};
CoarseOperator make_coarse_operator(const SchemeSpec& spec, const Stepper& phi, std::size_t m,
                                    PsiMethod method);

/// Two-level or multilevel solve of `spec` returning one iteration row.
ResultRow solve_row(const SchemeSpec& spec, std::size_t m, std::size_t levels, PsiMethod method,
                    const ExperimentConfig& config);

struct PatternSearchResult {
  SchemeId scheme;
  std::size_t m = 0;
  bool found = false;
  std::vector<int> offsets;
  std::size_t extra = 0;              // width - nnz(Phi)
  std::vector<std::size_t> iterations;  // per grid
};

/// Contiguous window search: widths nnz(Phi) + e for e = 0..max_extra on the
/// ERK preset grid with base_nx and one 4x refinement. The first width that is
/// stable and converges on both grids without more iterations on the fine grid
/// is kept.
PatternSearchResult search_window_pattern(SchemeId scheme, std::size_t m, std::size_t base_nx = 256,
                                          std::size_t max_extra = 12, double tol = 1e-10);

/// Phi^m-based pattern for an ERK scheme: the preset when available, else the
/// nnz(Phi)-wide ideal window.
SparsityPattern erk_pattern(const SchemeSpec& spec, const Stepper& phi, std::size_t m,
                            bool* from_preset = nullptr);

/// Window widths for a multilevel ERK hierarchy (preset or nnz growth rule).
MultilevelOptions multilevel_options(const SchemeSpec& spec, std::size_t m);

}  // namespace advmg
