#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "advmg/config.hpp"
#include "advmg/discretization.hpp"
#include "advmg/errors.hpp"
#include "advmg/experiments.hpp"
#include "advmg/mgrit.hpp"
#include "advmg/optimizer.hpp"
#include "advmg/presets.hpp"
#include "advmg/results.hpp"
#include "advmg/theory.hpp"

using namespace advmg;

namespace {

struct CommonOptions {
  std::string scheme = "erk3+u3";
  std::size_t nx = 256;
  std::size_t nt = 0;
  std::size_t m = 4;
  std::size_t levels = 2;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t max_iters = 1000;
  std::string psi = "lsq";
  std::string cycle = "V";
  std::string relaxation = "FCF";
  std::string output_dir;
};

void add_grid_options(CLI::App* app, CommonOptions& o) {
  app->add_option("--scheme,-s", o.scheme, "Scheme id, e.g. erk3+u3 or sdirk2+u2")->capture_default_str();
  app->add_option("--nx", o.nx, "Spatial points (power of two)")->capture_default_str();
  app->add_option("--nt", o.nt, "Time steps (0: scheme preset)")->capture_default_str();
  app->add_option("--m,-m", o.m, "Coarsening factor")->capture_default_str();
}

SchemeSpec spec_from(const CommonOptions& o) {
  const auto scheme = SchemeId::parse(o.scheme);
  auto spec = SchemeSpec::preset(scheme, o.nx);
  if (o.nt && o.nt != spec.nt) spec = SchemeSpec::with_cfl(scheme, o.nx, o.nt, spec.cfl());
  return spec;
}

ExperimentConfig config_from(const CommonOptions& o) {
  auto c = ExperimentConfig::defaults(ExperimentId::Custom);
  c.tol = o.tol;
  c.seed = o.seed;
  c.max_iters = o.max_iters;
  c.threads = o.threads;
  c.psi = parse_psi_method(o.psi);
  c.cycle = o.cycle == "F" || o.cycle == "f" ? Cycle::F : Cycle::V;
  c.relaxation = o.relaxation == "F" || o.relaxation == "f" ? Relaxation::F : Relaxation::FCF;
  return c;
}

std::filesystem::path output_dir_for(const std::string& flag, const ExperimentConfig& config) {
  std::optional<std::filesystem::path> f;
  if (!flag.empty()) f = flag;
  return resolve_output_dir(f, config);
}

int cmd_solve(const CommonOptions& o) {
  const auto spec = spec_from(o);
  const auto config = config_from(o);
  const auto phi = build_phi(spec);

  SolveOptions opts;
  opts.tol = config.tol;
  opts.max_iters = config.max_iters;
  opts.seed = config.seed;
  opts.threads = config.threads;
  opts.cycle = config.cycle;
  opts.relaxation = config.relaxation;
  opts.dt = spec.dt();

  std::optional<Hierarchy> h;
  std::string note;
  if (o.levels > 2) {
    h = build_multilevel_psis(spec, o.m, o.levels, multilevel_options(spec, o.m));
  } else {
    const auto coarse = make_coarse_operator(spec, phi, o.m, config.psi);
    note = coarse.note;
    if (!coarse.psi) {
      std::cerr << "coarse operator rejected: " << to_string(coarse.flag) << ' ' << coarse.note << '\n';
      return 2;
    }
    h = Hierarchy::two_level(phi, *coarse.psi, spec.nt, o.m);
  }
  const auto report = solve(*h, sample(default_profile, spec.nx), opts);
  std::printf("%s %zux%zu m=%zu levels=%zu iterations=%zu residual=%.3e oc=%.4f %s%s\n",
              spec.scheme.name().c_str(), spec.nx, spec.nt, o.m, h->num_levels(), report.iterations,
              report.final_residual(), report.operator_complexity,
              report.converged ? "converged" : (report.diverged ? "diverged" : "not-converged"),
              note.empty() ? "" : (" " + note).c_str());
  if (!o.output_dir.empty() || std::getenv("ADVMG_OUTPUT_DIR")) {
    const auto dir = output_dir_for(o.output_dir, config);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "residuals.csv");
    report.write_csv(out);
  }
  return report.converged ? 0 : 1;
}

int cmd_optimize(const CommonOptions& o, std::size_t extra, bool search,
                 const std::vector<std::string>& search_schemes, const std::vector<std::size_t>& search_m,
                 const std::string& write_presets, std::size_t max_extra) {
  if (search) {
    PresetTable table;
    if (!write_presets.empty() && std::filesystem::exists(write_presets))
      table = PresetTable::load(write_presets);
    std::vector<SchemeId> schemes;
    for (const auto& s : search_schemes) schemes.push_back(SchemeId::parse(s));
    if (schemes.empty()) schemes.push_back(SchemeId::parse(o.scheme));
    std::vector<std::size_t> ms = search_m.empty() ? std::vector<std::size_t>{o.m} : search_m;
    for (const auto& scheme : schemes) {
      for (auto m : ms) {
        const auto r = search_window_pattern(scheme, m, o.nx, max_extra, o.tol);
        std::printf("%s m=%zu ", scheme.name().c_str(), m);
        if (!r.found) {
          std::printf("no scalable window up to +%zu\n", max_extra);
          continue;
        }
        std::printf("extra=%zu iterations=%zu,%zu offsets=%d..%d\n", r.extra, r.iterations[0],
                    r.iterations[1], r.offsets.front(), r.offsets.back());
        std::fflush(stdout);
        table.set(scheme, m, r.offsets);
      }
    }
    if (!write_presets.empty()) {
      std::ofstream out(write_presets);
      out << "# scheme,m,diagonal indices of the coarse operator pattern\n";
      table.write(out);
    }
    return 0;
  }

  const auto spec = spec_from(o);
  const auto phi = build_phi(spec);
  const auto method = parse_psi_method(o.psi);
  const auto column = ideal_column(phi, static_cast<unsigned>(o.m));
  const auto weights = weight_vector(phi.eigenvalues().values);

  SparsityPattern pattern = [&] {
    if (method == PsiMethod::PhiPattern)
      return SparsityPattern(phi.explicit_operator()->diagonal_indices(), spec.nx);
    if (spec.scheme.family == Family::SDIRK)
      return select_pattern(column.values, Threshold{sdirk_threshold(spec.scheme.order, o.m)}, 0);
    if (extra > 0) return select_pattern(column.values, IdealWindow{extra}, phi.nnz());
    return erk_pattern(spec, phi, o.m);
  }();
  auto psi = linear_lsq_psi(column.values, pattern, weights);
  if (method == PsiMethod::Nonlinear) {
    NonlinearOptions options;
    if (spec.scheme.order == 2 && o.m == 64) options.max_iters = 10;
    psi = nonlinear_lsq_psi(phi.eigenvalues().values, pattern, o.m, spec.nt, psi, options);
  }
  const auto config = config_from(o);
  if (!o.output_dir.empty() || std::getenv("ADVMG_OUTPUT_DIR")) {
    const auto dir = output_dir_for(o.output_dir, config);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / ("psi_" + spec.scheme.name() + "_m" + std::to_string(o.m) + ".csv"));
    psi.write_csv(out);
  } else {
    psi.write_csv(std::cout);
  }
  return 0;
}

int cmd_experiment(const std::string& id, const std::string& config_path, bool list, bool large,
                   unsigned threads, bool threads_set, const std::string& output_dir, bool no_plots,
                   const std::string& baseline) {
  if (list) {
    for (const auto& e : list_experiments()) std::printf("%-8s %s\n", e.name.c_str(), e.description.c_str());
    return 0;
  }
  ExperimentConfig config;
  if (!config_path.empty()) {
    config = ExperimentConfig::load(config_path);
  } else {
    if (id.empty()) throw InvalidArgument("give an experiment id or --config");
    config = ExperimentConfig::defaults(parse_experiment_id(id), large);
  }
  if (large) config.large = true;
  if (threads_set) config.threads = threads;
  if (no_plots) config.plots = false;
  if (config.large) std::cerr << "warning: full-scale grids requested; runs may take hours\n";

  const auto dir = output_dir_for(output_dir, config);
  const auto result = run_experiment(config, dir);
  result.table.write_csv(std::cout);
  for (const auto& a : result.artifacts) std::cerr << "wrote " << a.string() << '\n';
  int status = 0;
  if (result.unexpected_divergences) {
    std::cerr << result.unexpected_divergences << " row(s) diverged unexpectedly\n";
    status = 1;
  }
  if (!baseline.empty()) {
    const auto report = compare_baseline(result.table, std::filesystem::path(baseline));
    std::ofstream out(dir / "baseline_diff.csv");
    report.write_csv(out);
    if (!report.passed()) status = 1;
  }
  return status;
}

int cmd_bounds(const CommonOptions& o) {
  const auto spec = spec_from(o);
  const auto phi = build_phi(spec);
  const auto coarse = make_coarse_operator(spec, phi, o.m, parse_psi_method(o.psi));
  if (!coarse.psi) {
    std::cerr << "coarse operator rejected: " << coarse.note << '\n';
    return 2;
  }
  const auto profile = error_bound(phi, *coarse.psi, o.m, spec.nt);
  std::fprintf(stderr, "max_bound=%.6g flagged=%zu\n", profile.max_bound, profile.flagged_count());
  const auto config = config_from(o);
  if (!o.output_dir.empty() || std::getenv("ADVMG_OUTPUT_DIR")) {
    const auto dir = output_dir_for(o.output_dir, config);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "bound.csv");
    profile.write_csv(out);
  } else {
    profile.write_csv(std::cout);
  }
  return 0;
}

int cmd_cfl() {
  std::printf("scheme,c_max\n");
  for (int p = 1; p <= 5; ++p) std::printf("erk%d+u%d,%.6f\n", p, p, cfl_limit(p));
  return 0;
}

int cmd_baseline_diff(const std::string& result, const std::string& baseline, double slack,
                      double relative) {
  BaselineTolerance tol{slack, relative};
  const auto report = compare_baseline(ResultTable::load(result), std::filesystem::path(baseline), tol);
  report.write_csv(std::cout);
  std::fprintf(stderr, "pass=%s notes=%zu failures=%zu\n", report.passed() ? "yes" : "no",
               report.count(DiffStatus::Note), report.count(DiffStatus::Fail));
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-in-time advection solvers with optimized coarse operators"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* solve_cmd = app.add_subcommand("solve", "Run one MGRIT solve");
  add_grid_options(solve_cmd, common);
  solve_cmd->add_option("--levels", common.levels, "Grid levels")->capture_default_str();
  solve_cmd->add_option("--psi", common.psi, "ideal|rediscretize|phi-pattern|lsq|nonlinear|threshold")
      ->capture_default_str();
  solve_cmd->add_option("--tol", common.tol)->capture_default_str();
  solve_cmd->add_option("--seed", common.seed)->capture_default_str();
  solve_cmd->add_option("--threads", common.threads)->capture_default_str();
  solve_cmd->add_option("--max-iters", common.max_iters)->capture_default_str();
  solve_cmd->add_option("--cycle", common.cycle, "V or F")->capture_default_str();
  solve_cmd->add_option("--relaxation", common.relaxation, "F or FCF")->capture_default_str();
  solve_cmd->add_option("--output-dir,-o", common.output_dir);

  std::size_t extra = 0;
  bool search = false;
  std::vector<std::string> search_schemes;
  std::vector<std::size_t> search_m;
  std::string write_presets;
  std::size_t max_extra = 12;
  auto* optimize_cmd = app.add_subcommand("optimize", "Fit a coarse operator or search ERK patterns");
  add_grid_options(optimize_cmd, common);
  optimize_cmd->add_option("--psi", common.psi, "lsq|nonlinear|phi-pattern")->capture_default_str();
  optimize_cmd->add_option("--extra", extra, "Extra diagonals beyond nnz(Phi)");
  optimize_cmd->add_option("--tol", common.tol)->capture_default_str();
  optimize_cmd->add_option("--output-dir,-o", common.output_dir);
  optimize_cmd->add_flag("--search", search, "Search contiguous window patterns");
  optimize_cmd->add_option("--schemes", search_schemes, "Schemes for --search");
  optimize_cmd->add_option("--m-list", search_m, "Coarsening factors for --search");
  optimize_cmd->add_option("--max-extra", max_extra)->capture_default_str();
  optimize_cmd->add_option("--write-presets", write_presets, "Update this preset file");

  std::string experiment_id;
  std::string config_path;
  bool list = false;
  bool large = false;
  bool no_plots = false;
  unsigned threads = 0;
  std::string output_dir;
  std::string baseline;
  auto* experiment_cmd = app.add_subcommand("experiment", "Reproduce a table or figure");
  experiment_cmd->add_option("id", experiment_id, "Experiment id");
  experiment_cmd->add_option("--config,-c", config_path, "key=value config file");
  experiment_cmd->add_flag("--list", list, "List experiment ids");
  experiment_cmd->add_flag("--large", large, "Allow full-scale grids");
  experiment_cmd->add_flag("--no-plots", no_plots, "Skip SVG output");
  auto* threads_opt = experiment_cmd->add_option("--threads,-j", threads, "Worker threads (default: cores)");
  experiment_cmd->add_option("--output-dir,-o", output_dir);
  experiment_cmd->add_option("--baseline", baseline, "Compare against a results CSV");

  auto* bounds_cmd = app.add_subcommand("bounds", "Per-mode two-level convergence bound");
  add_grid_options(bounds_cmd, common);
  bounds_cmd->add_option("--psi", common.psi)->capture_default_str();
  bounds_cmd->add_option("--output-dir,-o", common.output_dir);

  app.add_subcommand("cfl", "CFL limits of the ERK schemes");

  std::string result_path;
  std::string baseline_path;
  double slack = 1.0;
  double relative = 1e-6;
  auto* diff_cmd = app.add_subcommand("baseline-diff", "Compare a results CSV against a baseline");
  diff_cmd->add_option("result", result_path)->required();
  diff_cmd->add_option("baseline", baseline_path)->required();
  diff_cmd->add_option("--iteration-slack", slack)->capture_default_str();
  diff_cmd->add_option("--relative", relative)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return cmd_solve(common);
    if (*optimize_cmd)
      return cmd_optimize(common, extra, search, search_schemes, search_m, write_presets, max_extra);
    if (*experiment_cmd)
      return cmd_experiment(experiment_id, config_path, list, large, threads, threads_opt->count() > 0,
                            output_dir, no_plots, baseline);
    if (*bounds_cmd) return cmd_bounds(common);
    if (app.got_subcommand("cfl")) return cmd_cfl();
    if (*diff_cmd) return cmd_baseline_diff(result_path, baseline_path, slack, relative);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
