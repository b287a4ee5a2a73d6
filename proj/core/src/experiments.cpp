#include "advmg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "advmg/errors.hpp"
#include "advmg/presets.hpp"
#include "advmg/svg.hpp"
#include "advmg/theory.hpp"

namespace advmg {
namespace {

using Artifacts = std::vector<std::filesystem::path>;

struct Job {
  std::function<ResultTable(Artifacts&)> run;
};

std::string fixed(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

SchemeSpec make_spec(SchemeId scheme, GridSize grid) {
  auto spec = SchemeSpec::preset(scheme, grid.nx);
  if (grid.nt != 0 && grid.nt != spec.nt)
    spec = SchemeSpec::with_cfl(scheme, grid.nx, grid.nt, spec.cfl(), spec.alpha);
  return spec;
}

ResultRow base_row(const SchemeSpec& spec, std::size_t m, std::size_t levels, std::string metric) {
  ResultRow row;
  row.scheme = spec.scheme.name();
  row.nx = spec.nx;
  row.nt = spec.nt;
  row.m = m;
  row.levels = levels;
  row.metric = std::move(metric);
  return row;
}

std::size_t iteration_cap(const ExperimentConfig& config, std::size_t nt, std::size_t m,
                          std::size_t levels) {
  if (levels != 2) return config.max_iters;
  // Sequential propagation reaches the exact solution by this count.
  const std::size_t exact = config.relaxation == Relaxation::FCF ? nt / (2 * m) : nt / m;
  return std::min(config.max_iters, exact + 2);
}

SolveOptions solve_options(const ExperimentConfig& config, const SchemeSpec& spec, std::size_t m,
                           std::size_t levels) {
  SolveOptions o;
  o.tol = config.tol;
  o.max_iters = iteration_cap(config, spec.nt, m, levels);
  o.relaxation = config.relaxation;
  o.cycle = config.cycle;
  o.seed = config.seed;
  o.threads = 1;
  o.dt = spec.dt();
  return o;
}

void fill_from_report(ResultRow& row, const SolveReport& report) {
  row.value = static_cast<double>(report.iterations);
  if (report.diverged || report.overflow || !report.converged) row.flag = RowFlag::Diverged;
}

std::string psi_note(const OptimizedPsi& psi) {
  return "nnz=" + std::to_string(psi.pattern.size()) + " radius=" + fixed(psi.spectral_radius(), 10);
}

OptimizedPsi fit(const Stepper& phi, std::size_t m, const SparsityPattern& pattern) {
  const auto column = ideal_column(phi, static_cast<unsigned>(m));
  const auto weights = weight_vector(phi.eigenvalues().values);
  return linear_lsq_psi(column.values, pattern, weights);
}

SparsityPattern method_pattern(const SchemeSpec& spec, const Stepper& phi, std::size_t m,
                               PsiMethod method) {
  if (method == PsiMethod::PhiPattern) {
    const auto* op = phi.explicit_operator();
    if (!op) throw InvalidArgument("phi-pattern coarse operators need an explicit scheme");
    return SparsityPattern(op->diagonal_indices(), spec.nx);
  }
  if (spec.scheme.family == Family::SDIRK) {
    const auto column = ideal_column(phi, static_cast<unsigned>(m));
    return select_pattern(column.values, Threshold{sdirk_threshold(spec.scheme.order, m)}, 0);
  }
  if (method == PsiMethod::Threshold)
    throw InvalidArgument("threshold patterns are defined for SDIRK schemes");
  return erk_pattern(spec, phi, m);
}

struct Outcome {
  ResultRow row;
  double operator_complexity = 1.0;
};

Outcome run_two_level(const SchemeSpec& spec, const Stepper& phi, const CoarseOperator& coarse,
                      std::size_t m, const ExperimentConfig& config, std::string metric) {
  Outcome out{base_row(spec, m, 2, std::move(metric))};
  out.row.note = coarse.note;
  out.row.flag = coarse.flag;
  if (!coarse.psi) {
    out.row.value = std::nan("");
    return out;
  }
  const auto h = Hierarchy::two_level(phi, *coarse.psi, spec.nt, m);
  const auto report =
      solve(h, sample(default_profile, spec.nx), solve_options(config, spec, m, 2));
  fill_from_report(out.row, report);
  out.operator_complexity = report.operator_complexity;
  return out;
}

Outcome run_multilevel(const SchemeSpec& spec, std::size_t m, std::size_t levels,
                       const ExperimentConfig& config) {
  Outcome out{base_row(spec, m, levels, "iterations")};
  const auto options = multilevel_options(spec, m);
  const auto h = build_multilevel_psis(spec, m, levels, options);
  const auto report =
      solve(h, sample(default_profile, spec.nx), solve_options(config, spec, m, levels));
  fill_from_report(out.row, report);
  out.operator_complexity = report.operator_complexity;
  return out;
}

std::filesystem::path artifact(const std::filesystem::path& dir, const std::string& name,
                               Artifacts& artifacts) {
  const auto path = dir / name;
  artifacts.push_back(path);
  return path;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.precision(17);
  return out;
}

PlotOptions labels(std::string title, std::string xlabel, std::string ylabel) {
  PlotOptions o;
  o.title = std::move(title);
  o.xlabel = std::move(xlabel);
  o.ylabel = std::move(ylabel);
  return o;
}

bool dir_enabled(const std::filesystem::path& dir) { return !dir.empty(); }

// Centered diagonal index for column position d.
int centered_offset(std::size_t d, std::size_t n) {
  auto o = -static_cast<std::ptrdiff_t>(d);
  if (2 * o <= -static_cast<std::ptrdiff_t>(n)) o += static_cast<std::ptrdiff_t>(n);
  return static_cast<int>(o);
}

Series column_series(const std::string& label, std::span<const double> column) {
  const std::size_t n = column.size();
  std::vector<std::pair<int, double>> points;
  for (std::size_t d = 0; d < n; ++d) points.emplace_back(centered_offset(d, n), column[d]);
  std::sort(points.begin(), points.end());
  Series s{label, {}, {}};
  for (const auto& [o, v] : points) {
    s.x.push_back(o);
    s.y.push_back(v);
  }
  return s;
}

// ---- experiment job builders ------------------------------------------------

std::vector<Job> table2_jobs(const ExperimentConfig& c) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        jobs.push_back({[=](Artifacts&) {
          ResultTable t;
          const auto spec = make_spec(scheme, grid);
          t.add(solve_row(spec, m, 2, PsiMethod::Rediscretize, c));
          auto exact = base_row(spec, m, 2, "exact_iterations");
          exact.value = static_cast<double>(spec.nt / (2 * m));
          t.add(exact);
          return t;
        }});
  return jobs;
}

std::vector<Job> table3_jobs(const ExperimentConfig& c) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        jobs.push_back({[=](Artifacts&) {
          ResultTable t;
          const auto spec = make_spec(scheme, grid);
          const auto phi = build_phi(spec);
          t.add(run_two_level(spec, phi, make_coarse_operator(spec, phi, m, PsiMethod::PhiPattern), m,
                              c, "phi_pattern_iterations")
                    .row);
          t.add(run_two_level(spec, phi, make_coarse_operator(spec, phi, m, PsiMethod::Lsq), m, c,
                              "iterations")
                    .row);
          return t;
        }});
  return jobs;
}

std::vector<Job> table5_jobs(const ExperimentConfig& c) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        for (auto levels : c.levels)
          jobs.push_back({[=](Artifacts&) {
            ResultTable t;
            const auto spec = make_spec(scheme, grid);
            try {
              const auto outcome = run_multilevel(spec, m, levels, c);
              t.add(outcome.row);
              auto oc = base_row(spec, m, levels, "oc");
              oc.value = outcome.operator_complexity;
              t.add(oc);
            } catch (const GridTooSmall&) {
              // Hierarchy deeper than the grid allows; the table leaves the cell empty.
            }
            return t;
          }});
  return jobs;
}

std::vector<Job> table6_jobs(const ExperimentConfig& c) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        jobs.push_back({[=](Artifacts&) {
          ResultTable t;
          t.add(solve_row(make_spec(scheme, grid), m, 2, c.psi, c));
          return t;
        }});
  return jobs;
}

std::vector<Job> tableB_jobs(const ExperimentConfig& c) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        jobs.push_back({[=](Artifacts&) {
          ResultTable t;
          const auto spec = make_spec(scheme, grid);
          const auto phi = build_phi(spec);
          const auto lambda = phi.eigenvalues().values;
          const auto pattern = erk_pattern(spec, phi, m);
          const auto linear = fit(phi, m, pattern);

          double initial = 0.0;
          const auto mu = eigenvalues(linear.op).values;
          for (std::size_t k = 0; k < lambda.size(); ++k) {
            const double b = smooth_mode_bound(lambda[k], mu[k], m, spec.nt);
            initial += b * b;
          }
          initial /= static_cast<double>(lambda.size());

          NonlinearOptions options;
          if (spec.scheme.order == 2 && m == 64) options.max_iters = 10;
          std::optional<OptimizedPsi> fitted;
          std::string failure;
          try {
            fitted = nonlinear_lsq_psi(lambda, pattern, m, spec.nt, linear, options);
          } catch (const NonFiniteObjective& e) {
            failure = std::string("nonlinear_rejected: ") + e.what();
          }
          if (!fitted) {
            auto row = base_row(spec, m, 2, "iterations");
            row.value = std::nan("");
            row.flag = RowFlag::Diverged;
            row.note = failure;
            t.add(row);
            t.add(run_two_level(spec, phi, {Stepper(linear.op), RowFlag::Ok, psi_note(linear)}, m, c,
                                "linear_iterations")
                      .row);
            return t;
          }
          const auto& nonlinear = *fitted;

          t.add(run_two_level(spec, phi, {Stepper(nonlinear.op), RowFlag::Ok, psi_note(nonlinear)}, m,
                              c, "iterations")
                    .row);
          t.add(run_two_level(spec, phi, {Stepper(linear.op), RowFlag::Ok, psi_note(linear)}, m, c,
                              "linear_iterations")
                    .row);
          auto f0 = base_row(spec, m, 2, "objective_initial");
          f0.value = initial;
          t.add(f0);
          auto f1 = base_row(spec, m, 2, "objective_final");
          f1.value = nonlinear.objective_value;
          t.add(f1);
          auto steps = base_row(spec, m, 2, "lm_steps");
          steps.value = static_cast<double>(nonlinear.nonlinear_iterations);
          t.add(steps);
          return t;
        }});
  return jobs;
}

std::vector<Job> fig1_jobs(const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::vector<Job> jobs;
  jobs.push_back({[=](Artifacts& artifacts) {
    ResultTable t;
    std::vector<Series> series;
    for (const auto& scheme : c.schemes) {
      Series s{scheme.name(), {}, {}};
      double previous = 0.0;
      for (std::size_t i = 0; i < c.grids.size(); ++i) {
        const auto spec = make_spec(scheme, c.grids[i]);
        const double error = discretization_error(spec);
        auto row = base_row(spec, 0, 0, "error");
        row.value = error;
        t.add(row);
        if (i > 0) {
          auto order = base_row(spec, 0, 0, "order");
          order.value = std::log2(previous / error) /
                        std::log2(static_cast<double>(spec.nx) / static_cast<double>(c.grids[i - 1].nx));
          t.add(order);
        }
        previous = error;
        s.x.push_back(std::log2(spec.dx()));
        s.y.push_back(error);
      }
      series.push_back(std::move(s));
    }
    if (dir_enabled(dir) && c.plots)
      write_svg(artifact(dir, "fig1_errors.svg", artifacts), series, PlotKind::Semilogy,
                labels("Discretization error", "log2 dx", "L2 error"));
    return t;
  }});
  return jobs;
}

std::vector<Job> fig2_jobs(const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        jobs.push_back({[=](Artifacts& artifacts) {
          ResultTable t;
          const std::size_t nt = grid.nt ? grid.nt : grid.nx * 4;
          // Equal space and time steps.
          const auto spec = SchemeSpec::with_cfl(scheme, grid.nx, nt, 1.0);
          const auto phi = build_phi(spec);
          const auto psi = psi_from_rediscretization(spec, m, {.allow_unstable = true});
          const auto profile = error_bound(phi, psi, m, spec.nt);
          auto row = base_row(spec, m, 2, "max_bound");
          row.value = profile.max_bound;
          t.add(row);
          auto flagged = base_row(spec, m, 2, "flagged_modes");
          flagged.value = static_cast<double>(profile.flagged_count());
          t.add(flagged);
          if (dir_enabled(dir)) {
            const std::string stem = "fig2_" + scheme.name() + "_m" + std::to_string(m);
            auto out = open_csv(artifact(dir, stem + ".csv", artifacts));
            profile.write_csv(out);
            if (c.plots) {
              std::vector<std::pair<double, double>> points;
              for (std::size_t k = 0; k < profile.size(); ++k)
                points.emplace_back(std::remainder(profile.frequencies[k], 2.0 * M_PI),
                                    profile.bounds[k]);
              std::sort(points.begin(), points.end());
              Series s{"bound", {}, {}};
              for (const auto& [x, y] : points) {
                s.x.push_back(x);
                s.y.push_back(y);
              }
              write_svg(artifact(dir, stem + ".svg", artifacts), {s}, PlotKind::Semilogy,
                        labels("Two-level bound, " + scheme.name(), "theta", "bound"));
            }
          }
          return t;
        }});
  return jobs;
}

std::vector<Job> fig3_jobs(const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        jobs.push_back({[=](Artifacts& artifacts) {
          ResultTable t;
          const auto spec = make_spec(scheme, grid);
          const auto phi = build_phi(spec);
          const auto column = ideal_column(phi, static_cast<unsigned>(m));
          const auto series = column_series(scheme.name(), column.values);
          std::size_t peak = 0;
          for (std::size_t i = 0; i < series.y.size(); ++i)
            if (std::abs(series.y[i]) > std::abs(series.y[peak])) peak = i;
          const double characteristic = -static_cast<double>(m) * spec.cfl();
          auto row = base_row(spec, m, 2, "peak_offset");
          row.value = series.x[peak];
          t.add(row);
          auto ch = base_row(spec, m, 2, "characteristic_offset");
          ch.value = characteristic;
          t.add(ch);
          if (dir_enabled(dir)) {
            const std::string stem = "fig3_" + scheme.name() + "_m" + std::to_string(m);
            auto out = open_csv(artifact(dir, stem + ".csv", artifacts));
            out << "offset,value\n";
            for (std::size_t i = 0; i < series.x.size(); ++i)
              out << series.x[i] << ',' << series.y[i] << '\n';
            if (c.plots) {
              PlotOptions o = labels("Entries of Phi^" + std::to_string(m) + ", " + scheme.name(),
                            "diagonal index", "entry");
              o.markers = {characteristic};
              write_svg(artifact(dir, stem + ".svg", artifacts), {series}, PlotKind::Stemplot, o);
            }
          }
          return t;
        }});
  return jobs;
}

std::vector<Job> fig4_jobs(const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::vector<Job> jobs;
  jobs.push_back({[=](Artifacts& artifacts) {
    ResultTable t;
    std::vector<Series> oc_series;
    std::vector<Series> pattern_series;
    std::ostringstream csv;
    csv << "scheme,nx,m,offset\n";
    for (const auto& scheme : c.schemes) {
      for (const auto& grid : c.grids) {
        const auto spec = make_spec(scheme, grid);
        const auto phi = build_phi(spec);
        Series oc_s{scheme.name(), {}, {}};
        for (auto m : c.m) {
          const auto pattern = erk_pattern(spec, phi, m);
          const auto psi = fit(phi, m, pattern);
          const auto h = Hierarchy::two_level(phi, psi.op, spec.nt, m);
          auto nnz = base_row(spec, m, 2, "nnz");
          nnz.value = static_cast<double>(pattern.size());
          t.add(nnz);
          auto first = base_row(spec, m, 2, "first_offset");
          first.value = pattern.offsets().front();
          t.add(first);
          auto oc = base_row(spec, m, 2, "oc");
          oc.value = operator_complexity(h);
          t.add(oc);
          oc_s.x.push_back(std::log2(static_cast<double>(m)));
          oc_s.y.push_back(oc.value);
          Series ps{scheme.name() + " m=" + std::to_string(m), {}, {}};
          for (int o : pattern.offsets()) {
            csv << scheme.name() << ',' << spec.nx << ',' << m << ',' << o << '\n';
            ps.x.push_back(o);
            ps.y.push_back(std::log2(static_cast<double>(m)));
          }
          if (scheme.order == 3) pattern_series.push_back(std::move(ps));
        }
        oc_series.push_back(std::move(oc_s));
      }
    }
    if (dir_enabled(dir)) {
      auto out = open_csv(artifact(dir, "fig4_patterns.csv", artifacts));
      out << csv.str();
      if (c.plots) {
        write_svg(artifact(dir, "fig4_oc.svg", artifacts), oc_series, PlotKind::Semilogy,
                  labels("Two-level operator complexity", "log2 m", "OC"));
        write_svg(artifact(dir, "fig4_patterns.svg", artifacts), pattern_series, PlotKind::Stemplot,
                  labels("Sparsity patterns", "diagonal index", "log2 m"));
      }
    }
    return t;
  }});
  return jobs;
}

std::vector<Job> fig5_jobs(const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        jobs.push_back({[=](Artifacts& artifacts) {
          ResultTable t;
          const auto spec = make_spec(scheme, grid);
          const auto phi = build_phi(spec);
          const auto pattern = erk_pattern(spec, phi, m);
          const auto psi = fit(phi, m, pattern);
          const auto lambda = phi.eigenvalues().values;
          const auto mu = eigenvalues(psi.op).values;
          const auto profile = error_bound(lambda, mu, m, spec.nt);

          auto bound = base_row(spec, m, 2, "max_bound");
          bound.value = profile.max_bound;
          t.add(bound);
          auto radius = base_row(spec, m, 2, "spectral_radius");
          radius.value = psi.spectral_radius();
          t.add(radius);
          t.add(run_two_level(spec, phi, {Stepper(psi.op), RowFlag::Ok, psi_note(psi)}, m, c,
                              "iterations")
                    .row);

          if (dir_enabled(dir)) {
            const std::string stem = "fig5_" + scheme.name() + "_m" + std::to_string(m);
            {
              auto out = open_csv(artifact(dir, stem + "_eigenvalues.csv", artifacts));
              out << "k,lambda_m_re,lambda_m_im,mu_re,mu_im\n";
              for (std::size_t k = 0; k < lambda.size(); ++k) {
                const auto lm = std::pow(lambda[k], static_cast<int>(m));
                out << k << ',' << lm.real() << ',' << lm.imag() << ',' << mu[k].real() << ','
                    << mu[k].imag() << '\n';
              }
            }
            {
              auto out = open_csv(artifact(dir, stem + "_bound.csv", artifacts));
              profile.write_csv(out);
            }
            {
              auto out = open_csv(artifact(dir, stem + "_psi.csv", artifacts));
              psi.write_csv(out);
            }
            if (c.plots) {
              Series ideal{"lambda^m", {}, {}};
              Series coarse{"mu", {}, {}};
              for (std::size_t k = 0; k < lambda.size(); ++k) {
                const auto lm = std::pow(lambda[k], static_cast<int>(m));
                ideal.x.push_back(lm.real());
                ideal.y.push_back(lm.imag());
                coarse.x.push_back(mu[k].real());
                coarse.y.push_back(mu[k].imag());
              }
              write_svg(artifact(dir, stem + "_eigenvalues.svg", artifacts), {ideal, coarse},
                        PlotKind::Eigenscatter, labels("Eigenvalues", "Re", "Im"));
              const auto column = ideal_column(phi, static_cast<unsigned>(m));
              PlotOptions o = labels("Entries", "diagonal index", "entry");
              o.markers = {-static_cast<double>(m) * spec.cfl()};
              write_svg(artifact(dir, stem + "_entries.svg", artifacts),
                        {column_series("Phi^m", column.values),
                         column_series("Psi", psi.op.first_column())},
                        PlotKind::Stemplot, o);
            }
          }
          return t;
        }});
  return jobs;
}

std::vector<Job> custom_jobs(const ExperimentConfig& c) {
  std::vector<Job> jobs;
  for (const auto& scheme : c.schemes)
    for (const auto& grid : c.grids)
      for (auto m : c.m)
        for (auto levels : c.levels)
          jobs.push_back({[=](Artifacts&) {
            ResultTable t;
            t.add(solve_row(make_spec(scheme, grid), m, levels, c.psi, c));
            return t;
          }});
  return jobs;
}

bool divergence_expected(ExperimentId id, const ResultRow& row) {
  if (id == ExperimentId::Table2) return true;
  return row.metric == "phi_pattern_iterations";
}

}  // namespace

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> list{
      {ExperimentId::Table2, "table2", "SDIRK two-level solves with rediscretized coarse operators"},
      {ExperimentId::Table3, "table3", "ERK two-level solves, Phi-based and Phi^m-based patterns"},
      {ExperimentId::Table5, "table5", "ERK multilevel V-cycles with m = 4 and operator complexity"},
      {ExperimentId::Table6, "table6", "SDIRK two-level solves with thresholded sparse coarse operators"},
      {ExperimentId::TableB, "tableB", "ERK two-level solves with bound-minimizing coarse operators"},
      {ExperimentId::Fig1, "fig1", "Discretization error against grid spacing"},
      {ExperimentId::Fig2, "fig2", "Per-mode two-level bound for a rediscretized SDIRK solver"},
      {ExperimentId::Fig3, "fig3", "Entries of Phi^m against diagonal index"},
      {ExperimentId::Fig4, "fig4", "ERK sparsity patterns and two-level operator complexity"},
      {ExperimentId::Fig5, "fig5", "Eigenvalues, entries and bound of an optimized coarse operator"},
      {ExperimentId::Custom, "custom", "User-defined scheme, grid, m and level sweep"},
  };
  return list;
}

ResultTable run_jobs(const std::vector<std::function<ResultTable()>>& jobs, unsigned threads) {
  std::vector<ResultTable> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count =
      std::max(1U, std::min<unsigned>(threads ? threads : 1U, static_cast<unsigned>(jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  ResultTable out;
  for (const auto& r : results) out.append(r);
  return out;
}

CoarseOperator make_coarse_operator(const SchemeSpec& spec, const Stepper& phi, std::size_t m,
                                    PsiMethod method) {
  switch (method) {
    case PsiMethod::Ideal: {
      if (const auto* op = phi.explicit_operator())
        return {Stepper(power(*op, static_cast<unsigned>(m))), RowFlag::Ok, "ideal"};
      auto column = ideal_column(phi, static_cast<unsigned>(m));
      return {Stepper(CirculantOperator(std::move(column.values))), RowFlag::Ok, "ideal"};
    }
    case PsiMethod::Rediscretize:
      return {psi_from_rediscretization(spec, m, {.allow_unstable = true}), RowFlag::Ok,
              "rediscretized"};
    case PsiMethod::Nonlinear: {
      try {
        const auto pattern = method_pattern(spec, phi, m, PsiMethod::Lsq);
        const auto linear = fit(phi, m, pattern);
        NonlinearOptions options;
        if (spec.scheme.order == 2 && m == 64) options.max_iters = 10;
        const auto psi = nonlinear_lsq_psi(phi.eigenvalues().values, pattern, m, spec.nt, linear, options);
        return {Stepper(psi.op), RowFlag::Ok, psi_note(psi)};
      } catch (const ImaginaryResidue& e) {
        return {std::nullopt, RowFlag::ImagFlagged, "imag_residue=" + fixed(e.residue(), 3)};
      } catch (const InvalidPattern& e) {
        return {std::nullopt, RowFlag::Diverged, std::string("invalid_pattern: ") + e.what()};
      }
    }
    case PsiMethod::PhiPattern:
    case PsiMethod::Lsq:
    case PsiMethod::Threshold: {
      try {
        const auto psi = fit(phi, m, method_pattern(spec, phi, m, method));
        return {Stepper(psi.op), RowFlag::Ok, psi_note(psi)};
      } catch (const ImaginaryResidue& e) {
        return {std::nullopt, RowFlag::ImagFlagged, "imag_residue=" + fixed(e.residue(), 3)};
      } catch (const IllConditioned& e) {
        return {std::nullopt, RowFlag::Diverged, "ill_conditioned=" + fixed(e.condition(), 3)};
      } catch (const InvalidPattern& e) {
        return {std::nullopt, RowFlag::Diverged, std::string("invalid_pattern: ") + e.what()};
      }
    }
  }
  throw InvalidArgument("unknown coarse operator method");
}

ResultRow solve_row(const SchemeSpec& spec, std::size_t m, std::size_t levels, PsiMethod method,
                    const ExperimentConfig& config) {
  if (levels > 2) {
    if (spec.scheme.family != Family::ERK || method != PsiMethod::Lsq)
      throw InvalidArgument("multilevel hierarchies use least-squares ERK coarse operators");
    auto outcome = run_multilevel(spec, m, levels, config);
    outcome.row.note = "oc=" + fixed(outcome.operator_complexity);
    return outcome.row;
  }
  if (levels != 2) throw InvalidArgument("levels must be at least 2");
  const auto phi = build_phi(spec);
  return run_two_level(spec, phi, make_coarse_operator(spec, phi, m, method), m, config, "iterations")
      .row;
}

PatternSearchResult search_window_pattern(SchemeId scheme, std::size_t m, std::size_t base_nx,
                                          std::size_t max_extra, double tol) {
  PatternSearchResult result;
  result.scheme = scheme;
  result.m = m;
  ExperimentConfig config;
  config.tol = tol;

  const auto base = SchemeSpec::preset(scheme, base_nx);
  const auto fine = SchemeSpec::preset(scheme, 4 * base_nx);
  const auto phi_base = build_phi(base);
  const auto phi_fine = build_phi(fine);
  const auto column = ideal_column(phi_base, static_cast<unsigned>(m));
  const std::size_t nnz = phi_base.nnz();

  struct Candidate {
    std::size_t extra;
    std::vector<int> offsets;
    std::vector<std::size_t> iterations;
  };
  auto evaluate = [&](std::size_t extra) -> std::optional<Candidate> {
    try {
      const auto pattern = select_pattern(column.values, IdealWindow{extra}, nnz);
      const auto psi_base = fit(phi_base, m, pattern);
      require_stable(psi_base);
      const SparsityPattern fine_pattern(pattern.offsets(), fine.nx);
      const auto psi_fine = fit(phi_fine, m, fine_pattern);
      require_stable(psi_fine);
      const auto a = run_two_level(base, phi_base, {Stepper(psi_base.op), RowFlag::Ok, {}}, m, config, "iterations");
      if (a.row.flag != RowFlag::Ok) return std::nullopt;
      const auto b = run_two_level(fine, phi_fine, {Stepper(psi_fine.op), RowFlag::Ok, {}}, m, config, "iterations");
      if (b.row.flag != RowFlag::Ok) return std::nullopt;
      const auto ka = static_cast<std::size_t>(a.row.value);
      const auto kb = static_cast<std::size_t>(b.row.value);
      if (kb > ka) return std::nullopt;
      return Candidate{extra, pattern.offsets(), {ka, kb}};
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  std::optional<Candidate> chosen;
  for (std::size_t e = 0; e <= max_extra && !chosen; ++e) chosen = evaluate(e);
  if (!chosen) return result;
  result.found = true;
  result.offsets = chosen->offsets;
  result.extra = chosen->extra;
  result.iterations = chosen->iterations;
  return result;
}

SparsityPattern erk_pattern(const SchemeSpec& spec, const Stepper& phi, std::size_t m,
                            bool* from_preset) {
  if (const auto preset = erk_pattern_presets().find(spec.scheme, m)) {
    if (from_preset) *from_preset = true;
    return SparsityPattern(*preset, spec.nx);
  }
  if (from_preset) *from_preset = false;
  const auto column = ideal_column(phi, static_cast<unsigned>(m));
  return select_pattern(column.values, IdealWindow{0}, phi.nnz());
}

MultilevelOptions multilevel_options(const SchemeSpec& spec, std::size_t m) {
  MultilevelOptions options;
  if (const auto preset = multilevel_width_presets().find(spec.scheme, m))
    for (int w : *preset) options.widths.push_back(static_cast<std::size_t>(w));
  return options;
}

ExperimentResult run_experiment(const ExperimentConfig& input,
                                const std::filesystem::path& output_dir) {
  ExperimentConfig config = input;
  config.complete();
  config.validate();
  if (!output_dir.empty()) std::filesystem::create_directories(output_dir);

  std::vector<Job> jobs;
  switch (config.id) {
    case ExperimentId::Table2: jobs = table2_jobs(config); break;
    case ExperimentId::Table3: jobs = table3_jobs(config); break;
    case ExperimentId::Table5: jobs = table5_jobs(config); break;
    case ExperimentId::Table6: jobs = table6_jobs(config); break;
    case ExperimentId::TableB: jobs = tableB_jobs(config); break;
    case ExperimentId::Fig1: jobs = fig1_jobs(config, output_dir); break;
    case ExperimentId::Fig2: jobs = fig2_jobs(config, output_dir); break;
    case ExperimentId::Fig3: jobs = fig3_jobs(config, output_dir); break;
    case ExperimentId::Fig4: jobs = fig4_jobs(config, output_dir); break;
    case ExperimentId::Fig5: jobs = fig5_jobs(config, output_dir); break;
    case ExperimentId::Custom: jobs = custom_jobs(config); break;
  }

  std::vector<Artifacts> job_artifacts(jobs.size());
  std::vector<std::function<ResultTable()>> tasks;
  tasks.reserve(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i)
    tasks.emplace_back([&, i] { return jobs[i].run(job_artifacts[i]); });

  const unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  ExperimentResult result;
  result.table = run_jobs(tasks, threads);
  for (const auto& a : job_artifacts)
    result.artifacts.insert(result.artifacts.end(), a.begin(), a.end());
  for (const auto& row : result.table.rows())
    if (row.flag == RowFlag::Diverged && !divergence_expected(config.id, row))
      ++result.unexpected_divergences;

  if (!output_dir.empty()) {
    const auto path = output_dir / "results.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    result.table.write_csv(out);
    result.artifacts.insert(result.artifacts.begin(), path);
  }
  return result;
}

}  // namespace advmg
