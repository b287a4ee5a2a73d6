#include "advmg/mgrit.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "advmg/errors.hpp"
#include "parallel.hpp"

namespace advmg {
namespace {

// One level of the space-time system u^{n+1} = Phi u^n + g^{n+1}. The fine
// level carries no forcing.
struct LevelState {
  SpaceTimeArray u;
  SpaceTimeArray g;
  bool has_forcing = false;
};

void step(const Stepper& phi, const LevelState& s, std::size_t n, std::span<double> out) {
  phi.apply_into(s.u.at(n - 1), out);
  if (s.has_forcing) {
    const auto g = s.g.at(n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
  }
}

void f_sweep(LevelState& s, const Stepper& phi, std::size_t m, unsigned threads) {
  if (m <= 1) return;
  const std::size_t intervals = s.u.nt() / m;
  detail::parallel_for(intervals, threads, [&](std::size_t j) {
    for (std::size_t i = 1; i < m; ++i) step(phi, s, j * m + i, s.u.at(j * m + i));
  });
}

void c_sweep(LevelState& s, const Stepper& phi, std::size_t m, unsigned threads) {
  const std::size_t points = s.u.nt() / m;
  if (m == 1) {
    // Every point is a C-point: update from the previous iterate (Jacobi).
    const SpaceTimeArray old = s.u;
    const LevelState view{old, s.g, s.has_forcing};
    detail::parallel_for(points, threads, [&](std::size_t j) { step(phi, view, j + 1, s.u.at(j + 1)); });
    return;
  }
  detail::parallel_for(points, threads, [&](std::size_t j) {
    const std::size_t n = (j + 1) * m;
    step(phi, s, n, s.u.at(n));
  });
}

double residual_norm(const LevelState& s, const Stepper& phi, double dt, unsigned threads) {
  const std::size_t nt = s.u.nt();
  const std::size_t nx = s.u.nx();
  std::vector<double> squares(nt, 0.0);
  detail::parallel_for(nt, threads, [&](std::size_t n) {
    std::vector<double> r(nx);
    step(phi, s, n + 1, r);
    const auto next = s.u.at(n + 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      const double d = r[i] - next[i];
      acc += d * d;
    }
    squares[n] = acc;
  });
  const double dx = 2.0 / static_cast<double>(nx);
  return std::sqrt(dx * dt * detail::pairwise_sum(std::move(squares)));
}

void sequential_sweep(LevelState& s, const Stepper& phi) {
  for (std::size_t n = 1; n <= s.u.nt(); ++n) step(phi, s, n, s.u.at(n));
}

// Restricts the C-point residuals of `fine` into the forcing of `coarse` and
// zeroes the coarse iterate.
void restrict_residual(const LevelState& fine, const Stepper& phi, std::size_t m,
                       LevelState& coarse, unsigned threads) {
  const std::size_t nc = coarse.u.nt();
  const std::size_t nx = fine.u.nx();
  std::fill(coarse.u.data().begin(), coarse.u.data().end(), 0.0);
  coarse.has_forcing = true;
  detail::parallel_for(nc, threads, [&](std::size_t j) {
    const std::size_t n = (j + 1) * m;
    auto r = coarse.g.at(j + 1);
    step(phi, fine, n, r);
    const auto un = fine.u.at(n);
    for (std::size_t i = 0; i < nx; ++i) r[i] -= un[i];
  });
}

void inject(const LevelState& coarse, std::size_t m, LevelState& fine, unsigned threads) {
  const std::size_t nx = fine.u.nx();
  detail::parallel_for(coarse.u.nt(), threads, [&](std::size_t j) {
    auto target = fine.u.at((j + 1) * m);
    const auto e = coarse.u.at(j + 1);
    for (std::size_t i = 0; i < nx; ++i) target[i] += e[i];
  });
}

class Cycler {
 public:
  Cycler(const Hierarchy& h, const SolveOptions& options) : h_(h), options_(options) {
    states_.resize(h.num_levels());
    for (std::size_t l = 1; l < h.num_levels(); ++l) {
      const auto nt = h.level(l).nt;
      states_[l].u = SpaceTimeArray(h.nx(), nt);
      states_[l].g = SpaceTimeArray(h.nx(), nt);
      states_[l].has_forcing = true;
    }
  }

  LevelState& fine() { return states_[0]; }

  void run(std::size_t l, Cycle cycle) {
    const Level& level = h_.level(l);
    LevelState& s = states_[l];
    if (l + 1 == h_.num_levels()) {
      sequential_sweep(s, level.stepper);
      return;
    }
    const unsigned threads = options_.threads;
    f_sweep(s, level.stepper, level.m, threads);
    if (options_.relaxation == Relaxation::FCF) {
      c_sweep(s, level.stepper, level.m, threads);
      f_sweep(s, level.stepper, level.m, threads);
    }
    restrict_residual(s, level.stepper, level.m, states_[l + 1], threads);
    run(l + 1, cycle);
    if (cycle == Cycle::F && l + 2 < h_.num_levels()) run(l + 1, Cycle::V);
    inject(states_[l + 1], level.m, s, threads);
    f_sweep(s, level.stepper, level.m, threads);
  }

 private:
  const Hierarchy& h_;
  const SolveOptions& options_;
  std::vector<LevelState> states_;
};

}  // namespace

Hierarchy::Hierarchy(std::vector<Stepper> steppers, std::size_t fine_nt,
                     std::vector<std::size_t> factors, std::size_t min_coarse_points)
    : min_coarse_points_(min_coarse_points) {
  if (steppers.empty()) throw InvalidArgument("hierarchy needs at least one level");
  if (factors.size() + 1 != steppers.size())
    throw InvalidArgument("hierarchy needs one coarsening factor per level transition");
  if (fine_nt == 0) throw InvalidArgument("hierarchy needs nt >= 1");
  const std::size_t nx = steppers.front().size();
  std::size_t nt = fine_nt;
  for (std::size_t l = 0; l < steppers.size(); ++l) {
    if (steppers[l].size() != nx) throw DimensionMismatch("hierarchy steppers differ in size");
    const std::size_t m = l < factors.size() ? factors[l] : 1;
    if (m == 0) throw InvalidArgument("coarsening factor must be >= 1");
    if (nt % m != 0) {
      std::ostringstream msg;
      msg << "level " << l << ": nt = " << nt << " is not divisible by m = " << m;
      throw InvalidArgument(msg.str());
    }
    levels_.push_back(Level{std::move(steppers[l]), nt, m});
    nt /= m;
  }
  if (levels_.size() > 1 && levels_.back().nt < min_coarse_points_) {
    std::ostringstream msg;
    msg << "coarsest level has " << levels_.back().nt << " points, fewer than "
        << min_coarse_points_;
    throw GridTooSmall(msg.str());
  }
}

Hierarchy::Hierarchy(std::vector<Stepper> steppers, std::size_t fine_nt, std::size_t m,
                     std::size_t min_coarse_points)
    : Hierarchy(steppers, fine_nt,
                std::vector<std::size_t>(steppers.empty() ? 0 : steppers.size() - 1, m),
                min_coarse_points) {}

Hierarchy Hierarchy::two_level(Stepper phi, Stepper psi, std::size_t nt, std::size_t m) {
  return Hierarchy({std::move(phi), std::move(psi)}, nt, std::vector<std::size_t>{m});
}

std::size_t default_min_coarse_points(int order) { return order == 1 ? 4 : 8; }

SpaceTimeState SpaceTimeState::random_initial(std::span<const double> u0, std::size_t nt,
                                              std::uint64_t seed) {
  SpaceTimeState state{SpaceTimeArray(u0.size(), nt), seed};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::copy(u0.begin(), u0.end(), state.values.at(0).begin());
  for (std::size_t n = 1; n <= nt; ++n)
    for (auto& v : state.values.at(n)) v = dist(rng);
  return state;
}

void SolveReport::write_csv(std::ostream& out) const {
  out << "iteration,residual\n";
  out.precision(17);
  for (std::size_t i = 0; i < residual_history.size(); ++i)
    out << i << ',' << residual_history[i] << '\n';
}

namespace {

LevelState wrap_state(SpaceTimeState& state) {
  LevelState s;
  s.u = std::move(state.values);
  return s;
}

void check_divisible(const SpaceTimeState& state, std::size_t m) {
  if (m == 0 || state.values.nt() % m != 0)
    throw InvalidArgument("relaxation: nt must be divisible by m");
}

}  // namespace

void f_relax(SpaceTimeState& state, const Stepper& phi, std::size_t m, unsigned threads) {
  check_divisible(state, m);
  auto s = wrap_state(state);
  f_sweep(s, phi, m, threads);
  state.values = std::move(s.u);
}

void c_relax(SpaceTimeState& state, const Stepper& phi, std::size_t m, unsigned threads) {
  check_divisible(state, m);
  auto s = wrap_state(state);
  c_sweep(s, phi, m, threads);
  state.values = std::move(s.u);
}

void fcf_relax(SpaceTimeState& state, const Stepper& phi, std::size_t m, unsigned threads) {
  check_divisible(state, m);
  auto s = wrap_state(state);
  f_sweep(s, phi, m, threads);
  c_sweep(s, phi, m, threads);
  f_sweep(s, phi, m, threads);
  state.values = std::move(s.u);
}

double residual(const SpaceTimeState& state, const Stepper& phi, double dt, unsigned threads) {
  LevelState s;
  s.u = state.values;
  return residual_norm(s, phi, dt, threads);
}

void coarse_correction(SpaceTimeState& state, const Stepper& phi, const Stepper& psi,
                       std::size_t m, unsigned threads) {
  check_divisible(state, m);
  auto fine = wrap_state(state);
  LevelState coarse;
  coarse.u = SpaceTimeArray(fine.u.nx(), fine.u.nt() / m);
  coarse.g = SpaceTimeArray(fine.u.nx(), fine.u.nt() / m);
  restrict_residual(fine, phi, m, coarse, threads);
  sequential_sweep(coarse, psi);
  inject(coarse, m, fine, threads);
  f_sweep(fine, phi, m, threads);
  state.values = std::move(fine.u);
}

SolveReport solve(const Hierarchy& hierarchy, std::span<const double> u0,
                  const SolveOptions& options) {
  if (u0.size() != hierarchy.nx()) throw DimensionMismatch("solve: u0 size differs from nx");
  auto state = SpaceTimeState::random_initial(u0, hierarchy.level(0).nt, options.seed);
  return solve(hierarchy, state, options);
}

SolveReport solve(const Hierarchy& hierarchy, SpaceTimeState& state, const SolveOptions& options) {
  if (state.values.nx() != hierarchy.nx() || state.values.nt() != hierarchy.level(0).nt)
    throw DimensionMismatch("solve: state shape differs from the hierarchy");
  SolveReport report;
  report.levels = hierarchy.num_levels();
  report.operator_complexity = operator_complexity(hierarchy);

  Cycler cycler(hierarchy, options);
  LevelState& fine = cycler.fine();
  fine.u = std::move(state.values);
  const Stepper& phi = hierarchy.level(0).stepper;

  const double initial = residual_norm(fine, phi, options.dt, options.threads);
  report.residual_history.push_back(initial);
  report.converged = initial < options.tol;
  if (!std::isfinite(initial)) report.overflow = report.diverged = true;

  while (!report.converged && !report.diverged && report.iterations < options.max_iters) {
    if (hierarchy.num_levels() == 1)
      sequential_sweep(fine, phi);
    else
      cycler.run(0, options.cycle);
    ++report.iterations;
    const double r = residual_norm(fine, phi, options.dt, options.threads);
    report.residual_history.push_back(r);
    if (!std::isfinite(r)) {
      report.overflow = report.diverged = true;
    } else if (r > options.divergence_factor * initial) {
      report.diverged = true;
    }
    report.converged = r < options.tol;
  }
  state.values = std::move(fine.u);
  return report;
}

double operator_complexity(const Hierarchy& hierarchy) {
  const double base = static_cast<double>(hierarchy.level(0).stepper.nnz());
  double total = 0.0;
  double weight = 1.0;
  for (const auto& level : hierarchy.levels()) {
    total += weight * static_cast<double>(level.stepper.nnz());
    weight /= static_cast<double>(level.m);
  }
  return total / base;
}

}  // namespace advmg
