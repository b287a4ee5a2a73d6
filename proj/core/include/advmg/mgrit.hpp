#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "advmg/spacetime.hpp"
#include "advmg/stepper.hpp"

namespace advmg {

enum class Relaxation { F, FCF };
enum class Cycle { V, F };

struct Level {
  Stepper stepper;
  std::size_t nt;
  std::size_t m;  // coarsening factor towards the next level, 1 on the coarsest
};

/// Time-grid hierarchy: level 0 is the fine grid, the last level is solved
/// sequentially.
class Hierarchy {
 public:
  /// steppers[l] acts on level l; factors[l] coarsens level l to level l+1
  /// (factors.size() == steppers.size() - 1).
  Hierarchy(std::vector<Stepper> steppers, std::size_t fine_nt, std::vector<std::size_t> factors,
            std::size_t min_coarse_points = 1);
  /// Uniform coarsening factor on every level.
  Hierarchy(std::vector<Stepper> steppers, std::size_t fine_nt, std::size_t m,
            std::size_t min_coarse_points = 1);

  static Hierarchy two_level(Stepper phi, Stepper psi, std::size_t nt, std::size_t m);

  std::size_t num_levels() const noexcept { return levels_.size(); }
  const Level& level(std::size_t l) const { return levels_.at(l); }
  const std::vector<Level>& levels() const noexcept { return levels_; }
  std::size_t nx() const noexcept { return levels_.front().stepper.size(); }
  std::size_t min_coarse_points() const noexcept { return min_coarse_points_; }

 private:
  std::vector<Level> levels_;
  std::size_t min_coarse_points_;
};

/// Smallest coarsest-grid size used for multilevel runs: 4 for first order,
/// 8 otherwise.
std::size_t default_min_coarse_points(int order);

/// Space-time iterate; values.at(0) holds the initial condition and is never
/// modified by the solver.
struct SpaceTimeState {
  SpaceTimeArray values;
  std::uint64_t rng_seed = 0;

  /// u0 at t = 0, independent uniform(-1, 1) samples everywhere else.
  static SpaceTimeState random_initial(std::span<const double> u0, std::size_t nt,
                                       std::uint64_t seed = 0);
};

struct SolveOptions {
  double tol = 1e-10;
  std::size_t max_iters = 1000;
  Relaxation relaxation = Relaxation::FCF;
  Cycle cycle = Cycle::V;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  double divergence_factor = 1e3;
  /// Time step entering the residual norm weight.
  double dt = 1.0;
};

struct SolveReport {
  std::size_t iterations = 0;
  /// Entry 0 is the residual of the initial iterate, entry i the residual after iteration i.
  std::vector<double> residual_history;
  bool converged = false;
  bool diverged = false;
  bool overflow = false;  // non-finite residual encountered
  double operator_complexity = 1.0;
  std::size_t levels = 0;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
  /// "iteration,residual" rows.
  void write_csv(std::ostream& out) const;
};

// Fine-grid sweeps (zero forcing). `threads` > 1 distributes C-intervals over
// worker threads; results are bitwise identical to serial execution.
void f_relax(SpaceTimeState& state, const Stepper& phi, std::size_t m, unsigned threads = 1);
void c_relax(SpaceTimeState& state, const Stepper& phi, std::size_t m, unsigned threads = 1);
void fcf_relax(SpaceTimeState& state, const Stepper& phi, std::size_t m, unsigned threads = 1);

/// Space-time L2 norm sqrt(dx * dt * sum_n ||u^{n+1} - Phi u^n||^2), dx = 2 / nx.
double residual(const SpaceTimeState& state, const Stepper& phi, double dt = 1.0,
                unsigned threads = 1);

/// Two-level coarse-grid correction: C-point residuals, sequential coarse
/// solve e^{j+1} = Psi e^j + r^{j+1} from e^0 = 0, injection, F-relaxation.
void coarse_correction(SpaceTimeState& state, const Stepper& phi, const Stepper& psi,
                       std::size_t m, unsigned threads = 1);

/// Iterates MGRIT cycles from a seeded random initial iterate.
SolveReport solve(const Hierarchy& hierarchy, std::span<const double> u0,
                  const SolveOptions& options = {});
/// Iterates from the given state (modified in place).
SolveReport solve(const Hierarchy& hierarchy, SpaceTimeState& state,
                  const SolveOptions& options = {});

/// (1 / nnz(Phi_1)) sum_l nnz(Phi_l) / (m_1 ... m_{l-1}).
double operator_complexity(const Hierarchy& hierarchy);

}  // namespace advmg
