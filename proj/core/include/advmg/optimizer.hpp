#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "advmg/circulant.hpp"
#include "advmg/discretization.hpp"
#include "advmg/mgrit.hpp"
#include "advmg/stepper.hpp"
#include "advmg/theory.hpp"

namespace advmg {

/// Allowed nonzero diagonal indices of a coarse operator, sorted, distinct
/// modulo nx, with 1 <= size <= nx / 4.
class SparsityPattern {
 public:
  SparsityPattern(std::vector<int> offsets, std::size_t nx);

  /// first, first + 1, ..., first + width - 1.
  static SparsityPattern contiguous(int first, std::size_t width, std::size_t nx);

  const std::vector<int>& offsets() const noexcept { return offsets_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  std::size_t nx() const noexcept { return nx_; }
  /// Position of each offset in a first column: (-offset) mod nx.
  std::vector<std::size_t> column_positions() const;

  bool operator==(const SparsityPattern&) const = default;

 private:
  std::vector<int> offsets_;
  std::size_t nx_;
};

struct PhiPattern {
  std::vector<int> offsets;  // diagonal indices of Phi
};
struct IdealWindow {
  std::size_t extra = 0;
};
struct Threshold {
  double eta = 0.5;
};
using PatternStrategy = std::variant<PhiPattern, IdealWindow, Threshold>;

/// PhiPattern: Phi's own offsets. IdealWindow: contiguous window of
/// nnz_target + extra diagonals with the largest total magnitude. Threshold:
/// every diagonal with |entry| >= eta * max |entry|. Throws EmptyPattern.
SparsityPattern select_pattern(std::span<const double> ideal_column, const PatternStrategy& strategy,
                               std::size_t nnz_target);

/// First column of Phi^m for either kind of stepper.
DenseColumn ideal_column(const Stepper& phi, unsigned m);

enum class Method { Linear, Nonlinear };

struct OptimizedPsi {
  CirculantOperator op;
  SparsityPattern pattern;
  double imag_residue = 0.0;
  double objective_value = 0.0;
  double condition = 1.0;
  Method method = Method::Linear;
  std::size_t nonlinear_iterations = 0;

  std::vector<double> values() const;
  double spectral_radius() const;
  /// Metadata comment lines followed by "offset,value" rows.
  void write_csv(std::ostream& out) const;
};

/// Weighted least-squares fit of the pattern entries to the spectrum of the
/// ideal column: min || W^{1/2} F (phi - R^T psi) ||^2. Throws IllConditioned
/// (condition > 1e14) and ImaginaryResidue (imaginary part > 1e-8).
OptimizedPsi linear_lsq_psi(std::span<const double> ideal_column, const SparsityPattern& pattern,
                            std::span<const double> weights);

struct NonlinearOptions {
  std::size_t max_iters = 30;
  double initial_damping = 1e-3;
  double relative_tolerance = 1e-10;
};

/// Levenberg-Marquardt minimization of (1/nx) sum_k bound_k(lambda_k, mu_k(psi))^2
/// starting from `init`. Never returns an iterate worse than `init`.
OptimizedPsi nonlinear_lsq_psi(std::span<const std::complex<double>> phi_spectrum,
                               const SparsityPattern& pattern, std::size_t m, std::size_t nt,
                               const OptimizedPsi& init, const NonlinearOptions& options = {});

/// Bound residual used by the nonlinear fit: equal to mode_bound for |mu| < 1
/// and continued by the finite geometric sum for |mu| >= 1.
double smooth_mode_bound(std::complex<double> lambda, std::complex<double> mu, std::size_t m,
                         std::size_t nt);

/// Throws UnstableScheme when some |mu_k| exceeds 1 + 1e-6 (marginal growth is accepted).
void require_stable(const OptimizedPsi& psi);

/// Coarse stepper obtained by rebuilding Phi with time step m * dt.
Stepper psi_from_rediscretization(const SchemeSpec& spec, std::size_t m, SpecChecks checks = {});

struct MultilevelOptions {
  /// Pattern width on each coarse level (level 2 first). When shorter than the
  /// hierarchy, missing widths follow nnz(previous level) + extra.
  std::vector<std::size_t> widths;
  std::size_t extra = 0;
  /// 0 picks 4 for first order, 8 otherwise.
  std::size_t min_coarse_points = 0;
};

/// Recursively fits Phi_{l+1} ~ Phi_l^m with the weighted linear least squares
/// problem and assembles the hierarchy.
Hierarchy build_multilevel_psis(const SchemeSpec& fine, std::size_t m, std::size_t levels,
                                const MultilevelOptions& options = {});

}  // namespace advmg
