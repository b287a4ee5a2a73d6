#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "advmg/mgrit.hpp"
#include "advmg/stepper.hpp"

namespace advmg {

/// Per-mode two-level FCF convergence bound.
struct BoundProfile {
  std::vector<double> bounds;
  std::vector<double> frequencies;
  /// Modes where |mu_k| >= 1 - 1e-14. Their bound is +infinity unless
  /// lambda_k^m == mu_k to 1e-10, in which case the finite geometric sum is used.
  std::vector<bool> flagged;
  double max_bound = 0.0;

  std::size_t size() const noexcept { return bounds.size(); }
  std::size_t flagged_count() const;
  /// "theta,bound" rows.
  void write_csv(std::ostream& out) const;
};

/// w(z) = 1 / (1 - z + epsilon)^2.
struct WeightingSpec {
  double epsilon = 1e-6;

  double operator()(double z) const;
};

/// sqrt(m) |l|^m |l^m - mu| (1 - |mu|^{nt/m - 1}) / (1 - |mu|) for every mode.
BoundProfile error_bound(std::span<const std::complex<double>> lambda,
                         std::span<const std::complex<double>> mu, std::size_t m, std::size_t nt);
BoundProfile error_bound(const Stepper& phi, const Stepper& psi, std::size_t m, std::size_t nt);

/// Bound for a single mode; `flagged` is set for |mu| >= 1 - 1e-14.
double mode_bound(std::complex<double> lambda, std::complex<double> mu, std::size_t m,
                  std::size_t nt, bool* flagged = nullptr);

/// Spectral norm of the two-level error propagator for the scalar problem
/// u^{n+1} = lambda u^n with coarse stepper mu, built column by column by
/// running the iteration on C-point unit errors over the full time grid.
double scalar_mode_oracle(std::complex<double> lambda, std::complex<double> mu, std::size_t m,
                          std::size_t nt, Relaxation relaxation = Relaxation::FCF);

/// w_k = w(|lambda_k|).
std::vector<double> weight_vector(std::span<const std::complex<double>> lambda,
                                  const WeightingSpec& spec = {});

}  // namespace advmg
