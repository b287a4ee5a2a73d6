#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advmg/butcher.hpp"
#include "advmg/circulant.hpp"
#include "advmg/spacetime.hpp"
#include "advmg/stepper.hpp"

namespace advmg {

/// Upwind approximation du/dx(x_i) ~ (1/dx) sum_t weights[t] u_{i + offsets[t]}.
struct SpatialStencil {
  int order = 0;
  std::vector<int> offsets;
  std::vector<double> weights;
};

/// U1..U5: p+1 point upwind-biased stencils (one-point bias for odd p,
/// two-point bias for even p).
SpatialStencil upwind_stencil(int order);

/// Scheme identifier such as "erk3+u3" or "sdirk2+u2".
struct SchemeId {
  Family family = Family::ERK;
  int order = 1;

  std::string name() const;
  static SchemeId parse(std::string_view id);
  bool operator==(const SchemeId&) const = default;
};

/// All scheme ids understood by the CLI, ERK first.
std::vector<SchemeId> all_schemes();

/// Discretization of u_t + alpha u_x = 0 on x in [-1, 1) periodic, t in [0, T].
struct SchemeSpec {
  SchemeId scheme;
  double alpha = 1.0;
  std::size_t nx = 0;
  std::size_t nt = 0;
  double final_time = 0.0;

  double dx() const noexcept { return 2.0 / static_cast<double>(nx); }
  double dt() const noexcept { return final_time / static_cast<double>(nt); }
  double cfl() const noexcept { return alpha * dt() / dx(); }

  /// ERK grid preset: c = cfl_fraction * c_max and nt the largest power of two
  /// with nt * dt <= 8.
  static SchemeSpec erk_preset(int order, std::size_t nx, double cfl_fraction = 0.85);
  /// SDIRK grid preset: T = 8, nt = nx, c = 4.
  static SchemeSpec sdirk_preset(int order, std::size_t nx);
  static SchemeSpec preset(SchemeId scheme, std::size_t nx);
  /// Fixed CFL number and step count; T = nt * dt.
  static SchemeSpec with_cfl(SchemeId scheme, std::size_t nx, std::size_t nt, double cfl,
                             double alpha = 1.0);
};

struct SpecChecks {
  bool allow_unstable = false;    // skip the ERK CFL check
  bool allow_zero_speed = false;  // alpha == 0 test hook
};

/// Throws InvalidArgument / UnstableScheme when the spec breaks its invariants.
void validate(const SchemeSpec& spec, SpecChecks checks = {});

/// Circulant discretization of -alpha d/dx. Throws GridTooSmall when nx <= 2p.
CirculantOperator build_L(int order, std::size_t nx, double dx, double alpha);

/// Phi(dt L) = P(dt L) Q(dt L)^{-1}; explicit schemes give a plain circulant.
/// Throws UnstableScheme if some |lambda_k| > 1 + 1e-10 unless allowed.
Stepper build_phi(const SchemeSpec& spec, SpecChecks checks = {});
Stepper build_phi(SchemeId scheme, std::size_t nx, double dt, double alpha,
                  SpecChecks checks = {});

/// Largest c with max_theta |R(c sigma(theta))| <= 1 for ERKp+Up. SDIRK
/// schemes return +infinity.
double cfl_limit(int order, Family family = Family::ERK);

/// Grid points x_i = -1 + i dx.
std::vector<double> grid_points(std::size_t nx);

using Profile = std::function<double(double)>;
/// sin^4(pi x)
double default_profile(double x);
std::vector<double> sample(const Profile& profile, std::size_t nx);

/// Time-steps u0 across all nt steps.
SpaceTimeArray sequential_solve(const SchemeSpec& spec, std::span<const double> u0,
                                SpecChecks checks = {});
SpaceTimeArray sequential_solve(const Stepper& phi, std::size_t nt, std::span<const double> u0);

/// Discrete L2 norm over the whole space-time grid of numerical minus exact,
/// with exact solution profile(x - alpha t) and weight dx * dt.
double discretization_error(const SchemeSpec& spec, const Profile& profile = default_profile,
                            SpecChecks checks = {});

/// Writes "t,x,u" rows for every grid value.
void write_trajectory_csv(const SchemeSpec& spec, const SpaceTimeArray& trajectory,
                          std::ostream& out);

}  // namespace advmg
