#include "advmg/discretization.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

#include "advmg/errors.hpp"

namespace advmg {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kStabilityTolerance = 1e-10;

// Horner evaluation of a polynomial in a circulant argument.
CirculantOperator polynomial_of(const Polynomial& p, const CirculantOperator& x) {
  const std::size_t n = x.size();
  CirculantOperator result = CirculantOperator::identity(n).scaled(p.coeffs.back());
  for (std::size_t k = p.coeffs.size() - 1; k-- > 0;) {
    result = multiply(result, x) + CirculantOperator::identity(n).scaled(p.coeffs[k]);
  }
  return result;
}

std::complex<double> stencil_symbol(const SpatialStencil& s, double theta) {
  std::complex<double> acc = 0.0;
  for (std::size_t t = 0; t < s.offsets.size(); ++t)
    acc += s.weights[t] * std::exp(std::complex<double>(0.0, theta * s.offsets[t]));
  return acc;
}

double amplification(const StabilityFunction& R, const SpatialStencil& s, double c, double theta) {
  return std::abs(R(-c * stencil_symbol(s, theta)));
}

// max over theta in [0, pi] of |R(-c sigma(theta))|: dense sampling followed
// by golden-section refinement around the best samples.
double max_amplification(const StabilityFunction& R, const SpatialStencil& s, double c) {
  constexpr int kSamples = 2048;
  const double h = kPi / kSamples;
  std::vector<double> amp(kSamples + 1);
  for (int k = 0; k <= kSamples; ++k) amp[k] = amplification(R, s, c, k * h);
  double best = *std::max_element(amp.begin(), amp.end());

  std::vector<int> order(kSamples + 1);
  for (int k = 0; k <= kSamples; ++k) order[k] = k;
  std::partial_sort(order.begin(), order.begin() + 4, order.end(),
                    [&](int a, int b) { return amp[a] > amp[b]; });
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int t = 0; t < 4; ++t) {
    double a = std::max(0.0, (order[t] - 1) * h);
    double b = std::min(kPi, (order[t] + 1) * h);
    double x1 = b - golden * (b - a);
    double x2 = a + golden * (b - a);
    double f1 = amplification(R, s, c, x1);
    double f2 = amplification(R, s, c, x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 > f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - golden * (b - a);
        f1 = amplification(R, s, c, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + golden * (b - a);
        f2 = amplification(R, s, c, x2);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

constexpr double kMarginalGrowth = 1e-6;

double compute_cfl_limit(int order) {
  const auto R = stability_function(erk_tableau(order));
  const auto s = upwind_stencil(order);
  // Growth below 1e-6 per step counts as neutral.
  auto stable = [&](double c) { return max_amplification(R, s, c) <= 1.0 + kMarginalGrowth; };
  double lo = 0.0;
  double hi = 4.0;
  if (stable(hi)) return hi;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (stable(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::size_t largest_power_of_two_steps(double dt, double horizon) {
  std::size_t nt = 1;
  while (static_cast<double>(2 * nt) * dt <= horizon * (1.0 + 1e-14)) nt *= 2;
  return nt;
}

}  // namespace

SpatialStencil upwind_stencil(int order) {
  switch (order) {
    case 1:
      return {1, {0, -1}, {1.0, -1.0}};
    case 2:
      return {2, {0, -1, -2}, {3.0 / 2.0, -4.0 / 2.0, 1.0 / 2.0}};
    case 3:
      return {3, {1, 0, -1, -2}, {2.0 / 6.0, 3.0 / 6.0, -6.0 / 6.0, 1.0 / 6.0}};
    case 4:
      return {4, {1, 0, -1, -2, -3}, {3.0 / 12.0, 10.0 / 12.0, -18.0 / 12.0, 6.0 / 12.0, -1.0 / 12.0}};
    case 5:
      return {5,
              {2, 1, 0, -1, -2, -3},
              {-3.0 / 60.0, 30.0 / 60.0, 20.0 / 60.0, -60.0 / 60.0, 15.0 / 60.0, -2.0 / 60.0}};
    default:
      throw InvalidArgument("upwind stencil order must be in 1..5, got " + std::to_string(order));
  }
}

std::string SchemeId::name() const {
  const std::string p = std::to_string(order);
  return (family == Family::ERK ? "erk" : "sdirk") + p + "+u" + p;
}

SchemeId SchemeId::parse(std::string_view id) {
  std::string s;
  for (char ch : id) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  for (const auto& scheme : all_schemes())
    if (scheme.name() == s) return scheme;
  throw InvalidArgument("unknown scheme id '" + std::string(id) + "'");
}

std::vector<SchemeId> all_schemes() {
  std::vector<SchemeId> out;
  for (int p = 1; p <= 5; ++p) out.push_back({Family::ERK, p});
  for (int p = 1; p <= 4; ++p) out.push_back({Family::SDIRK, p});
  return out;
}

SchemeSpec SchemeSpec::erk_preset(int order, std::size_t nx, double cfl_fraction) {
  SchemeSpec spec;
  spec.scheme = {Family::ERK, order};
  spec.alpha = 1.0;
  spec.nx = nx;
  const double c = cfl_fraction * cfl_limit(order, Family::ERK);
  const double dt = c * spec.dx() / spec.alpha;
  spec.nt = largest_power_of_two_steps(dt, 8.0);
  spec.final_time = dt * static_cast<double>(spec.nt);
  validate(spec);
  return spec;
}

SchemeSpec SchemeSpec::sdirk_preset(int order, std::size_t nx) {
  SchemeSpec spec;
  spec.scheme = {Family::SDIRK, order};
  spec.alpha = 1.0;
  spec.nx = nx;
  spec.nt = nx;
  spec.final_time = 8.0;
  validate(spec);
  return spec;
}

SchemeSpec SchemeSpec::preset(SchemeId scheme, std::size_t nx) {
  return scheme.family == Family::ERK ? erk_preset(scheme.order, nx)
                                      : sdirk_preset(scheme.order, nx);
}

SchemeSpec SchemeSpec::with_cfl(SchemeId scheme, std::size_t nx, std::size_t nt, double cfl,
                                double alpha) {
  SchemeSpec spec;
  spec.scheme = scheme;
  spec.alpha = alpha;
  spec.nx = nx;
  spec.nt = nt;
  spec.final_time = static_cast<double>(nt) * cfl * spec.dx() / alpha;
  validate(spec);
  return spec;
}

void validate(const SchemeSpec& spec, SpecChecks checks) {
  const int p = spec.scheme.order;
  if (spec.scheme.family == Family::ERK && (p < 1 || p > 5))
    throw InvalidArgument("ERK order must be in 1..5");
  if (spec.scheme.family == Family::SDIRK && (p < 1 || p > 4))
    throw InvalidArgument("SDIRK order must be in 1..4");
  if (spec.nx < 2 || spec.nt < 1) throw InvalidArgument("grid needs nx >= 2 and nt >= 1");
  if (!(spec.final_time > 0.0)) throw InvalidArgument("final time must be positive");
  if (spec.alpha < 0.0 || (spec.alpha == 0.0 && !checks.allow_zero_speed))
    throw InvalidArgument("wave speed must be positive");
  if (spec.scheme.family == Family::ERK && !checks.allow_unstable) {
    const double limit = cfl_limit(p, Family::ERK);
    if (spec.cfl() > limit * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << spec.scheme.name() << ": CFL " << spec.cfl() << " exceeds limit " << limit;
      throw UnstableScheme(msg.str());
    }
  }
}

CirculantOperator build_L(int order, std::size_t nx, double dx, double alpha) {
  const auto stencil = upwind_stencil(order);
  if (nx <= static_cast<std::size_t>(2 * order)) {
    std::ostringstream msg;
    msg << "U" << order << " stencil wraps onto itself for nx = " << nx;
    throw GridTooSmall(msg.str());
  }
  std::vector<double> values(stencil.weights.size());
  for (std::size_t t = 0; t < values.size(); ++t) values[t] = -alpha * stencil.weights[t] / dx;
  auto L = CirculantOperator::from_diagonals(nx, stencil.offsets, values);
  const double scale = std::abs(alpha) / dx;
  for (const auto& v : eigenvalues(L).values) {
    if (v.real() > 1e-12 * std::max(1.0, scale))
      throw InvalidArgument("upwind operator has an eigenvalue with positive real part");
  }
  return L;
}

Stepper build_phi(SchemeId scheme, std::size_t nx, double dt, double alpha, SpecChecks checks) {
  const double dx = 2.0 / static_cast<double>(nx);
  const auto dtL = build_L(scheme.order, nx, dx, alpha).scaled(dt);
  const auto R = stability_function(tableau(scheme.family, scheme.order));
  auto numerator = polynomial_of(R.P, dtL);
  std::optional<Stepper> phi;
  if (scheme.family == Family::ERK) {
    phi.emplace(std::move(numerator));
  } else {
    phi.emplace(RationalStepper(std::move(numerator), polynomial_of(R.Q, dtL)));
  }
  if (!checks.allow_unstable) {
    const double radius = phi->eigenvalues().max_abs();
    if (radius > 1.0 + kStabilityTolerance) {
      std::ostringstream msg;
      msg << scheme.name() << ": stepper spectral radius " << radius << " exceeds 1";
      throw UnstableScheme(msg.str());
    }
  }
  return *phi;
}

Stepper build_phi(const SchemeSpec& spec, SpecChecks checks) {
  validate(spec, checks);
  return build_phi(spec.scheme, spec.nx, spec.dt(), spec.alpha, checks);
}

double cfl_limit(int order, Family family) {
  if (family == Family::SDIRK) {
    sdirk_tableau(order);  // validates the order
    return std::numeric_limits<double>::infinity();
  }
  if (order < 1 || order > 5) throw InvalidArgument("ERK order must be in 1..5");
  static std::array<double, 5> limits{};
  static std::once_flag once;
  std::call_once(once, [] {
    for (int p = 1; p <= 5; ++p) limits[p - 1] = compute_cfl_limit(p);
  });
  return limits[order - 1];
}

std::vector<double> grid_points(std::size_t nx) {
  std::vector<double> x(nx);
  const double dx = 2.0 / static_cast<double>(nx);
  for (std::size_t i = 0; i < nx; ++i) x[i] = -1.0 + static_cast<double>(i) * dx;
  return x;
}

double default_profile(double x) {
  const double s = std::sin(kPi * x);
  return s * s * s * s;
}

std::vector<double> sample(const Profile& profile, std::size_t nx) {
  auto x = grid_points(nx);
  for (auto& v : x) v = profile(v);
  return x;
}

SpaceTimeArray sequential_solve(const Stepper& phi, std::size_t nt, std::span<const double> u0) {
  if (u0.size() != phi.size()) throw DimensionMismatch("sequential_solve: initial condition length");
  SpaceTimeArray trajectory(phi.size(), nt);
  std::copy(u0.begin(), u0.end(), trajectory.at(0).begin());
  for (std::size_t n = 0; n < nt; ++n) phi.apply_into(trajectory.at(n), trajectory.at(n + 1));
  return trajectory;
}

SpaceTimeArray sequential_solve(const SchemeSpec& spec, std::span<const double> u0,
                                SpecChecks checks) {
  return sequential_solve(build_phi(spec, checks), spec.nt, u0);
}

double discretization_error(const SchemeSpec& spec, const Profile& profile, SpecChecks checks) {
  const auto u0 = sample(profile, spec.nx);
  const auto trajectory = sequential_solve(spec, u0, checks);
  const auto x = grid_points(spec.nx);
  double sum = 0.0;
  for (std::size_t n = 0; n <= spec.nt; ++n) {
    const double t = spec.dt() * static_cast<double>(n);
    const auto row = trajectory.at(n);
    for (std::size_t i = 0; i < spec.nx; ++i) {
      // Fold the departure point back into [-1, 1).
      const double y = x[i] - spec.alpha * t;
      const double departure = y - 2.0 * std::floor((y + 1.0) / 2.0);
      const double diff = row[i] - profile(departure);
      sum += diff * diff;
    }
  }
  return std::sqrt(sum * spec.dx() * spec.dt());
}

void write_trajectory_csv(const SchemeSpec& spec, const SpaceTimeArray& trajectory,
                          std::ostream& out) {
  const auto x = grid_points(spec.nx);
  out << "t,x,u\n";
  out.precision(17);
  for (std::size_t n = 0; n <= trajectory.nt(); ++n) {
    const double t = spec.dt() * static_cast<double>(n);
    const auto row = trajectory.at(n);
    for (std::size_t i = 0; i < trajectory.nx(); ++i) out << t << ',' << x[i] << ',' << row[i] << '\n';
  }
}

}  // namespace advmg
