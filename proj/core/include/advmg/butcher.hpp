#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace advmg {

enum class Family { ERK, SDIRK };

struct ButcherTableau {
  std::vector<std::vector<double>> A;  // s x s, row-major rows
  std::vector<double> b;
  std::vector<double> c_nodes;
  bool is_explicit = true;

  std::size_t stages() const noexcept { return b.size(); }
};

/// Explicit schemes of order 1..5: forward Euler, SSP RK2/RK3, classical RK4
/// and Butcher's six-stage fifth-order method.
ButcherTableau erk_tableau(int order);
/// L-stable singly diagonally implicit schemes of order 1..4.
ButcherTableau sdirk_tableau(int order);
ButcherTableau tableau(Family family, int order);

/// Dense polynomial with ascending coefficients.
struct Polynomial {
  std::vector<double> coeffs;

  std::size_t degree() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  std::complex<double> operator()(std::complex<double> z) const;
  double operator()(double z) const;
};

Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator+(const Polynomial& a, const Polynomial& b);

/// R(z) = P(z) / Q(z) for a Runge-Kutta scheme applied to u' = lambda u.
struct StabilityFunction {
  Polynomial P;
  Polynomial Q;

  std::complex<double> operator()(std::complex<double> z) const { return P(z) / Q(z); }
};

/// Expands R(z) = 1 + z b^T (I - zA)^{-1} 1 into a ratio of polynomials.
/// Requires a lower-triangular A (explicit or diagonally implicit schemes).
StabilityFunction stability_function(const ButcherTableau& tableau);

}  // namespace advmg
