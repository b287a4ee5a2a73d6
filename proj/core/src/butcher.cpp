#include "advmg/butcher.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advmg/errors.hpp"

namespace advmg {
namespace {

ButcherTableau make(std::vector<std::vector<double>> A, std::vector<double> b) {
  ButcherTableau t;
  t.c_nodes.resize(b.size());
  t.is_explicit = true;
  for (std::size_t i = 0; i < A.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < A[i].size(); ++j) {
      sum += A[i][j];
      if (j >= i && A[i][j] != 0.0) t.is_explicit = false;
    }
    t.c_nodes[i] = sum;
  }
  t.A = std::move(A);
  t.b = std::move(b);
  return t;
}

// SDIRK3 root of the L-stability condition.
constexpr double kZeta = 0.43586652150845899942;

}  // namespace

ButcherTableau erk_tableau(int order) {
  switch (order) {
    case 1:
      return make({{0.0}}, {1.0});
    case 2:
      return make({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
    case 3:
      return make({{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.25, 0.25, 0.0}},
                  {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0});
    case 4:
      return make({{0.0, 0.0, 0.0, 0.0}, {0.5, 0.0, 0.0, 0.0}, {0.0, 0.5, 0.0, 0.0},
                   {0.0, 0.0, 1.0, 0.0}},
                  {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0});
    case 5:
      return make({{0, 0, 0, 0, 0, 0},
                   {1.0 / 4.0, 0, 0, 0, 0, 0},
                   {1.0 / 8.0, 1.0 / 8.0, 0, 0, 0, 0},
                   {0, 0, 1.0 / 2.0, 0, 0, 0},
                   {3.0 / 16.0, -3.0 / 8.0, 3.0 / 8.0, 9.0 / 16.0, 0, 0},
                   {-3.0 / 7.0, 8.0 / 7.0, 6.0 / 7.0, -12.0 / 7.0, 8.0 / 7.0, 0}},
                  {7.0 / 90.0, 0.0, 32.0 / 90.0, 12.0 / 90.0, 32.0 / 90.0, 7.0 / 90.0});
    default:
      throw InvalidArgument("ERK order must be in 1..5, got " + std::to_string(order));
  }
}

ButcherTableau sdirk_tableau(int order) {
  switch (order) {
    case 1:
      return make({{1.0}}, {1.0});
    case 2: {
      const double g = 1.0 - std::sqrt(2.0) / 2.0;
      const double h = std::sqrt(2.0) / 2.0;
      return make({{g, 0.0}, {h, g}}, {h, g});
    }
    case 3: {
      const double z = kZeta;
      const double beta = (1.0 - z) / 2.0;
      const double gamma = -1.5 * z * z + 4.0 * z - 0.25;
      const double eps = 1.5 * z * z - 5.0 * z + 1.25;
      return make({{z, 0.0, 0.0}, {beta, z, 0.0}, {gamma, eps, z}}, {gamma, eps, z});
    }
    case 4:
      return make({{1.0 / 4.0, 0, 0, 0, 0},
                   {1.0 / 2.0, 1.0 / 4.0, 0, 0, 0},
                   {17.0 / 50.0, -1.0 / 25.0, 1.0 / 4.0, 0, 0},
                   {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 1.0 / 4.0, 0},
                   {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 1.0 / 4.0}},
                  {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 1.0 / 4.0});
    default:
      throw InvalidArgument("SDIRK order must be in 1..4, got " + std::to_string(order));
  }
}

ButcherTableau tableau(Family family, int order) {
  return family == Family::ERK ? erk_tableau(order) : sdirk_tableau(order);
}

std::complex<double> Polynomial::operator()(std::complex<double> z) const {
  std::complex<double> acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

double Polynomial::operator()(double z) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.coeffs.empty() || b.coeffs.empty()) return {};
  Polynomial out{std::vector<double>(a.coeffs.size() + b.coeffs.size() - 1, 0.0)};
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs.size(); ++j) out.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
  return out;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  Polynomial out{std::vector<double>(std::max(a.coeffs.size(), b.coeffs.size()), 0.0)};
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) out.coeffs[i] += a.coeffs[i];
  for (std::size_t i = 0; i < b.coeffs.size(); ++i) out.coeffs[i] += b.coeffs[i];
  return out;
}

StabilityFunction stability_function(const ButcherTableau& t) {
  const std::size_t s = t.stages();
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i + 1; j < s; ++j)
      if (t.A[i][j] != 0.0) throw InvalidArgument("stability_function: A must be lower triangular");

  const Polynomial one{{1.0}};
  const Polynomial z{{0.0, 1.0}};
  auto stage_factor = [&](std::size_t k) { return Polynomial{{1.0, -t.A[k][k]}}; };
  // prod_{lo <= k < hi} (1 - z a_kk)
  auto diag_product = [&](std::size_t lo, std::size_t hi) {
    Polynomial p = one;
    for (std::size_t k = lo; k < hi; ++k) p = p * stage_factor(k);
    return p;
  };

  // Stage values y_i = N_i / D_i with D_i = prod_{k <= i} (1 - z a_kk), all polynomial.
  std::vector<Polynomial> N(s);
  for (std::size_t i = 0; i < s; ++i) {
    Polynomial acc = diag_product(0, i);
    for (std::size_t j = 0; j < i; ++j) {
      if (t.A[i][j] == 0.0) continue;
      acc = acc + Polynomial{{t.A[i][j]}} * z * N[j] * diag_product(j + 1, i);
    }
    N[i] = acc;
  }

  StabilityFunction R;
  R.Q = diag_product(0, s);
  Polynomial P = R.Q;
  for (std::size_t i = 0; i < s; ++i) {
    if (t.b[i] == 0.0) continue;
    P = P + Polynomial{{t.b[i]}} * z * N[i] * diag_product(i + 1, s);
  }
  while (P.coeffs.size() > 1 && P.coeffs.back() == 0.0) P.coeffs.pop_back();
  while (R.Q.coeffs.size() > 1 && R.Q.coeffs.back() == 0.0) R.Q.coeffs.pop_back();
  R.P = std::move(P);
  return R;
}

}  // namespace advmg
