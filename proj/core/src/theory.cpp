#include "advmg/theory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "advmg/errors.hpp"

namespace advmg {
namespace {

constexpr double kUnitModulus = 1.0 - 1e-14;
constexpr double kMatchTolerance = 1e-10;

using Complex = std::complex<double>;

Complex ipow(Complex z, std::size_t m) {
  Complex acc = 1.0;
  for (std::size_t i = 0; i < m; ++i) acc *= z;
  return acc;
}

// One scalar two-level iteration applied to the error vector e (size nt + 1).
void scalar_iteration(std::vector<Complex>& e, Complex lambda, Complex mu, std::size_t m,
                      Relaxation relaxation) {
  const std::size_t nt = e.size() - 1;
  const std::size_t nc = nt / m;
  auto f_relax = [&] {
    for (std::size_t j = 0; j < nc; ++j)
      for (std::size_t i = 1; i < m; ++i) e[j * m + i] = lambda * e[j * m + i - 1];
  };
  f_relax();
  if (relaxation == Relaxation::FCF) {
    for (std::size_t j = nc; j >= 1; --j) e[j * m] = lambda * e[j * m - 1];
    f_relax();
  }
  // The error equation has zero right-hand side, so the residual is A e.
  std::vector<Complex> correction(nc + 1, 0.0);
  for (std::size_t j = 1; j <= nc; ++j) {
    const Complex r = lambda * e[j * m - 1] - e[j * m];
    correction[j] = mu * correction[j - 1] + r;
  }
  for (std::size_t j = 1; j <= nc; ++j) e[j * m] += correction[j];
  f_relax();
}

}  // namespace

std::size_t BoundProfile::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), true));
}

void BoundProfile::write_csv(std::ostream& out) const {
  out << "theta,bound\n";
  out.precision(17);
  for (std::size_t k = 0; k < bounds.size(); ++k) out << frequencies[k] << ',' << bounds[k] << '\n';
}

double WeightingSpec::operator()(double z) const {
  const double d = 1.0 - z + epsilon;
  return 1.0 / (d * d);
}

double mode_bound(Complex lambda, Complex mu, std::size_t m, std::size_t nt, bool* flagged) {
  if (m == 0 || nt % m != 0) throw InvalidArgument("error_bound: nt must be divisible by m");
  const double terms = static_cast<double>(nt / m) - 1.0;
  const Complex lm = ipow(lambda, m);
  const double gap = std::abs(lm - mu);
  const double a = std::abs(mu);
  const double prefactor = std::sqrt(static_cast<double>(m)) * std::abs(lm) * gap;
  const bool on_circle = a >= kUnitModulus;
  if (flagged) *flagged = on_circle;
  if (on_circle) {
    if (gap > kMatchTolerance) return std::numeric_limits<double>::infinity();
    // sum_{k < terms} |mu|^k evaluated directly.
    double sum = 0.0;
    double power = 1.0;
    for (double k = 0; k < terms; k += 1.0) {
      sum += power;
      power *= a;
    }
    return prefactor * sum;
  }
  return prefactor * (1.0 - std::pow(a, terms)) / (1.0 - a);
}

BoundProfile error_bound(std::span<const Complex> lambda, std::span<const Complex> mu,
                         std::size_t m, std::size_t nt) {
  if (lambda.size() != mu.size()) throw DimensionMismatch("error_bound: spectra differ in size");
  BoundProfile profile;
  const std::size_t n = lambda.size();
  profile.bounds.resize(n);
  profile.frequencies.resize(n);
  profile.flagged.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    bool flag = false;
    profile.bounds[k] = mode_bound(lambda[k], mu[k], m, nt, &flag);
    profile.flagged[k] = flag;
    profile.frequencies[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    profile.max_bound = std::max(profile.max_bound, profile.bounds[k]);
  }
  return profile;
}

BoundProfile error_bound(const Stepper& phi, const Stepper& psi, std::size_t m, std::size_t nt) {
  const auto lambda = phi.eigenvalues();
  const auto mu = psi.eigenvalues();
  return error_bound(lambda.values, mu.values, m, nt);
}

double scalar_mode_oracle(Complex lambda, Complex mu, std::size_t m, std::size_t nt,
                          Relaxation relaxation) {
  if (m == 0 || nt % m != 0) throw InvalidArgument("scalar_mode_oracle: nt must be divisible by m");
  const std::size_t nc = nt / m;
  // F-point inputs are overwritten by the first F-relaxation, so only the
  // C-point columns contribute to the norm.
  Eigen::MatrixXcd e(nt + 1, nc);
  std::vector<Complex> work(nt + 1);
  for (std::size_t j = 1; j <= nc; ++j) {
    std::fill(work.begin(), work.end(), Complex(0.0));
    work[j * m] = 1.0;
    scalar_iteration(work, lambda, mu, m, relaxation);
    for (std::size_t n = 0; n <= nt; ++n) e(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j - 1)) = work[n];
  }
  // Largest singular value from the Hermitian Gram matrix. Errors only travel
  // forward in time, so each row block is accumulated over the leading
  // columns that reach it.
  const Eigen::Index rows = e.rows(), cols = e.cols();
  std::vector<Eigen::Index> first(static_cast<std::size_t>(cols), rows);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index n = 0; n < rows; ++n)
      if (e(n, j) != Complex(0.0)) {
        first[static_cast<std::size_t>(j)] = n;
        break;
      }
  const bool staircase = std::is_sorted(first.begin(), first.end());
  constexpr Eigen::Index kBlock = 64;
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(cols, cols);
  for (Eigen::Index r0 = 0; r0 < rows; r0 += kBlock) {
    const Eigen::Index r1 = std::min(r0 + kBlock, rows);
    const Eigen::Index reach =
        staircase ? std::lower_bound(first.begin(), first.end(), r1) - first.begin() : cols;
    if (reach == 0) continue;
    gram.topLeftCorner(reach, reach).selfadjointView<Eigen::Lower>().rankUpdate(
        e.block(r0, 0, r1 - r0, reach).adjoint());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues()(eig.eigenvalues().size() - 1)));
}

std::vector<double> weight_vector(std::span<const Complex> lambda, const WeightingSpec& spec) {
  std::vector<double> w(lambda.size());
  for (std::size_t k = 0; k < lambda.size(); ++k) w[k] = spec(std::abs(lambda[k]));
  return w;
}

}  // namespace advmg
