#include "advmg/optimizer.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "advmg/dft.hpp"
#include "advmg/errors.hpp"

namespace advmg {
namespace {

constexpr double kMaxCondition = 1e14;
constexpr double kMaxImaginary = 1e-8;
constexpr double kStabilityTolerance = 1e-6;
constexpr double kFiniteDifferenceStep = 1e-7;

using Complex = std::complex<double>;

// Fourier symbol of each pattern entry: M(k, j) = exp(-i theta_k d_j).
Eigen::MatrixXcd fourier_columns(const SparsityPattern& pattern) {
  const std::size_t nx = pattern.nx();
  const auto positions = pattern.column_positions();
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(positions.size()));
  for (std::size_t j = 0; j < positions.size(); ++j) {
    for (std::size_t k = 0; k < nx; ++k) {
      // Reduce k * d modulo nx first so the phase stays exact for large grids.
      const std::size_t kd = (k * positions[j]) % nx;
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(kd) / static_cast<double>(nx);
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = std::polar(1.0, -theta);
    }
  }
  return m;
}

CirculantOperator operator_from_values(const SparsityPattern& pattern, std::span<const double> values) {
  return CirculantOperator::from_diagonals(pattern.nx(), pattern.offsets(), values);
}

double max_modulus(const Eigen::VectorXcd& mu) {
  double out = 0.0;
  for (Eigen::Index k = 0; k < mu.size(); ++k) out = std::max(out, std::abs(mu(k)));
  return out;
}

}  // namespace

std::vector<double> OptimizedPsi::values() const {
  std::vector<double> out;
  for (int o : pattern.offsets()) out.push_back(op.diagonal(o));
  return out;
}

double OptimizedPsi::spectral_radius() const { return eigenvalues(op).max_abs(); }

void OptimizedPsi::write_csv(std::ostream& out) const {
  out.precision(17);
  out << "# method=" << (method == Method::Linear ? "linear" : "nonlinear") << '\n';
  out << "# objective=" << objective_value << '\n';
  out << "# imag_residue=" << imag_residue << '\n';
  out << "# condition=" << condition << '\n';
  out << "# nnz=" << pattern.size() << '\n';
  out << "offset,value\n";
  const auto v = values();
  for (std::size_t j = 0; j < v.size(); ++j) out << pattern.offsets()[j] << ',' << v[j] << '\n';
}

DenseColumn ideal_column(const Stepper& phi, unsigned m) {
  if (const auto* op = phi.explicit_operator()) {
    const auto p = power(*op, m);
    return DenseColumn{std::vector<double>(p.first_column().begin(), p.first_column().end()), 0.0};
  }
  return rational_first_column_power(*phi.rational(), m);
}

OptimizedPsi linear_lsq_psi(std::span<const double> ideal, const SparsityPattern& pattern,
                            std::span<const double> weights) {
  const std::size_t nx = pattern.nx();
  if (ideal.size() != nx || weights.size() != nx)
    throw DimensionMismatch("linear_lsq_psi: ideal column, weights and pattern differ in size");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("linear_lsq_psi: weights must be positive");

  const auto target = dft::forward(ideal);
  Eigen::MatrixXcd a = fourier_columns(pattern);
  Eigen::VectorXcd b(static_cast<Eigen::Index>(nx));
  for (std::size_t k = 0; k < nx; ++k) {
    const double s = std::sqrt(weights[k]);
    a.row(static_cast<Eigen::Index>(k)) *= s;
    b(static_cast<Eigen::Index>(k)) = s * target[k];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
  const Eigen::Index nu = a.cols();
  Eigen::MatrixXcd r = qr.matrixR().topLeftCorner(nu, nu).triangularView<Eigen::Upper>();
  const auto sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(r).singularValues();
  const double condition = sv(nu - 1) > 0.0 ? sv(0) / sv(nu - 1) : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "least squares problem is ill-conditioned (condition " << condition << ")";
    throw IllConditioned(msg.str(), condition);
  }
  const Eigen::VectorXcd psi = qr.solve(b);

  double imag = 0.0;
  std::vector<double> values(static_cast<std::size_t>(nu));
  for (Eigen::Index j = 0; j < nu; ++j) {
    imag = std::max(imag, std::abs(psi(j).imag()));
    values[static_cast<std::size_t>(j)] = psi(j).real();
  }
  if (imag > kMaxImaginary) {
    std::ostringstream msg;
    msg << "least squares solution has imaginary part " << imag;
    throw ImaginaryResidue(msg.str(), imag);
  }

  auto op = operator_from_values(pattern, values);
  const auto mu = eigenvalues(op).values;
  double objective = 0.0;
  for (std::size_t k = 0; k < nx; ++k) objective += weights[k] * std::norm(target[k] - mu[k]);

  return OptimizedPsi{std::move(op), pattern, imag, objective, condition, Method::Linear, 0};
}

double smooth_mode_bound(Complex lambda, Complex mu, std::size_t m, std::size_t nt) {
  const double a = std::abs(mu);
  if (a < 1.0 - 1e-14) return mode_bound(lambda, mu, m, nt);
  Complex lm = 1.0;
  for (std::size_t i = 0; i < m; ++i) lm *= lambda;
  const std::size_t terms = nt / m - 1;
  double sum = 0.0;
  double power = 1.0;
  for (std::size_t k = 0; k < terms; ++k) {
    sum += power;
    power *= a;
  }
  return std::sqrt(static_cast<double>(m)) * std::abs(lm) * std::abs(lm - mu) * sum;
}

OptimizedPsi nonlinear_lsq_psi(std::span<const Complex> phi_spectrum, const SparsityPattern& pattern,
                               std::size_t m, std::size_t nt, const OptimizedPsi& init,
                               const NonlinearOptions& options) {
  const std::size_t nx = pattern.nx();
  if (phi_spectrum.size() != nx) throw DimensionMismatch("nonlinear_lsq_psi: spectrum size differs");
  if (!(init.pattern == pattern)) throw InvalidPattern("nonlinear_lsq_psi: init uses another pattern");
  if (m == 0 || nt % m != 0) throw InvalidArgument("nonlinear_lsq_psi: nt must be divisible by m");

  const Eigen::MatrixXcd fourier = fourier_columns(pattern);
  const auto nu = static_cast<Eigen::Index>(pattern.size());
  const auto n = static_cast<Eigen::Index>(nx);
  const double scale = 1.0 / std::sqrt(static_cast<double>(nx));

  auto residuals = [&](const Eigen::VectorXcd& mu, Eigen::VectorXd& r) {
    for (Eigen::Index k = 0; k < n; ++k)
      r(k) = scale * smooth_mode_bound(phi_spectrum[static_cast<std::size_t>(k)], mu(k), m, nt);
  };
  auto admissible = [&](const Eigen::VectorXcd& mu, const Eigen::VectorXd& r) {
    return max_modulus(mu) <= 1.0 + kStabilityTolerance && r.allFinite();
  };

  Eigen::VectorXd x(nu);
  const auto init_values = init.values();
  for (Eigen::Index j = 0; j < nu; ++j) x(j) = init_values[static_cast<std::size_t>(j)];
  Eigen::VectorXcd mu = fourier * x.cast<Complex>();
  Eigen::VectorXd r(n);
  residuals(mu, r);
  if (!admissible(mu, r))
    throw NonFiniteObjective("nonlinear_lsq_psi: initial iterate has |mu_k| >= 1 or a non-finite bound");
  double f = r.squaredNorm();

  double damping = options.initial_damping;
  std::size_t iterations = 0;
  Eigen::MatrixXd jac(n, nu);
  Eigen::VectorXd r_trial(n);
  for (; iterations < options.max_iters; ++iterations) {
    for (Eigen::Index j = 0; j < nu; ++j) {
      const double h = kFiniteDifferenceStep * std::max(1.0, std::abs(x(j)));
      const Eigen::VectorXcd mu_h = mu + h * fourier.col(j);
      residuals(mu_h, r_trial);
      jac.col(j) = (r_trial - r) / h;
    }
    if (!jac.allFinite()) break;
    const Eigen::MatrixXd h = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool accepted = false;
    double f_trial = f;
    for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
      Eigen::MatrixXd lhs = h;
      for (Eigen::Index j = 0; j < nu; ++j) lhs(j, j) += damping * std::max(h(j, j), 1e-300);
      const Eigen::VectorXd step = lhs.ldlt().solve(-g);
      if (!step.allFinite()) {
        damping *= 10.0;
        continue;
      }
      const Eigen::VectorXd x_trial = x + step;
      const Eigen::VectorXcd mu_trial = fourier * x_trial.cast<Complex>();
      residuals(mu_trial, r_trial);
      if (admissible(mu_trial, r_trial) && (f_trial = r_trial.squaredNorm()) < f) {
        x = x_trial;
        mu = mu_trial;
        r = r_trial;
        accepted = true;
        damping = std::max(damping / 10.0, 1e-12);
      } else {
        damping *= 10.0;
      }
    }
    if (!accepted) break;
    const double decrease = (f - f_trial) / std::max(f, 1e-300);
    f = f_trial;
    if (decrease < options.relative_tolerance) {
      ++iterations;
      break;
    }
  }

  std::vector<double> values(x.data(), x.data() + nu);
  auto op = operator_from_values(pattern, values);
  return OptimizedPsi{std::move(op), pattern, init.imag_residue, f, init.condition,
                      Method::Nonlinear, iterations};
}

void require_stable(const OptimizedPsi& psi) {
  const double radius = psi.spectral_radius();
  if (radius > 1.0 + kStabilityTolerance) {
    std::ostringstream msg;
    msg << "coarse operator has spectral radius " << radius;
    throw UnstableScheme(msg.str());
  }
}

Stepper psi_from_rediscretization(const SchemeSpec& spec, std::size_t m, SpecChecks checks) {
  if (m == 0) throw InvalidArgument("coarsening factor must be >= 1");
  return build_phi(spec.scheme, spec.nx, spec.dt() * static_cast<double>(m), spec.alpha, checks);
}

Hierarchy build_multilevel_psis(const SchemeSpec& fine, std::size_t m, std::size_t levels,
                                const MultilevelOptions& options) {
  if (levels == 0) throw InvalidArgument("build_multilevel_psis: levels must be >= 1");
  std::vector<Stepper> steppers{build_phi(fine)};
  for (std::size_t l = 1; l < levels; ++l) {
    const Stepper& previous = steppers.back();
    const auto column = ideal_column(previous, static_cast<unsigned>(m));
    const auto lambda = previous.eigenvalues();
    const auto weights = weight_vector(lambda.values);
    const std::size_t width =
        l - 1 < options.widths.size() ? options.widths[l - 1] : previous.nnz() + options.extra;
    const auto pattern = select_pattern(column.values, IdealWindow{0}, width);
    auto psi = linear_lsq_psi(column.values, pattern, weights);
    require_stable(psi);
    steppers.emplace_back(std::move(psi.op));
  }
  const std::size_t min_points =
      options.min_coarse_points ? options.min_coarse_points : default_min_coarse_points(fine.scheme.order);
  return Hierarchy(std::move(steppers), fine.nt, m, levels > 1 ? min_points : 1);
}

}  // namespace advmg
