#include "advmg/circulant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "advmg/dft.hpp"
#include "advmg/errors.hpp"

namespace advmg {
namespace {

constexpr double kSingularTolerance = 1e-13;
constexpr std::size_t kMaxDenseExport = 4096;

std::size_t wrap(std::ptrdiff_t k, std::size_t n) {
  const auto nn = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((k % nn) + nn) % nn);
}

bool use_fft_apply(std::size_t nnz, std::size_t n) {
  const double log_n = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
  return static_cast<double>(nnz) > 8.0 * log_n + 16.0;
}

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(msg.str());
  }
}

// Circular convolution via the sparse representation of `a`.
std::vector<double> convolve(std::span<const std::pair<std::size_t, double>> a_nonzeros,
                             std::span<const double> b) {
  const std::size_t n = b.size();
  std::vector<double> out(n, 0.0);
  for (const auto& [d, v] : a_nonzeros) {
    for (std::size_t j = 0; j + d < n; ++j) out[j + d] += v * b[j];
    for (std::size_t j = n - d; j < n && d > 0; ++j) out[j + d - n] += v * b[j];
  }
  return out;
}

void spectral_apply(std::span<const Complex> spectrum, std::span<const double> u,
                    std::span<double> out) {
  const std::size_t n = u.size();
  std::vector<Complex> buffer(u.begin(), u.end());
  std::vector<Complex> transformed(n);
  dft::forward_into(buffer, transformed);
  for (std::size_t k = 0; k < n; ++k) transformed[k] *= spectrum[k];
  dft::inverse_into(transformed, buffer);
  for (std::size_t i = 0; i < n; ++i) out[i] = buffer[i].real();
}

}  // namespace

double SpectralDiagonal::frequency(std::size_t k) const { return dft::frequency(k, values.size()); }

std::vector<double> SpectralDiagonal::frequencies() const {
  std::vector<double> theta(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) theta[k] = frequency(k);
  return theta;
}

double SpectralDiagonal::max_abs() const {
  double best = 0.0;
  for (const auto& v : values) best = std::max(best, std::abs(v));
  return best;
}

CirculantOperator::CirculantOperator(std::vector<double> first_column)
    : column_(std::move(first_column)) {
  if (column_.size() < 2) throw InvalidArgument("circulant operator needs n >= 2");
  for (std::size_t d = 0; d < column_.size(); ++d) {
    if (column_[d] != 0.0) nonzeros_.emplace_back(d, column_[d]);
  }
  if (use_fft_apply(nonzeros_.size(), column_.size())) {
    spectrum_ = std::make_shared<const std::vector<Complex>>(dft::forward(column_));
  }
}

CirculantOperator CirculantOperator::identity(std::size_t n) { return shift(n, 0); }

CirculantOperator CirculantOperator::shift(std::size_t n, std::ptrdiff_t k) {
  if (n < 2) throw InvalidArgument("circulant operator needs n >= 2");
  std::vector<double> column(n, 0.0);
  column[wrap(k, n)] = 1.0;
  return CirculantOperator(std::move(column));
}

CirculantOperator CirculantOperator::from_diagonals(std::size_t n, std::span<const int> diagonals,
                                                    std::span<const double> values) {
  check_same_size(diagonals.size(), values.size(), "from_diagonals");
  if (n < 2) throw InvalidArgument("circulant operator needs n >= 2");
  std::vector<double> column(n, 0.0);
  for (std::size_t t = 0; t < diagonals.size(); ++t) column[wrap(-diagonals[t], n)] += values[t];
  return CirculantOperator(std::move(column));
}

double CirculantOperator::entry(std::size_t row, std::size_t col) const {
  const std::size_t n = size();
  return column_[(row + n - (col % n)) % n];
}

double CirculantOperator::diagonal(std::ptrdiff_t o) const { return column_[wrap(-o, size())]; }

std::vector<int> CirculantOperator::diagonal_indices() const {
  const auto n = static_cast<std::ptrdiff_t>(size());
  std::vector<int> out;
  out.reserve(nonzeros_.size());
  for (const auto& [d, v] : nonzeros_) {
    auto o = -static_cast<std::ptrdiff_t>(d);
    if (2 * o <= -n) o += n;  // into (-n/2, n/2]
    out.push_back(static_cast<int>(o));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> CirculantOperator::apply(std::span<const double> u) const {
  std::vector<double> out(size());
  apply_into(u, out);
  return out;
}

void CirculantOperator::apply_into(std::span<const double> u, std::span<double> out) const {
  const std::size_t n = size();
  check_same_size(u.size(), n, "circulant apply");
  check_same_size(out.size(), n, "circulant apply output");
  if (spectrum_) {
    spectral_apply(*spectrum_, u, out);
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& [d, v] : nonzeros_) {
    // out[i] += v * u[i - d]
    for (std::size_t i = d; i < n; ++i) out[i] += v * u[i - d];
    for (std::size_t i = 0; i < d; ++i) out[i] += v * u[i + n - d];
  }
}

CirculantOperator CirculantOperator::operator+(const CirculantOperator& other) const {
  check_same_size(size(), other.size(), "circulant add");
  std::vector<double> sum(column_);
  for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += other.column_[d];
  return CirculantOperator(std::move(sum));
}

CirculantOperator CirculantOperator::scaled(double factor) const {
  std::vector<double> out(column_);
  for (auto& v : out) v *= factor;
  return CirculantOperator(std::move(out));
}

std::vector<double> CirculantOperator::dense() const {
  const std::size_t n = size();
  if (n > kMaxDenseExport) throw InvalidArgument("refusing to densify a circulant with n > 4096");
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = entry(i, j);
  return out;
}

SpectralDiagonal eigenvalues(const CirculantOperator& op) {
  return SpectralDiagonal{dft::forward(op.first_column())};
}

CirculantOperator from_spectrum(std::span<const Complex> values) {
  return CirculantOperator(dft::truncate_imaginary(dft::inverse_real(values)));
}

CirculantOperator multiply(const CirculantOperator& a, const CirculantOperator& b) {
  check_same_size(a.size(), b.size(), "circulant multiply");
  const CirculantOperator& sparse = a.nnz() <= b.nnz() ? a : b;
  const CirculantOperator& other = a.nnz() <= b.nnz() ? b : a;
  std::vector<std::pair<std::size_t, double>> nonzeros;
  const auto column = sparse.first_column();
  for (std::size_t d = 0; d < column.size(); ++d)
    if (column[d] != 0.0) nonzeros.emplace_back(d, column[d]);
  return CirculantOperator(convolve(nonzeros, other.first_column()));
}

CirculantOperator power(const CirculantOperator& op, unsigned m) {
  if (m == 0) throw InvalidArgument("power: exponent must be >= 1");
  if (m <= 8) {
    CirculantOperator result = op;
    for (unsigned k = 1; k < m; ++k) result = multiply(result, op);
    return result;
  }
  auto spectrum = eigenvalues(op).values;
  for (auto& v : spectrum) {
    // Repeated squaring keeps the rounding independent of m's size.
    Complex base = v;
    Complex acc = 1.0;
    unsigned e = m;
    while (e > 0) {
      if (e & 1U) acc *= base;
      base *= base;
      e >>= 1U;
    }
    v = acc;
  }
  return from_spectrum(spectrum);
}

std::vector<double> solve(const CirculantOperator& op, std::span<const double> b) {
  check_same_size(b.size(), op.size(), "circulant solve");
  auto spectrum = eigenvalues(op).values;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    if (std::abs(spectrum[k]) <= kSingularTolerance) {
      std::ostringstream msg;
      msg << "circulant solve: eigenvalue " << k << " has magnitude " << std::abs(spectrum[k]);
      throw SingularOperator(msg.str());
    }
    spectrum[k] = 1.0 / spectrum[k];
  }
  std::vector<double> out(b.size());
  spectral_apply(spectrum, b, out);
  return out;
}

RationalStepper::RationalStepper(CirculantOperator numerator, CirculantOperator denominator)
    : numerator_(std::move(numerator)), denominator_(std::move(denominator)) {
  check_same_size(numerator_.size(), denominator_.size(), "rational stepper");
  auto q = eigenvalues(denominator_).values;
  auto p = eigenvalues(numerator_).values;
  std::vector<Complex> inverse_q(q.size());
  std::vector<Complex> ratio(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (std::abs(q[k]) <= kSingularTolerance) {
      std::ostringstream msg;
      msg << "rational stepper: denominator eigenvalue " << k << " has magnitude "
          << std::abs(q[k]);
      throw SingularOperator(msg.str());
    }
    inverse_q[k] = 1.0 / q[k];
    ratio[k] = p[k] / q[k];
  }
  denominator_spectrum_ = std::make_shared<const std::vector<Complex>>(std::move(inverse_q));
  symbol_ = std::make_shared<const std::vector<Complex>>(std::move(ratio));
}

void RationalStepper::apply_into(std::span<const double> u, std::span<double> out) const {
  check_same_size(u.size(), size(), "rational apply");
  check_same_size(out.size(), size(), "rational apply output");
  std::vector<double> numerator_applied(size());
  numerator_.apply_into(u, numerator_applied);
  spectral_apply(*denominator_spectrum_, numerator_applied, out);
}

std::vector<double> RationalStepper::apply(std::span<const double> u) const {
  std::vector<double> out(size());
  apply_into(u, out);
  return out;
}

DenseColumn rational_first_column_power(const RationalStepper& stepper, unsigned m) {
  if (m == 0) throw InvalidArgument("rational_first_column_power: exponent must be >= 1");
  std::vector<Complex> spectrum(stepper.symbol());
  for (auto& v : spectrum) v = std::pow(v, static_cast<int>(m));
  auto signal = dft::inverse_real(spectrum);
  DenseColumn column{dft::truncate_imaginary(signal), signal.imag_residue};
  return column;
}

void write_dense_csv(const CirculantOperator& op, std::ostream& out) {
  const auto dense = op.dense();
  const std::size_t n = op.size();
  out.precision(17);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << dense[i * n + j];
    }
    out << '\n';
  }
}

}  // namespace advmg
