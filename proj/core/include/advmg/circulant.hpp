#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace advmg {

using Complex = std::complex<double>;

/// Eigenvalues of a circulant matrix indexed by Fourier frequency k, with
/// theta_k = 2*pi*k/n. values[k] = sum_j c[j] exp(-i theta_k j).
struct SpectralDiagonal {
  std::vector<Complex> values;

  std::size_t size() const noexcept { return values.size(); }
  double frequency(std::size_t k) const;
  std::vector<double> frequencies() const;
  double max_abs() const;
};

/// Real n x n circulant matrix stored by its first column. Entry (i, j) is
/// first_column[(i - j) mod n]; the matrix is only densified on request.
///
/// Two index conventions appear throughout the library:
///  - column index d: position in first_column, i.e. row minus column;
///  - diagonal index o = -d (column minus row), the convention used for
///    sparsity patterns. An upwind stepper that moves information to the
///    right has its mass on negative diagonal indices.
class CirculantOperator {
 public:
  explicit CirculantOperator(std::vector<double> first_column);

  static CirculantOperator identity(std::size_t n);
  /// Permutation whose first column is e_{k mod n}: (S u)[i] = u[i - k].
  static CirculantOperator shift(std::size_t n, std::ptrdiff_t k = 1);
  /// Operator with `values[t]` on diagonal index `diagonals[t]` (duplicates add up).
  static CirculantOperator from_diagonals(std::size_t n, std::span<const int> diagonals,
                                          std::span<const double> values);

  std::size_t size() const noexcept { return column_.size(); }
  std::span<const double> first_column() const noexcept { return column_; }
  double entry(std::size_t row, std::size_t col) const;
  /// Value on diagonal index o (column minus row), o taken modulo n.
  double diagonal(std::ptrdiff_t o) const;

  /// Nonzeros per row (entries with |value| > 0).
  std::size_t nnz() const noexcept { return nonzeros_.size(); }
  /// Nonzero diagonal indices mapped to (-n/2, n/2], sorted ascending.
  std::vector<int> diagonal_indices() const;

  std::vector<double> apply(std::span<const double> u) const;
  /// out = C u. `out` must not alias `u`.
  void apply_into(std::span<const double> u, std::span<double> out) const;

  CirculantOperator operator+(const CirculantOperator& other) const;
  CirculantOperator scaled(double factor) const;

  /// Row-major dense copy; throws InvalidArgument for n > 4096.
  std::vector<double> dense() const;

 private:
  std::vector<double> column_;
  std::vector<std::pair<std::size_t, double>> nonzeros_;
  // Set when the operator is dense enough that FFT application is cheaper.
  std::shared_ptr<const std::vector<Complex>> spectrum_;
};

SpectralDiagonal eigenvalues(const CirculantOperator& op);
/// Inverse of `eigenvalues`; throws ImaginaryResidue when the result is not real to 1e-8.
CirculantOperator from_spectrum(std::span<const Complex> values);

CirculantOperator multiply(const CirculantOperator& a, const CirculantOperator& b);

/// op^m. Exact repeated convolution for m <= 8, spectral powering above that.
CirculantOperator power(const CirculantOperator& op, unsigned m);

/// Solves op x = b in Fourier space; throws SingularOperator if any |lambda_k| <= 1e-13.
std::vector<double> solve(const CirculantOperator& op, std::span<const double> b);

/// Implicit Runge-Kutta step P(dt L) Q(dt L)^{-1} with P, Q circulant.
class RationalStepper {
 public:
  RationalStepper(CirculantOperator numerator, CirculantOperator denominator);

  std::size_t size() const noexcept { return numerator_.size(); }
  const CirculantOperator& numerator() const noexcept { return numerator_; }
  const CirculantOperator& denominator() const noexcept { return denominator_; }
  /// p_k / q_k for every frequency.
  const std::vector<Complex>& symbol() const noexcept { return *symbol_; }

  /// out = P Q^{-1} u: numerator product followed by one spectral solve.
  void apply_into(std::span<const double> u, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> u) const;

 private:
  CirculantOperator numerator_;
  CirculantOperator denominator_;
  std::shared_ptr<const std::vector<Complex>> denominator_spectrum_;
  std::shared_ptr<const std::vector<Complex>> symbol_;
};

struct DenseColumn {
  std::vector<double> values;
  double imag_residue = 0.0;
};

/// First column of (P Q^{-1})^m via the inverse DFT of (p_k/q_k)^m. The
/// imaginary part is dropped and reported; residues above 1e-8 throw.
DenseColumn rational_first_column_power(const RationalStepper& stepper, unsigned m);

/// Dense CSV dump for debugging; refuses n > 4096.
void write_dense_csv(const CirculantOperator& op, std::ostream& out);

}  // namespace advmg
