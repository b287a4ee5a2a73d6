#pragma once

#include <complex>
#include <span>
#include <vector>

namespace advmg::dft {

using Complex = std::complex<double>;

// Forward transform: X[k] = sum_j x[j] exp(-2*pi*i*j*k/n), no normalization.
std::vector<Complex> forward(std::span<const Complex> x);
std::vector<Complex> forward(std::span<const double> x);

// Inverse transform: x[j] = (1/n) sum_k X[k] exp(+2*pi*i*j*k/n).
std::vector<Complex> inverse(std::span<const Complex> x);

// In-place variants writing into a caller-owned buffer of the same length.
void forward_into(std::span<const Complex> in, std::span<Complex> out);
void inverse_into(std::span<const Complex> in, std::span<Complex> out);

// Real part of an inverse transform together with the largest |imag| seen.
struct RealSignal {
  std::vector<double> values;
  double imag_residue = 0.0;
};

RealSignal inverse_real(std::span<const Complex> x);

// Truncate the imaginary part, throwing ImaginaryResidue when it exceeds `tolerance`.
std::vector<double> truncate_imaginary(const RealSignal& signal, double tolerance = 1e-8);

inline double frequency(std::size_t k, std::size_t n) {
  return 2.0 * 3.14159265358979323846 * static_cast<double>(k) / static_cast<double>(n);
}

}  // namespace advmg::dft
