#include <gtest/gtest.h>

#include <sstream>

#include "advmg/circulant.hpp"
#include "advmg/discretization.hpp"
#include "advmg/errors.hpp"
#include "oracles.hpp"

using namespace advmg;

namespace {

CirculantOperator random_circulant(std::size_t n, std::mt19937_64& rng) {
  return CirculantOperator(oracle::random_vector(n, rng));
}

double relative_gap(Complex a, Complex b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace

TEST(Circulant, IdentitySpectrumIsOne) {
  const auto eig = eigenvalues(CirculantOperator::identity(8));
  for (const auto& v : eig.values) EXPECT_NEAR(std::abs(v - Complex(1.0, 0.0)), 0.0, 1e-15);
}

TEST(Circulant, DownShiftSpectrum) {
  const auto eig = eigenvalues(CirculantOperator::shift(4, 1));
  for (std::size_t k = 0; k < 4; ++k) {
    const Complex expected = std::polar(1.0, -oracle::kPi * static_cast<double>(k) / 2.0);
    EXPECT_LT(std::abs(eig.values[k] - expected), 1e-15) << k;
  }
}

TEST(Circulant, Erk1SpectrumMatchesSymbol) {
  const auto spec = SchemeSpec::with_cfl({Family::ERK, 1}, 64, 64, 0.85);
  const auto phi = build_phi(spec);
  const auto eig = phi.eigenvalues();
  for (std::size_t k = 0; k < 64; ++k) {
    const double theta = 2.0 * oracle::kPi * static_cast<double>(k) / 64.0;
    const Complex symbol = 1.0 - 0.85 * (1.0 - std::polar(1.0, -theta));
    EXPECT_LT(std::abs(eig.values[k] - symbol), 1e-13) << k;
  }
  EXPECT_LT(std::abs(eig.values[0] - 1.0), 1e-15);
}

TEST(Circulant, SpectrumMatchesNaiveDft) {
  std::mt19937_64 rng(11);
  for (std::size_t n : {4, 7, 16, 33}) {
    const auto a = random_circulant(n, rng);
    const auto eig = eigenvalues(a);
    const auto ref = oracle::naive_dft(a.first_column());
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(eig.values[k] - ref[k]), 1e-12);
  }
}

TEST(Circulant, RoundTripRecoversColumn) {
  std::mt19937_64 rng(12);
  for (std::size_t n : {4, 16, 128}) {
    const auto a = random_circulant(n, rng);
    const auto back = from_spectrum(eigenvalues(a).values);
    EXPECT_LT(oracle::max_abs_diff(back.first_column(), a.first_column()), 1e-12);
  }
}

TEST(Circulant, ConjugateSymmetry) {
  std::mt19937_64 rng(13);
  const auto eig = eigenvalues(random_circulant(64, rng));
  for (std::size_t k = 1; k < 64; ++k)
    EXPECT_NEAR(std::abs(eig.values[k]), std::abs(eig.values[64 - k]),
                1e-12 * std::max(1.0, std::abs(eig.values[k])));
}

TEST(Circulant, MultiplyIdentityIsExact) {
  std::mt19937_64 rng(14);
  const auto x = random_circulant(16, rng);
  const auto y = multiply(CirculantOperator::identity(16), x);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(y.first_column()[i], x.first_column()[i]);
}

TEST(Circulant, ShiftTimesShiftIsDoubleShift) {
  const auto s = CirculantOperator::shift(4, 1);
  const auto s2 = multiply(s, s);
  const std::vector<double> e2{0.0, 0.0, 1.0, 0.0};
  EXPECT_EQ(oracle::max_abs_diff(s2.first_column(), e2), 0.0);
}

TEST(Circulant, MultiplyMatchesDenseProduct) {
  std::mt19937_64 rng(15);
  const auto a = random_circulant(16, rng);
  const auto b = random_circulant(16, rng);
  const auto ab = multiply(a, b);
  const auto dense = oracle::matmul(oracle::dense_circulant(a.first_column()),
                                    oracle::dense_circulant(b.first_column()), 16);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(ab.first_column()[i], dense[i * 16], 1e-13);
}

TEST(Circulant, MultiplyDimensionMismatch) {
  EXPECT_THROW(multiply(CirculantOperator::identity(4), CirculantOperator::identity(8)),
               DimensionMismatch);
}

TEST(CirculantProperty, SpectralHomomorphism) {
  std::mt19937_64 rng(16);
  for (std::size_t n : {4, 8, 16, 64}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto a = random_circulant(n, rng);
      const auto b = random_circulant(n, rng);
      const auto ea = eigenvalues(a).values;
      const auto eb = eigenvalues(b).values;
      const auto eab = eigenvalues(multiply(a, b)).values;
      for (std::size_t k = 0; k < n; ++k) EXPECT_LT(relative_gap(eab[k], ea[k] * eb[k]), 1e-11);
    }
  }
}

TEST(Circulant, PowerOneIsIdentityMap) {
  std::mt19937_64 rng(17);
  const auto x = random_circulant(16, rng);
  EXPECT_EQ(oracle::max_abs_diff(power(x, 1).first_column(), x.first_column()), 0.0);
}

TEST(Circulant, ShiftToThePowerNIsIdentity) {
  const auto p = power(CirculantOperator::shift(16, 1), 16);
  const auto id = CirculantOperator::identity(16);
  EXPECT_LT(oracle::max_abs_diff(p.first_column(), id.first_column()), 1e-14);
}

TEST(Circulant, Erk1PowerFourMatchesDenseMultiplies) {
  const auto spec = SchemeSpec::with_cfl({Family::ERK, 1}, 32, 32, 0.85);
  const auto phi = *build_phi(spec).explicit_operator();
  const auto dense = oracle::dense_circulant(phi.first_column());
  auto acc = dense;
  for (int i = 1; i < 4; ++i) acc = oracle::matmul(acc, dense, 32);
  const auto p4 = power(phi, 4);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_NEAR(p4.first_column()[i], acc[i * 32], 1e-14);
}

TEST(CirculantProperty, PowerMatchesRepeatedMultiply) {
  std::mt19937_64 rng(18);
  for (std::size_t n : {16, 64, 256}) {
    // Contractive columns keep the powers bounded.
    auto col = oracle::random_vector(n, rng, 0.0, 1.0);
    double sum = 0.0;
    for (double v : col) sum += v;
    for (auto& v : col) v /= sum;
    const CirculantOperator a(col);
    CirculantOperator acc = a;
    for (unsigned m = 2; m <= 64; ++m) {
      acc = multiply(acc, a);
      if (m == 2 || m == 9 || m == 16 || m == 33 || m == 64) {
        EXPECT_LT(oracle::max_abs_diff(power(a, m).first_column(), acc.first_column()), 1e-10)
            << "n=" << n << " m=" << m;
      }
    }
  }
}

TEST(Circulant, ApplyIdentityAndShift) {
  const std::vector<double> u{1.0, 2.0, 3.0, 4.0};
  EXPECT_EQ(CirculantOperator::identity(4).apply(u), u);
  const std::vector<double> e0{1.0, 0.0, 0.0, 0.0};
  const std::vector<double> e1{0.0, 1.0, 0.0, 0.0};
  EXPECT_EQ(CirculantOperator::shift(4, 1).apply(e0), e1);
}

TEST(Circulant, ApplyPreservesConstantsForErk1) {
  const auto spec = SchemeSpec::with_cfl({Family::ERK, 1}, 32, 32, 0.85);
  const auto phi = build_phi(spec);
  const std::vector<double> ones(32, 1.0);
  const auto out = phi.apply(ones);
  for (double v : out) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Circulant, ApplyMatchesDenseMatvecSparseAndSpectralPaths) {
  std::mt19937_64 rng(19);
  for (std::size_t n : {8, 64, 256}) {
    auto col = oracle::random_vector(n, rng);
    // Sparse column exercises direct convolution; the dense one the FFT path.
    std::vector<double> sparse(n, 0.0);
    sparse[0] = col[0];
    sparse[1] = col[1];
    sparse[n - 1] = col[2];
    for (const auto& c : {sparse, col}) {
      const CirculantOperator a(c);
      const auto u = oracle::random_vector(n, rng);
      const auto ref = oracle::matvec(oracle::dense_circulant(c), u);
      EXPECT_LT(oracle::max_abs_diff(a.apply(u), ref), 1e-12 * std::max(1.0, oracle::max_abs(ref)));
    }
  }
}

TEST(Circulant, ApplyDimensionMismatch) {
  const std::vector<double> u(5, 1.0);
  EXPECT_THROW(CirculantOperator::identity(4).apply(u), DimensionMismatch);
}

TEST(Circulant, SolveIdentityAndScaled) {
  std::mt19937_64 rng(20);
  const auto b = oracle::random_vector(16, rng);
  EXPECT_LT(oracle::max_abs_diff(solve(CirculantOperator::identity(16), b), b), 1e-15);
  auto half = b;
  for (auto& v : half) v /= 2.0;
  EXPECT_LT(oracle::max_abs_diff(solve(CirculantOperator::identity(16).scaled(2.0), b), half), 1e-15);
}

TEST(Circulant, SolveSdirkDenominatorResidual) {
  const auto spec = SchemeSpec::sdirk_preset(2, 64);
  const auto phi = build_phi(spec);
  const auto& q = phi.rational()->denominator();
  std::mt19937_64 rng(21);
  const auto b = oracle::random_vector(64, rng);
  const auto x = solve(q, b);
  const auto qx = oracle::matvec(oracle::dense_circulant(q.first_column()), x);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    num += (qx[i] - b[i]) * (qx[i] - b[i]);
    den += b[i] * b[i];
  }
  EXPECT_LT(std::sqrt(num / den), 1e-10);
}

TEST(Circulant, SolveSingularThrows) {
  // Zero row sums annihilate constants, so lambda_0 = 0.
  const CirculantOperator d(std::vector<double>{1.0, -1.0, 0.0, 0.0});
  const std::vector<double> b(4, 1.0);
  EXPECT_THROW(solve(d, b), SingularOperator);
}

TEST(Circulant, RationalPowerOfIdentityRatio) {
  std::mt19937_64 rng(22);
  auto col = oracle::random_vector(16, rng);
  col[0] += 20.0;
  const CirculantOperator p(col);
  const RationalStepper r(p, p);
  const auto column = rational_first_column_power(r, 1);
  std::vector<double> e0(16, 0.0);
  e0[0] = 1.0;
  EXPECT_LT(oracle::max_abs_diff(column.values, e0), 1e-14);
}

TEST(Circulant, RationalPowerSdirk1ColumnSumsToOne) {
  const auto spec = SchemeSpec::sdirk_preset(1, 64);
  ASSERT_NEAR(spec.cfl(), 4.0, 1e-14);
  const auto phi = build_phi(spec);
  const auto column = rational_first_column_power(*phi.rational(), 2);
  double sum = 0.0;
  for (double v : column.values) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(Circulant, RationalPowerSdirk3PeakNearCharacteristic) {
  const auto spec = SchemeSpec::sdirk_preset(3, 1024);
  const auto phi = build_phi(spec);
  const auto column = rational_first_column_power(*phi.rational(), 16);
  std::size_t peak = 0;
  for (std::size_t d = 0; d < column.values.size(); ++d)
    if (std::abs(column.values[d]) > std::abs(column.values[peak])) peak = d;
  // Diagonal index of column position d is -d; the characteristic sits at -m c = -64.
  const int offset = -static_cast<int>(peak);
  EXPECT_LE(std::abs(offset + 64), 8) << "peak at " << offset;
}

TEST(CirculantProperty, RationalPowerMatchesDenseRational) {
  const auto spec = SchemeSpec::sdirk_preset(2, 32);
  const auto phi = build_phi(spec);
  const auto* r = phi.rational();
  // Dense Phi = P Q^{-1}: apply to unit vectors column by column.
  std::vector<double> e0(32, 0.0);
  e0[0] = 1.0;
  auto col = e0;
  for (int k = 0; k < 3; ++k) col = r->apply(col);
  const auto column = rational_first_column_power(*r, 3);
  EXPECT_LT(oracle::max_abs_diff(column.values, col), 1e-12);
}

TEST(Circulant, DiagonalIndexConvention) {
  // Shift by +1 moves mass to the row below: diagonal index -1.
  const auto s = CirculantOperator::shift(8, 1);
  EXPECT_EQ(s.diagonal_indices(), std::vector<int>{-1});
  EXPECT_EQ(s.entry(1, 0), 1.0);
  EXPECT_EQ(s.diagonal(-1), 1.0);
  const std::vector<int> diags{-2, 0, 1};
  const std::vector<double> vals{0.5, 0.25, 0.125};
  const auto c = CirculantOperator::from_diagonals(8, diags, vals);
  EXPECT_EQ(c.diagonal_indices(), diags);
  EXPECT_EQ(c.entry(2, 0), 0.5);
  EXPECT_EQ(c.entry(0, 1), 0.125);
}

TEST(Circulant, DenseExportShapeAndLimit) {
  std::ostringstream out;
  write_dense_csv(CirculantOperator::shift(3, 1), out);
  EXPECT_EQ(out.str(), "0,0,1\n1,0,0\n0,1,0\n");
  EXPECT_THROW(CirculantOperator::identity(8192).dense(), InvalidArgument);
}
