#include <gtest/gtest.h>

#include <sstream>

#include "advmg/discretization.hpp"
#include "advmg/errors.hpp"
#include "advmg/optimizer.hpp"
#include "advmg/theory.hpp"
#include "oracles.hpp"

using namespace advmg;

namespace {

using oracle::Complex;

// The FCF bound written out term by term.
double hand_bound(Complex lambda, Complex mu, std::size_t m, std::size_t nt) {
  const double md = static_cast<double>(m);
  const double am = std::abs(mu);
  return std::sqrt(md) * std::pow(std::abs(lambda), md) * std::abs(std::pow(lambda, md) - mu) / (1.0 - am) *
         (1.0 - std::pow(am, static_cast<double>(nt / m) - 1.0));
}

Complex random_in_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> r(0.0, 1.0);
  std::uniform_real_distribution<double> a(-oracle::kPi, oracle::kPi);
  return std::polar(radius * std::sqrt(r(rng)), a(rng));
}

}  // namespace

TEST(Bound, IdealCoarseStepperGivesZeroProfile) {
  const auto phi = build_phi(SchemeSpec::preset({Family::ERK, 3}, 64));
  const Stepper psi(power(*phi.explicit_operator(), 4));
  const auto profile = error_bound(phi, psi, 4, 64);
  EXPECT_LT(profile.max_bound, 1e-12);
}

TEST(Bound, HandEvaluatedExample) {
  const double b = mode_bound(0.5, 0.3, 2, 8);
  EXPECT_NEAR(b, std::sqrt(2.0) * 0.25 * 0.05 / 0.7 * (1.0 - 0.027), 1e-15);
  EXPECT_NEAR(b, 0.02457, 1e-5);
  EXPECT_LE(scalar_mode_oracle(0.5, 0.3, 2, 8), b + 1e-10);
}

TEST(Bound, MatchesHandFormulaOnRandomModes) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const Complex l = random_in_disk(rng, 0.99);
    const Complex mu = random_in_disk(rng, 0.99);
    EXPECT_NEAR(mode_bound(l, mu, 4, 64), hand_bound(l, mu, 4, 64), 1e-13);
  }
}

TEST(Bound, MarginalModesAreFlagged) {
  bool flagged = false;
  const double b = mode_bound(0.9, 1.0, 2, 16, &flagged);
  EXPECT_TRUE(flagged);
  EXPECT_TRUE(std::isinf(b));
  const std::vector<Complex> lambda{Complex(1.0, 0.0), Complex(0.5, 0.0)};
  const std::vector<Complex> mu{Complex(1.0, 0.0), Complex(0.2, 0.0)};
  const auto profile = error_bound(lambda, mu, 2, 16);
  EXPECT_EQ(profile.flagged_count(), 1u);
  EXPECT_TRUE(std::isfinite(profile.bounds[0]));
  EXPECT_EQ(profile.max_bound, *std::max_element(profile.bounds.begin(), profile.bounds.end()));
}

TEST(Bound, DimensionMismatchThrows) {
  const std::vector<Complex> a(4), b(5);
  EXPECT_THROW(error_bound(a, b, 2, 8), DimensionMismatch);
}

TEST(Bound, RediscretizedSdirk3ExceedsOne) {
  const auto spec = SchemeSpec::with_cfl({Family::SDIRK, 3}, 128, 512, 1.0);
  const auto phi = build_phi(spec);
  const auto profile = error_bound(phi, psi_from_rediscretization(spec, 2), 2, spec.nt);
  EXPECT_GT(profile.max_bound, 1.0);
  for (double v : profile.bounds) EXPECT_GE(v, 0.0);
}

TEST(BoundProperty, ProfileIsSymmetricForRealOperators) {
  const auto spec = SchemeSpec::preset({Family::ERK, 2}, 64);
  const auto phi = build_phi(spec);
  std::vector<double> col(64, 0.0);
  col[2] = 0.4;
  col[3] = 0.35;
  col[4] = 0.2;
  const auto profile = error_bound(phi, Stepper(CirculantOperator(col)), 4, spec.nt);
  for (std::size_t k = 1; k < 64; ++k) EXPECT_NEAR(profile.bounds[k], profile.bounds[64 - k], 1e-10);
}

TEST(Oracle, IdealModeIsZero) {
  const Complex l = std::polar(0.95, 0.3);
  EXPECT_LT(scalar_mode_oracle(l, std::pow(l, 4), 4, 64), 1e-14);
}

TEST(Oracle, BelowBoundExample) {
  EXPECT_LE(scalar_mode_oracle(0.9, 0.7, 4, 64), mode_bound(0.9, 0.7, 4, 64));
}

TEST(Oracle, GapShrinksWithTimeSteps) {
  double previous = 1.0;
  for (std::size_t nt : {64u, 256u, 1024u}) {
    const double b = mode_bound(0.9, 0.7, 4, nt);
    const double gap = (b - scalar_mode_oracle(0.9, 0.7, 4, nt)) / b;
    EXPECT_GE(gap, -1e-10);
    EXPECT_LT(gap, previous) << nt;
    previous = gap;
  }
}

TEST(Oracle, RequiresDivisibleGrid) { EXPECT_THROW(scalar_mode_oracle(0.5, 0.2, 3, 16), InvalidArgument); }

TEST(OracleProperty, BoundDominatesOnRandomModes) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 150; ++i) {
    const Complex l = random_in_disk(rng, 0.99);
    const Complex mu = random_in_disk(rng, 0.99);
    for (std::size_t m : {2u, 4u, 8u}) {
      const std::size_t nt = 16 * m;
      EXPECT_LE(scalar_mode_oracle(l, mu, m, nt), mode_bound(l, mu, m, nt) + 1e-10)
          << l << " " << mu << " m=" << m;
    }
  }
}

TEST(Weights, Examples) {
  const WeightingSpec w;
  EXPECT_NEAR(w(0.0), 1.0 / ((1.0 + 1e-6) * (1.0 + 1e-6)), 1e-15);
  EXPECT_NEAR(w(1.0), 1e12, 1e-2);
  for (double z = 0.0; z < 1.0; z += 0.01) {
    EXPECT_GT(w(z), 0.0);
    EXPECT_LT(w(z), w(z + 0.01));
  }
}

TEST(Weights, EvenSymmetryForRealSpectra) {
  std::mt19937_64 rng(33);
  const CirculantOperator a(oracle::random_vector(32, rng));
  const auto w = weight_vector(eigenvalues(a).values);
  for (std::size_t k = 1; k < 32; ++k) EXPECT_NEAR(w[k], w[32 - k], 1e-9 * w[k]);
}

TEST(BoundProfile, CsvRows) {
  const std::vector<Complex> lambda{Complex(0.5, 0.0), Complex(0.4, 0.0)};
  const std::vector<Complex> mu{Complex(0.3, 0.0), Complex(0.2, 0.0)};
  std::ostringstream out;
  error_bound(lambda, mu, 2, 8).write_csv(out);
  EXPECT_EQ(out.str().rfind("theta,bound\n", 0), 0u);
}
