#include <gtest/gtest.h>

#include <sstream>

#include "advmg/discretization.hpp"
#include "advmg/errors.hpp"
#include "advmg/mgrit.hpp"
#include "advmg/optimizer.hpp"
#include "oracles.hpp"

using namespace advmg;

namespace {

SpaceTimeState random_state(std::size_t nx, std::size_t nt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto u0 = oracle::random_vector(nx, rng);
  return SpaceTimeState::random_initial(u0, nt, seed + 1);
}

SpaceTimeState consistent_state(const Stepper& phi, std::size_t nt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto u0 = oracle::random_vector(phi.size(), rng);
  return SpaceTimeState{sequential_solve(phi, nt, u0), seed};
}

Stepper erk3_phi(std::size_t nx) { return build_phi(SchemeSpec::preset({Family::ERK, 3}, nx)); }

SolveOptions options_for(const SchemeSpec& spec) {
  SolveOptions o;
  o.dt = spec.dt();
  return o;
}

// Stable explicit coarse stepper unrelated to Phi^m: a damped one-sided average.
Stepper crude_psi(std::size_t nx) {
  std::vector<double> col(nx, 0.0);
  col[0] = 0.3;
  col[1] = 0.5;
  return Stepper(CirculantOperator(col));
}

}  // namespace

TEST(Relax, FRelaxWithUnitFactorIsNoOp) {
  const auto phi = erk3_phi(16);
  auto s = random_state(16, 8, 1);
  const auto before = s.values;
  f_relax(s, phi, 1);
  EXPECT_EQ(s.values, before);
}

TEST(Relax, ConsistentTrajectoryIsFixedPoint) {
  const auto phi = erk3_phi(16);
  const auto s0 = consistent_state(phi, 8, 2);
  for (auto sweep : {f_relax, c_relax, fcf_relax}) {
    auto s = s0;
    sweep(s, phi, 4, 1);
    EXPECT_LT(oracle::max_abs_diff(s.values.data(), s0.values.data()), 1e-15);
  }
}

TEST(Relax, FRelaxMatchesDirectLoop) {
  const auto phi = erk3_phi(16);
  auto s = random_state(16, 8, 3);
  auto expected = s.values;
  for (std::size_t c : {0u, 4u}) {
    std::vector<double> u(expected.at(c).begin(), expected.at(c).end());
    for (std::size_t k = 1; k < 4; ++k) {
      u = phi.apply(u);
      std::copy(u.begin(), u.end(), expected.at(c + k).begin());
    }
  }
  f_relax(s, phi, 4);
  EXPECT_EQ(s.values, expected);
}

TEST(Relax, CRelaxWithUnitFactorRestepsEveryPoint) {
  const auto phi = erk3_phi(16);
  auto s = random_state(16, 4, 4);
  // Every point is a C-point, so each is stepped from its predecessor's old value.
  const auto before = s.values;
  auto expected = s.values;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto u = phi.apply(before.at(n - 1));
    std::copy(u.begin(), u.end(), expected.at(n).begin());
  }
  c_relax(s, phi, 1);
  EXPECT_EQ(s.values, expected);
}

TEST(Relax, CRelaxMatchesDirectOracle) {
  const auto phi = erk3_phi(16);
  auto s = random_state(16, 4, 5);
  const auto before = s.values;
  c_relax(s, phi, 2);
  EXPECT_EQ(oracle::max_abs_diff(s.values.at(2), phi.apply(before.at(1))), 0.0);
  EXPECT_EQ(oracle::max_abs_diff(s.values.at(4), phi.apply(before.at(3))), 0.0);
  EXPECT_EQ(oracle::max_abs_diff(s.values.at(1), before.at(1)), 0.0);
  EXPECT_EQ(oracle::max_abs_diff(s.values.at(3), before.at(3)), 0.0);
}

TEST(Relax, FcfEqualsSequencedSweeps) {
  const auto phi = erk3_phi(32);
  auto a = random_state(32, 16, 6);
  auto b = a;
  fcf_relax(a, phi, 4);
  f_relax(b, phi, 4);
  c_relax(b, phi, 4);
  f_relax(b, phi, 4);
  EXPECT_EQ(a.values, b.values);
}

TEST(Residual, ConsistentTrajectoryIsZero) {
  const auto phi = erk3_phi(32);
  const auto s = consistent_state(phi, 16, 7);
  EXPECT_LT(residual(s, phi, 0.1), 1e-13);
}

TEST(Residual, ZeroStateMatchesDenseOracle) {
  const auto spec = SchemeSpec::preset({Family::ERK, 2}, 16);
  const auto phi = build_phi(spec);
  std::mt19937_64 rng(8);
  const auto u0 = oracle::random_vector(16, rng);
  SpaceTimeState s{SpaceTimeArray(16, 4), 0};
  std::copy(u0.begin(), u0.end(), s.values.at(0).begin());
  const auto dense = oracle::dense_circulant(phi.explicit_operator()->first_column());
  const auto r = oracle::matvec(dense, u0);
  double sum = 0.0;
  for (double v : r) sum += v * v;
  const double expected = std::sqrt(spec.dx() * spec.dt() * sum);
  EXPECT_NEAR(residual(s, phi, spec.dt()), expected, 1e-14 * expected);
}

TEST(CoarseCorrection, ZeroResidualLeavesStateUnchanged) {
  const auto phi = erk3_phi(32);
  const auto s0 = consistent_state(phi, 16, 9);
  auto s = s0;
  coarse_correction(s, phi, crude_psi(32), 4);
  EXPECT_LT(oracle::max_abs_diff(s.values.data(), s0.values.data()), 1e-14);
}

TEST(CoarseCorrection, IdealPsiIsExactAfterOneCorrection) {
  const auto spec = SchemeSpec::preset({Family::ERK, 3}, 32);
  const auto phi = build_phi(spec);
  const Stepper psi(power(*phi.explicit_operator(), 4));
  auto s = random_state(32, spec.nt, 10);
  fcf_relax(s, phi, 4);
  coarse_correction(s, phi, psi, 4);
  EXPECT_LE(residual(s, phi, spec.dt()), 1e-12);
}

TEST(CoarseCorrection, ScalarModeMatchesClosedFormPropagator) {
  // One FCF + coarse correction on C-point errors c_1..c_N (c_0 = 0) maps
  // c to c'' with c''_j = mu c''_{j-1} + (lambda^m - mu) lambda^m c_{j-2}.
  // Closed form: E[j][i] = mu^{j-i-2} (lambda^m - mu) lambda^m for j >= i + 2.
  const double lambda = 0.93;
  const double mu = 0.6;
  const std::size_t m = 4;
  const std::size_t nt = 32;
  const std::size_t nc = nt / m;
  // Diagonal 2x2 circulants act as the scalar problem on each component.
  const Stepper phi(CirculantOperator(std::vector<double>{lambda, 0.0}));
  const Stepper psi(CirculantOperator(std::vector<double>{mu, 0.0}));
  const double lm = std::pow(lambda, static_cast<double>(m));
  for (std::size_t i = 1; i <= nc; ++i) {
    SpaceTimeState s{SpaceTimeArray(2, nt), 0};
    s.values.at(i * m)[0] = 1.0;
    s.values.at(i * m)[1] = 1.0;
    fcf_relax(s, phi, m);
    coarse_correction(s, phi, psi, m);
    for (std::size_t j = 1; j <= nc; ++j) {
      const double expected = j >= i + 2 ? std::pow(mu, static_cast<double>(j - i - 2)) * (lm - mu) * lm : 0.0;
      EXPECT_NEAR(s.values.at(j * m)[0], expected, 1e-14) << "i=" << i << " j=" << j;
      EXPECT_EQ(s.values.at(j * m)[1], s.values.at(j * m)[0]);
    }
  }
}

TEST(Solve, IdealPsiConvergesInOneIterationEveryScheme) {
  for (const auto& id : all_schemes()) {
    const auto spec = SchemeSpec::preset(id, 128);
    const auto phi = build_phi(spec);
    for (std::size_t m : {2u, 4u, 8u}) {
      Stepper psi = phi;
      if (const auto* op = phi.explicit_operator())
        psi = Stepper(power(*op, static_cast<unsigned>(m)));
      else
        psi = Stepper(CirculantOperator(rational_first_column_power(*phi.rational(), static_cast<unsigned>(m)).values));
      const auto report = solve(Hierarchy::two_level(phi, psi, spec.nt, m),
                                sample(default_profile, spec.nx), options_for(spec));
      EXPECT_TRUE(report.converged) << id.name() << " m=" << m;
      EXPECT_EQ(report.iterations, 1u) << id.name() << " m=" << m;
    }
  }
}

TEST(Solve, ExactnessBySequentialPropagation) {
  const auto spec = SchemeSpec::with_cfl({Family::ERK, 3}, 32, 16, 1.0);
  const auto phi = build_phi(spec);
  SolveOptions o = options_for(spec);
  o.tol = 0.0;
  o.max_iters = 4;
  o.divergence_factor = 1e300;
  const auto report = solve(Hierarchy::two_level(phi, crude_psi(32), 16, 2), sample(default_profile, 32), o);
  ASSERT_EQ(report.residual_history.size(), 5u);
  EXPECT_LE(report.residual_history[4], 1e-10);
}

TEST(SolveProperty, ExactnessAcrossFactorsAndSchemes) {
  for (int p = 1; p <= 5; ++p) {
    for (std::size_t nt : {16u, 32u, 64u}) {
      const auto spec = SchemeSpec::with_cfl({Family::ERK, p}, 32, nt, 0.5 * cfl_limit(p));
      const auto phi = build_phi(spec);
      for (std::size_t m : {2u, 4u, 8u}) {
        SolveOptions o = options_for(spec);
        o.tol = 0.0;
        o.max_iters = (nt + 2 * m - 1) / (2 * m);
        o.divergence_factor = 1e300;
        const auto report = solve(Hierarchy::two_level(phi, crude_psi(32), nt, m), sample(default_profile, 32), o);
        EXPECT_LE(report.final_residual(), 1e-9) << p << " nt=" << nt << " m=" << m;
      }
    }
  }
}

TEST(SolveProperty, InitialConditionIsPinned) {
  const auto spec = SchemeSpec::preset({Family::SDIRK, 2}, 32);
  const auto phi = build_phi(spec);
  auto s = random_state(32, spec.nt, 11);
  const std::vector<double> u0(s.values.at(0).begin(), s.values.at(0).end());
  SolveOptions o = options_for(spec);
  o.max_iters = 3;
  solve(Hierarchy::two_level(phi, crude_psi(32), spec.nt, 4), s, o);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(s.values.at(0)[i], u0[i]);
}

TEST(SolveProperty, SerialAndParallelHistoriesAreBitwiseEqual) {
  for (const auto& id : {SchemeId{Family::ERK, 3}, SchemeId{Family::SDIRK, 3}}) {
    const auto spec = SchemeSpec::preset(id, 64);
    const auto phi = build_phi(spec);
    const auto u0 = sample(default_profile, 64);
    SolveOptions o = options_for(spec);
    o.max_iters = 6;
    const auto h = Hierarchy::two_level(phi, crude_psi(64), spec.nt, 4);
    const auto serial = solve(h, u0, o);
    for (unsigned threads : {2u, 3u, 8u}) {
      o.threads = threads;
      const auto parallel = solve(h, u0, o);
      EXPECT_EQ(parallel.residual_history, serial.residual_history) << id.name() << " threads=" << threads;
    }
  }
}

TEST(SolveProperty, IterationCountIndependentOfInitialCondition) {
  const auto spec = SchemeSpec::preset({Family::SDIRK, 1}, 64);
  const auto phi = build_phi(spec);
  const auto h = Hierarchy::two_level(phi, psi_from_rediscretization(spec, 2), spec.nt, 2);
  SolveOptions o = options_for(spec);
  o.seed = 42;
  const auto a = solve(h, sample(default_profile, 64), o);
  const auto b = solve(h, sample([](double x) { return std::cos(3.0 * oracle::kPi * x) + 2.0; }, 64), o);
  EXPECT_TRUE(a.converged);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Solve, ResidualHistoryInvariants) {
  const auto spec = SchemeSpec::preset({Family::ERK, 2}, 64);
  const auto phi = build_phi(spec);
  const auto report = solve(Hierarchy::two_level(phi, crude_psi(64), spec.nt, 4), sample(default_profile, 64),
                            options_for(spec));
  ASSERT_EQ(report.residual_history.size(), report.iterations + 1);
  for (double r : report.residual_history) EXPECT_GE(r, 0.0);
  EXPECT_EQ(report.converged, report.final_residual() < 1e-10);
}

TEST(Solve, DivergenceIsFlagged) {
  // ERK1 rediscretized at m = 2 violates the coarse CFL limit.
  const auto spec = SchemeSpec::preset({Family::ERK, 1}, 64);
  const auto phi = build_phi(spec);
  const auto psi = psi_from_rediscretization(spec, 2, {.allow_unstable = true});
  const auto report = solve(Hierarchy::two_level(phi, psi, spec.nt, 2), sample(default_profile, 64),
                            options_for(spec));
  EXPECT_TRUE(report.diverged);
  EXPECT_FALSE(report.converged);
}

TEST(Solve, StateShapeMismatchThrows) {
  const auto phi = erk3_phi(16);
  auto s = random_state(16, 8, 12);
  EXPECT_THROW(solve(Hierarchy::two_level(phi, crude_psi(16), 16, 2), s), DimensionMismatch);
}

TEST(Hierarchy, DivisibilityAndMinimumPoints) {
  const auto phi = erk3_phi(16);
  EXPECT_THROW(Hierarchy::two_level(phi, phi, 10, 4), InvalidArgument);
  EXPECT_THROW(Hierarchy({phi, phi, phi}, 32, 4, 8), GridTooSmall);
  const Hierarchy h({phi, phi, phi}, 64, 4, 4);
  EXPECT_EQ(h.level(1).nt, 16u);
  EXPECT_EQ(h.level(2).nt, 4u);
  EXPECT_EQ(default_min_coarse_points(1), 4u);
  EXPECT_EQ(default_min_coarse_points(3), 8u);
}

TEST(OperatorComplexity, SingleLevelIsOne) {
  EXPECT_DOUBLE_EQ(operator_complexity(Hierarchy({erk3_phi(16)}, 8, std::vector<std::size_t>{})), 1.0);
}

TEST(OperatorComplexity, EqualSparsityTwoLevel) {
  const auto phi = build_phi(SchemeSpec::preset({Family::ERK, 1}, 32));
  ASSERT_EQ(phi.nnz(), 2u);
  EXPECT_DOUBLE_EQ(operator_complexity(Hierarchy::two_level(phi, crude_psi(32), 64, 4)), 1.25);
}

TEST(OperatorComplexity, IdealCostLevelsGiveLevelCount) {
  // A coarse stepper costing m^{l-1} fine applications per step.
  const std::size_t m = 4;
  const std::size_t nx = 256;
  std::vector<Stepper> steppers;
  for (std::size_t l = 0, width = 2; l < 4; ++l, width *= m) {
    std::vector<double> col(nx, 0.0);
    for (std::size_t d = 0; d < width; ++d) col[d] = 1.0 / static_cast<double>(width);
    steppers.emplace_back(CirculantOperator(col));
  }
  EXPECT_DOUBLE_EQ(operator_complexity(Hierarchy(steppers, 256, m)), 4.0);
}

TEST(OperatorComplexity, RationalCountsNumeratorAndDenominator) {
  const auto phi = build_phi(SchemeSpec::preset({Family::SDIRK, 1}, 32));
  const auto* r = phi.rational();
  EXPECT_EQ(phi.nnz(), r->numerator().nnz() + r->denominator().nnz());
}

TEST(Report, CsvRows) {
  SolveReport r;
  r.iterations = 1;
  r.residual_history = {1.0, 0.5};
  std::ostringstream out;
  r.write_csv(out);
  EXPECT_EQ(out.str().substr(0, 19), "iteration,residual\n");
}
