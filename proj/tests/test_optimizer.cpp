#include <gtest/gtest.h>

#include <sstream>

#include "advmg/discretization.hpp"
#include "advmg/errors.hpp"
#include "advmg/experiments.hpp"
#include "advmg/optimizer.hpp"
#include "advmg/presets.hpp"
#include "oracles.hpp"

using namespace advmg;

namespace {

constexpr SchemeId erk(int p) { return {Family::ERK, p}; }

std::size_t column_position(int offset, std::size_t nx) {
  const auto n = static_cast<long>(nx);
  return static_cast<std::size_t>(((-offset) % n + n) % n);
}

OptimizedPsi weighted_fit(const Stepper& phi, std::size_t m, const SparsityPattern& pattern) {
  const auto column = ideal_column(phi, static_cast<unsigned>(m));
  return linear_lsq_psi(column.values, pattern, weight_vector(phi.eigenvalues().values));
}

double bound_objective(std::span<const Complex> lambda, const CirculantOperator& psi, std::size_t m,
                       std::size_t nt) {
  // Objective of the nonlinear fit from the bound formula written out.
  const auto mu = eigenvalues(psi).values;
  const double md = static_cast<double>(m);
  double sum = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double am = std::abs(mu[k]);
    const Complex lm = std::pow(lambda[k], md);
    double b = 0.0;
    if (std::abs(lm - mu[k]) > 0.0)
      b = std::sqrt(md) * std::pow(std::abs(lambda[k]), md) * std::abs(lm - mu[k]) / (1.0 - am) *
          (1.0 - std::pow(am, static_cast<double>(nt / m) - 1.0));
    sum += b * b;
  }
  return sum / static_cast<double>(lambda.size());
}

}  // namespace

TEST(Pattern, Invariants) {
  EXPECT_THROW(SparsityPattern({}, 16), EmptyPattern);
  EXPECT_THROW(SparsityPattern({1, 17}, 16), InvalidPattern);
  EXPECT_THROW(SparsityPattern::contiguous(0, 5, 16), InvalidPattern);
  const SparsityPattern p({3, -2, 0}, 16);
  EXPECT_EQ(p.offsets(), (std::vector<int>{-2, 0, 3}));
  EXPECT_EQ(p.column_positions(), (std::vector<std::size_t>{2, 0, 13}));
}

TEST(Pattern, PureShiftColumnGivesSingleOffset) {
  for (std::size_t j : {1u, 3u, 5u}) {
    std::vector<double> col(32, 0.0);
    col[j] = 1.0;
    const std::vector<int> expected{-static_cast<int>(j)};
    EXPECT_EQ(select_pattern(col, IdealWindow{0}, 1).offsets(), expected);
    EXPECT_EQ(select_pattern(col, Threshold{0.5}, 1).offsets(), expected);
    EXPECT_EQ(select_pattern(col, PhiPattern{expected}, 1).offsets(), expected);
  }
}

TEST(Pattern, Erk1WindowFollowsCharacteristic) {
  const auto spec = SchemeSpec::with_cfl(erk(1), 256, 1024, 0.85);
  const auto phi = build_phi(spec);
  const auto pattern = select_pattern(ideal_column(phi, 16).values, IdealWindow{0}, phi.nnz());
  double centre = 0.0;
  for (int o : pattern.offsets()) centre += o;
  centre /= static_cast<double>(pattern.size());
  EXPECT_NEAR(centre, -std::ceil(16 * 0.85), 1.0);
}

TEST(Pattern, Sdirk1ThresholdCountsEntriesAboveHalfPeak) {
  const auto spec = SchemeSpec::sdirk_preset(1, 256);
  const auto phi = build_phi(spec);
  const auto column = ideal_column(phi, 16).values;
  const double peak = oracle::max_abs(column);
  std::size_t count = 0;
  for (double v : column) count += std::abs(v) >= 0.5 * peak ? 1 : 0;
  const auto pattern = select_pattern(column, Threshold{0.5}, phi.nnz());
  EXPECT_EQ(pattern.size(), count);
  for (int o : pattern.offsets()) EXPECT_GE(std::abs(column[column_position(o, 256)]), 0.5 * peak);
}

TEST(Pattern, ThresholdPresetsMatchListing) {
  const double eta[] = {0.1, 0.125, 0.25, 0.5, 0.5, 0.6};
  std::size_t m = 2;
  for (double e : eta) {
    EXPECT_DOUBLE_EQ(sdirk_threshold(1, m), e);
    m *= 2;
  }
}

TEST(LinearLsq, IdentityWeightsTruncateIdealColumn) {
  const auto phi = build_phi(SchemeSpec::preset(erk(3), 64));
  const auto column = ideal_column(phi, 4).values;
  const std::vector<double> ones(64, 1.0);
  const auto pattern = SparsityPattern::contiguous(-9, 7, 64);
  const auto psi = linear_lsq_psi(column, pattern, ones);
  const auto positions = pattern.column_positions();
  for (std::size_t d = 0; d < 64; ++d) {
    const bool inside = std::find(positions.begin(), positions.end(), d) != positions.end();
    EXPECT_NEAR(psi.op.first_column()[d], inside ? column[d] : 0.0, 1e-12) << d;
  }
}

TEST(LinearLsq, SupportPatternIsExact) {
  // A pattern holding every nonzero of Phi^m reproduces it.
  const auto phi = build_phi(SchemeSpec::preset(erk(1), 64));
  const auto ideal = power(*phi.explicit_operator(), 4);
  const SparsityPattern pattern(ideal.diagonal_indices(), 64);
  const auto psi = weighted_fit(phi, 4, pattern);
  EXPECT_LT(oracle::max_abs_diff(psi.op.first_column(), ideal.first_column()), 1e-12);
  EXPECT_LT(psi.objective_value, 1e-16);
}

TEST(LinearLsq, EntriesOutsidePatternAreExactlyZero) {
  const auto phi = build_phi(SchemeSpec::preset(erk(2), 128));
  const auto pattern = SparsityPattern::contiguous(-6, 5, 128);
  const auto psi = weighted_fit(phi, 4, pattern);
  const auto positions = pattern.column_positions();
  for (std::size_t d = 0; d < 128; ++d) {
    if (std::find(positions.begin(), positions.end(), d) == positions.end()) {
      EXPECT_EQ(psi.op.first_column()[d], 0.0);
    }
  }
  EXPECT_EQ(psi.values().size(), 5u);
}

TEST(LinearLsq, NonPositiveWeightsRejected) {
  const std::vector<double> column(16, 0.0), weights(16, 0.0);
  EXPECT_THROW(linear_lsq_psi(column, SparsityPattern({0}, 16), weights), InvalidArgument);
}

TEST(LinearLsqProperty, RealnessForIdealWindowPatterns) {
  for (int p = 1; p <= 5; ++p) {
    const auto spec = SchemeSpec::preset(erk(p), 256);
    const auto phi = build_phi(spec);
    for (std::size_t m : {2u, 4u, 8u, 16u}) {
      try {
        const auto psi = weighted_fit(phi, m, erk_pattern(spec, phi, m));
        EXPECT_LT(psi.imag_residue, 1e-8) << p << " m=" << m;
      } catch (const ImaginaryResidue& e) {
        ADD_FAILURE() << "erk" << p << " m=" << m << " residue " << e.residue();
      }
    }
  }
}

TEST(LinearLsq, Erk3EightFoldCoarseningConverges) {
  const auto spec = SchemeSpec::preset(erk(3), 256);
  ASSERT_EQ(spec.nt, 512u);
  const auto phi = build_phi(spec);
  const auto psi = weighted_fit(phi, 8, erk_pattern(spec, phi, 8));
  require_stable(psi);
  SolveOptions o;
  o.dt = spec.dt();
  o.max_iters = 40;
  const auto report = solve(Hierarchy::two_level(phi, psi.op, spec.nt, 8), sample(default_profile, 256), o);
  EXPECT_TRUE(report.converged);
  EXPECT_LE(report.iterations, 6u);
}

TEST(Stability, RequireStableRejectsGrowth) {
  const SparsityPattern pattern({0}, 16);
  OptimizedPsi psi{CirculantOperator::identity(16).scaled(1.01), pattern};
  EXPECT_THROW(require_stable(psi), UnstableScheme);
  psi.op = CirculantOperator::identity(16);
  EXPECT_NO_THROW(require_stable(psi));
}

TEST(Nonlinear, OptimalInitIsReturned) {
  const auto phi = build_phi(SchemeSpec::preset(erk(1), 64));
  const auto ideal = power(*phi.explicit_operator(), 2);
  const SparsityPattern pattern(ideal.diagonal_indices(), 64);
  const auto init = weighted_fit(phi, 2, pattern);
  const auto out = nonlinear_lsq_psi(phi.eigenvalues().values, pattern, 2, 64, init);
  EXPECT_LT(out.objective_value, 1e-20);
  EXPECT_LT(oracle::max_abs_diff(out.op.first_column(), ideal.first_column()), 1e-12);
}

TEST(NonlinearProperty, ObjectiveNeverIncreases) {
  for (int p : {1, 3, 5}) {
    const auto spec = SchemeSpec::preset(erk(p), 128);
    const auto phi = build_phi(spec);
    const auto lambda = phi.eigenvalues().values;
    for (std::size_t m : {2u, 4u, 8u}) {
      const auto pattern = erk_pattern(spec, phi, m);
      const auto init = weighted_fit(phi, m, pattern);
      if (init.spectral_radius() >= 1.0) continue;
      NonlinearOptions options;
      options.max_iters = 8;
      const auto out = nonlinear_lsq_psi(lambda, pattern, m, spec.nt, init, options);
      const double before = bound_objective(lambda, init.op, m, spec.nt);
      EXPECT_LE(out.objective_value, before * (1.0 + 1e-12)) << p << " m=" << m;
      EXPECT_NEAR(out.objective_value, bound_objective(lambda, out.op, m, spec.nt), 1e-9 * before);
      EXPECT_EQ(out.pattern, pattern);
      EXPECT_EQ(out.method, Method::Nonlinear);
    }
  }
}

TEST(Nonlinear, SmoothBoundAgreesInsideUnitDisk) {
  EXPECT_NEAR(smooth_mode_bound(0.5, 0.3, 2, 8), mode_bound(0.5, 0.3, 2, 8), 1e-15);
  EXPECT_TRUE(std::isfinite(smooth_mode_bound(0.9, 1.0, 2, 8)));
}

TEST(Rediscretization, UnitFactorReproducesPhi) {
  const auto spec = SchemeSpec::preset({Family::SDIRK, 2}, 64);
  const auto a = build_phi(spec).eigenvalues().values;
  const auto b = psi_from_rediscretization(spec, 1).eigenvalues().values;
  for (std::size_t k = 0; k < 64; ++k) EXPECT_LT(std::abs(a[k] - b[k]), 1e-14);
}

TEST(Rediscretization, SdirkCoarseCflDoubles) {
  const auto spec = SchemeSpec::preset({Family::SDIRK, 2}, 64);
  const auto psi = psi_from_rediscretization(spec, 2);
  const auto direct = build_phi({Family::SDIRK, 2}, 64, 2.0 * spec.dt(), 1.0);
  const auto a = psi.eigenvalues().values;
  const auto b = direct.eigenvalues().values;
  for (std::size_t k = 0; k < 64; ++k) EXPECT_LT(std::abs(a[k] - b[k]), 1e-14);
}

TEST(Rediscretization, Erk1CoarseStepIsUnstable) {
  const auto spec = SchemeSpec::preset(erk(1), 64);
  EXPECT_THROW(psi_from_rediscretization(spec, 2), UnstableScheme);
  const auto psi = psi_from_rediscretization(spec, 2, {.allow_unstable = true});
  double r = 0.0;
  for (const auto& v : psi.eigenvalues().values) r = std::max(r, std::abs(v));
  EXPECT_GT(r, 1.0);
}

TEST(Multilevel, TwoLevelsMatchSingleFit) {
  const auto spec = SchemeSpec::preset(erk(3), 64);
  const auto h = build_multilevel_psis(spec, 4, 2);
  ASSERT_EQ(h.num_levels(), 2u);
  const auto phi = build_phi(spec);
  const auto* coarse = h.level(1).stepper.explicit_operator();
  ASSERT_NE(coarse, nullptr);
  const SparsityPattern pattern(coarse->diagonal_indices(), 64);
  const auto single = weighted_fit(phi, 4, pattern);
  EXPECT_LT(oracle::max_abs_diff(coarse->first_column(), single.op.first_column()), 1e-13);
}

TEST(Multilevel, CoarsestGridRespectsMinimum) {
  const auto spec = SchemeSpec::preset(erk(3), 64);
  ASSERT_EQ(spec.nt, 128u);
  EXPECT_THROW(build_multilevel_psis(spec, 4, 4), GridTooSmall);
  EXPECT_NO_THROW(build_multilevel_psis(spec, 4, 3));
}

TEST(OptimizedPsiCsv, HeaderThenRows) {
  const auto phi = build_phi(SchemeSpec::preset(erk(1), 32));
  const auto psi = weighted_fit(phi, 2, SparsityPattern::contiguous(-2, 2, 32));
  std::ostringstream out;
  psi.write_csv(out);
  const auto text = out.str();
  EXPECT_EQ(text.front(), '#');
  EXPECT_NE(text.find("offset,value\n"), std::string::npos);
  EXPECT_NE(text.find("\n-2,"), std::string::npos);
  EXPECT_NE(text.find("\n-1,"), std::string::npos);
}
