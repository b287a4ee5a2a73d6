#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "advmg/circulant.hpp"
#include "advmg/dft.hpp"
#include "advmg/discretization.hpp"
#include "advmg/experiments.hpp"
#include "advmg/mgrit.hpp"
#include "advmg/optimizer.hpp"
#include "advmg/theory.hpp"

namespace {

using namespace advmg;

std::vector<double> random_vector(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_CirculantApplySparse(benchmark::State& state) {
  const auto nx = static_cast<std::size_t>(state.range(0));
  const auto phi = build_phi(SchemeSpec::erk_preset(3, nx));
  const auto u = random_vector(nx);
  std::vector<double> out(nx);
  for (auto _ : state) {
    phi.apply_into(u, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_CirculantApplySparse)->RangeMultiplier(4)->Range(256, 4096);

void BM_RationalApply(benchmark::State& state) {
  const auto nx = static_cast<std::size_t>(state.range(0));
  const auto phi = build_phi(SchemeSpec::sdirk_preset(3, nx));
  const auto u = random_vector(nx);
  std::vector<double> out(nx);
  for (auto _ : state) {
    phi.apply_into(u, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_RationalApply)->RangeMultiplier(4)->Range(256, 4096);

void BM_ForwardDft(benchmark::State& state) {
  const auto x = random_vector(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dft::forward(x));
}
BENCHMARK(BM_ForwardDft)->RangeMultiplier(4)->Range(256, 4096);

void BM_CirculantPower(benchmark::State& state) {
  const auto phi = build_phi(SchemeSpec::erk_preset(5, 1024));
  const auto m = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(power(*phi.explicit_operator(), m));
}
BENCHMARK(BM_CirculantPower)->RangeMultiplier(4)->Range(2, 64);

void BM_FcfRelax(benchmark::State& state) {
  const auto spec = SchemeSpec::erk_preset(3, 256);
  const auto phi = build_phi(spec);
  auto s = SpaceTimeState::random_initial(sample(default_profile, spec.nx), spec.nt, 3);
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) fcf_relax(s, phi, 4, threads);
}
BENCHMARK(BM_FcfRelax)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

void BM_LinearLsq(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto spec = SchemeSpec::erk_preset(3, 1024);
  const auto phi = build_phi(spec);
  const auto column = ideal_column(phi, static_cast<unsigned>(m));
  const auto weights = weight_vector(phi.eigenvalues().values);
  const auto pattern = erk_pattern(spec, phi, m);
  for (auto _ : state) benchmark::DoNotOptimize(linear_lsq_psi(column.values, pattern, weights));
}
BENCHMARK(BM_LinearLsq)->RangeMultiplier(4)->Range(2, 32);

void BM_TwoLevelSolve(benchmark::State& state) {
  const auto spec = SchemeSpec::erk_preset(5, 256);
  const auto phi = build_phi(spec);
  const auto coarse = make_coarse_operator(spec, phi, 4, PsiMethod::Lsq);
  const auto h = Hierarchy::two_level(phi, *coarse.psi, spec.nt, 4);
  SolveOptions o;
  o.dt = spec.dt();
  const auto u0 = sample(default_profile, spec.nx);
  for (auto _ : state) benchmark::DoNotOptimize(solve(h, u0, o));
}
BENCHMARK(BM_TwoLevelSolve)->Unit(benchmark::kMillisecond);

void BM_ScalarOracle(benchmark::State& state) {
  const auto nt = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scalar_mode_oracle({0.9, 0.1}, {0.7, -0.2}, 2, nt));
}
BENCHMARK(BM_ScalarOracle)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
