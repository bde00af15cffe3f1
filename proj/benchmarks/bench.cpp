#include <benchmark/benchmark.h>

#include "stochmather/cell_solver.hpp"
#include "stochmather/diffusion_sim.hpp"
#include "stochmather/model_spec.hpp"
#include "stochmather/occupation_lp.hpp"
#include "stochmather/spectral.hpp"
#include "stochmather/stationary_measure.hpp"

using namespace stochmather;

namespace {

HamiltonianModel cosine(int n) { return ModelSpec::cosine_potential().instantiate(TorusGrid(1, n)); }

void BM_CellSolve(benchmark::State& state) {
  const HamiltonianModel m = cosine(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_cell(m, Momentum{0.5}, 1.0).Hbar);
}
BENCHMARK(BM_CellSolve)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_CellSolve2D(benchmark::State& state) {
  ModelSpec spec = ModelSpec::free_particle(2);
  spec.potential.modes.push_back({{1, 1}, 1.0, 0.0});
  const HamiltonianModel m2 = spec.instantiate(TorusGrid(2, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(solve_cell(m2, Momentum{0.5, 0.0}, 1.0).Hbar);
}
BENCHMARK(BM_CellSolve2D)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PrincipalEigenvalue(benchmark::State& state) {
  const HamiltonianModel m = cosine(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(principal_eigenvalue(m.potential(), Momentum{0.5}, 1.0).eigenvalue);
}
BENCHMARK(BM_PrincipalEigenvalue)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_InvariantDensity(benchmark::State& state) {
  const HamiltonianModel m = cosine(static_cast<int>(state.range(0)));
  const CellSolution s = solve_cell(m, Momentum{0.5}, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(invariant_density(s.drift, 1.0).residual);
}
BENCHMARK(BM_InvariantDensity)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_OccupationLp(benchmark::State& state) {
  const HamiltonianModel m = cosine(static_cast<int>(state.range(0)));
  const LpInstance inst = build_lp(m, VelocityGrid{1, 4.0, 41}, 1.0, Momentum{0.0});
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(inst).value);
}
BENCHMARK(BM_OccupationLp)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const CellSolution s = solve_cell(cosine(256), Momentum{1.0}, 0.8);
  SimulationConfig cfg;
  cfg.horizon = 10.0;
  cfg.paths = static_cast<int>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(s, cfg).steps);
  state.SetItemsProcessed(state.iterations() * cfg.paths * 10'000);
}
BENCHMARK(BM_Simulate)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
