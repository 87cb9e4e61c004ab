#include <benchmark/benchmark.h>

#include <cmath>

#include "soligas/hydro.hpp"

namespace {

using namespace soligas;

DensityField bump(int nodes, int cells) {
  DensityField f;
  for (int a = 0; a < nodes; ++a) f.chi_grid.push_back(1.0 + a / (nodes - 1.0));
  for (int c = 0; c < cells; ++c) f.x_grid.push_back(-10.0 + 20.0 * (c + 0.5) / cells);
  f.rho.resize(nodes, cells);
  for (int a = 0; a < nodes; ++a)
    for (int c = 0; c < cells; ++c) f.rho(a, c) = 0.05 * std::exp(-f.x_grid[static_cast<std::size_t>(c)] * f.x_grid[static_cast<std::size_t>(c)]);
  return f;
}

void BM_EffectiveVelocity(benchmark::State& state) {
  const auto f = bump(static_cast<int>(state.range(0)), 200);
  for (auto _ : state) benchmark::DoNotOptimize(effective_velocity(f));
}

void BM_GhdStep(benchmark::State& state) {
  const auto f = bump(static_cast<int>(state.range(0)), 200);
  const double dt = max_stable_dt(f);
  for (auto _ : state) benchmark::DoNotOptimize(ghd_step(f, dt));
}

}  // namespace

BENCHMARK(BM_EffectiveVelocity)->RangeMultiplier(2)->Range(4, 32);
BENCHMARK(BM_GhdStep)->RangeMultiplier(2)->Range(4, 32);
