#include <benchmark/benchmark.h>

#include "soligas/effective.hpp"
#include "soligas/gas.hpp"
#include "soligas/positions.hpp"

namespace {

using namespace soligas;

SolitonConfig gas(std::size_t n) { return generate_uniform(n, 2.0 * static_cast<double>(n), {1.0, 2.0}, 11); }

void BM_Expand(benchmark::State& state) {
  const auto c = gas(static_cast<std::size_t>(state.range(0)));
  const auto core = extremal_and_core(c);
  const double mid = 0.5 * (core.x_minus + core.x_plus);
  for (auto _ : state) benchmark::DoNotOptimize(expand(c, mid));
}

void BM_ScanEffective(benchmark::State& state) {
  const auto c = gas(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(scan_effective(c, 1.5));
}

void BM_UltraDiluteOracle(benchmark::State& state) {
  const UltraDiluteGas g(static_cast<std::size_t>(state.range(0)), {});
  const auto b = g.breakpoints();
  for (auto _ : state) benchmark::DoNotOptimize(g.positions(0.5 * (b.front() + b.back())));
}

}  // namespace

BENCHMARK(BM_Expand)->RangeMultiplier(2)->Range(4, 64);
BENCHMARK(BM_ScanEffective)->RangeMultiplier(2)->Range(4, 32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UltraDiluteOracle)->RangeMultiplier(4)->Range(4, 256);
