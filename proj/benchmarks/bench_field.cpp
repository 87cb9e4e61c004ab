#include <benchmark/benchmark.h>

#include "soligas/gas.hpp"
#include "soligas/observables.hpp"
#include "soligas/tau.hpp"

namespace {

using namespace soligas;

SolitonConfig gas(std::size_t n) { return generate_uniform(n, 2.0 * static_cast<double>(n), {1.0, 2.0}, 11); }

void field_with(benchmark::State& state, FieldMethod method) {
  const auto c = gas(static_cast<std::size_t>(state.range(0)));
  FieldOptions o;
  o.method = method;
  const FieldEvaluator ev(c, o);
  double x = -0.5 * static_cast<double>(c.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ev(x, 2));
    x += 0.01;
    if (x > 0.5 * static_cast<double>(c.size())) x = -0.5 * static_cast<double>(c.size());
  }
}

void BM_FieldExpansion(benchmark::State& state) { field_with(state, FieldMethod::Expansion); }
void BM_FieldDeterminant(benchmark::State& state) { field_with(state, FieldMethod::Determinant); }
// above the expansion cap: determinant with the centred fallback
void BM_FieldAuto(benchmark::State& state) { field_with(state, FieldMethod::Auto); }

void BM_FieldCentredPileUp(benchmark::State& state) {
  std::vector<double> chi, y(20, 0.0);
  for (int i = 0; i < 20; ++i) chi.push_back(1.0 + 0.1 * i);
  const FieldEvaluator ev(SolitonConfig(chi, y), {});
  for (auto _ : state) benchmark::DoNotOptimize(ev(-6.0, 0));
}

void BM_ChargeIntegral(benchmark::State& state) {
  const auto c = gas(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_density(c, 1));
}

}  // namespace

BENCHMARK(BM_FieldExpansion)->RangeMultiplier(2)->Range(2, 8)->Arg(12);
BENCHMARK(BM_FieldDeterminant)->RangeMultiplier(2)->Range(2, 16);
BENCHMARK(BM_FieldAuto)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FieldCentredPileUp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChargeIntegral)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
