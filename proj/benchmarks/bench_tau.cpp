#include <benchmark/benchmark.h>

#include "serw/tau.hpp"

namespace {

void BM_NuDeterministic(benchmark::State& state) {
  const double delta = 1.0 / static_cast<double>(state.range(0));
  const serw::TauLaw law(serw::ModelSpec::deterministic(1, delta));
  for (auto _ : state) benchmark::DoNotOptimize(serw::diffusion_constant(law));
}
BENCHMARK(BM_NuDeterministic)->RangeMultiplier(100)->Range(10, 100000)->Unit(benchmark::kMicrosecond);

void BM_NuHeavyTail(benchmark::State& state) {
  const double delta = 1.0 / static_cast<double>(state.range(0));
  const serw::TauLaw law(serw::ModelSpec::iid(1, delta, serw::TailSpec::pareto(0.5)));
  for (auto _ : state) benchmark::DoNotOptimize(serw::diffusion_constant(law));
}
BENCHMARK(BM_NuHeavyTail)->RangeMultiplier(100)->Range(10, 100000)->Unit(benchmark::kMicrosecond);

void BM_UnperturbedNu(benchmark::State& state) {
  const serw::TauLaw law(serw::ModelSpec::unperturbed(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(serw::diffusion_constant(law));
}
BENCHMARK(BM_UnperturbedNu)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);

}  // namespace
