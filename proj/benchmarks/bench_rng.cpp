#include <benchmark/benchmark.h>

#include <vector>

#include "serw/rng.hpp"

namespace {

void BM_PhiloxScalar(benchmark::State& state) {
  const serw::CounterRng rng(42);
  std::uint64_t counter = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rng.draw(7, counter++));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxScalar);

template <auto Fill>
void BM_PhiloxBatch(benchmark::State& state) {
  const serw::CounterRng rng(42);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> move(n), xi(n);
  std::uint64_t first = 0;
  for (auto _ : state) {
    Fill(rng, 7, first, n, move.data(), xi.data());
    first += n;
    benchmark::DoNotOptimize(move.data());
    benchmark::DoNotOptimize(xi.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PhiloxBatch<serw::fill_uniforms_portable>)->Name("BM_PhiloxBatchPortable")->Arg(256);
BENCHMARK(BM_PhiloxBatch<serw::fill_uniforms>)->Name("BM_PhiloxBatchSimd")->Arg(256);

void BM_BufferedStream(benchmark::State& state) {
  serw::BufferedWalkerStream s(42, 7);
  for (auto _ : state) benchmark::DoNotOptimize(s.next_draw());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BufferedStream);

}  // namespace
