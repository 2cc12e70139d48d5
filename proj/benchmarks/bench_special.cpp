#include <benchmark/benchmark.h>

#include "serw/special.hpp"
#include "serw/tails.hpp"

namespace {

void BM_UpperGammaNegativeOrder(benchmark::State& state) {
  double delta = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(serw::upper_incomplete_gamma(-2 * delta, 2 * delta));
    delta = delta > 1e-6 ? delta * 0.9 : 0.1;
  }
}
BENCHMARK(BM_UpperGammaNegativeOrder);

void BM_RateIntegral(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  double k = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(serw::rate_integral(k, d));
    k = k > 1e-8 ? k * 0.5 : 1.0;
  }
}
BENCHMARK(BM_RateIntegral)->DenseRange(1, 3);

void BM_LogIntegral(benchmark::State& state) {
  double x = 3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(serw::log_integral(x));
    x = x < 1e12 ? x * 1.7 : 3.0;
  }
}
BENCHMARK(BM_LogIntegral);

}  // namespace
