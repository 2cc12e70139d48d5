#include <benchmark/benchmark.h>

#include "serw/montecarlo.hpp"
#include "serw/walk.hpp"

namespace {

serw::ModelSpec model_for(int which) {
  switch (which) {
    case 0: return serw::ModelSpec::deterministic(1, 0.1);
    case 1: return serw::ModelSpec::deterministic(3, 0.1);
    default: return serw::ModelSpec::iid(2, 0.05, serw::TailSpec::half_cauchy(1.0));
  }
}

void BM_Step(benchmark::State& state) {
  const auto model = model_for(static_cast<int>(state.range(0)));
  serw::BufferedWalkerStream stream(1, 0);
  auto s = serw::WalkState::origin(model.dimension);
  for (auto _ : state) {
    s = serw::step(s, model, stream.next_draw());
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(model.describe());
}
BENCHMARK(BM_Step)->DenseRange(0, 2);

void BM_Ensemble(benchmark::State& state) {
  serw::EnsembleConfig cfg;
  cfg.model = model_for(static_cast<int>(state.range(0)));
  cfg.n_steps = 10000;
  cfg.n_walkers = 200;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(serw::run_ensemble(cfg));
  state.SetItemsProcessed(state.iterations() * cfg.n_steps * cfg.n_walkers);
  state.SetLabel(cfg.model.describe());
}
BENCHMARK(BM_Ensemble)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
