#include <benchmark/benchmark.h>

#include "demux/fitting.hpp"
#include "demux/histogram.hpp"
#include "demux/rng.hpp"
#include "demux/simulator.hpp"
#include "support/reference.hpp"
#include "support/saturation.hpp"

using namespace demux;

static void BM_Philox(benchmark::State& state) {
  const PulseRandom rng(42);
  std::uint64_t pulse = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform(pulse++, 0));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Philox);

static void BM_Simulate(benchmark::State& state) {
  const auto config = fixture::reference_sim(static_cast<std::uint64_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1 << 20)->Arg(1 << 24)->Unit(benchmark::kMillisecond);

static void BM_ShardedSimulate(benchmark::State& state) {
  const auto config = fixture::reference_sim(1 << 24, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(shard_and_merge(config, static_cast<std::size_t>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * (1 << 24));
}
BENCHMARK(BM_ShardedSimulate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_Histogram(benchmark::State& state) {
  const auto stream = simulate(fixture::reference_sim(1 << 26, 2));
  for (auto _ : state) benchmark::DoNotOptimize(histogram(stream, 1, 2, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.records.size()));
}
BENCHMARK(BM_Histogram)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_FitSaturation(benchmark::State& state) {
  const auto data = fixture::noisy_saturation(3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_saturation(data));
}
BENCHMARK(BM_FitSaturation);
BENCHMARK_MAIN();
