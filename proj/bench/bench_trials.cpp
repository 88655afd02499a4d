// Serial reference vs OpenMP trial loops on the library's Monte Carlo kernels.

#include <benchmark/benchmark.h>

#include "chameleon/analysis.hpp"
#include "chameleon/lowerbound.hpp"
#include "chameleon/parallel.hpp"
#include "chameleon/processes.hpp"

using namespace chameleon;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::openmp; }

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp x" + std::to_string(thread_count()));
}

void BM_Absorption(benchmark::State& state) {
  const Graph g = make_cycle(8);
  const ChameleonState st0 = initial_chameleon(g, 0);
  const std::size_t trials = 20000;
  for (auto _ : state) {
    const auto r = map_trials<int>(trials, exec_of(state), [&](std::size_t i) {
      Rng rng(RngSeed{1}, i);
      return run_to_absorption(g, st0, rng).absorption_index;
    });
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trials));
  label(state);
}

void BM_ConditionalMean(benchmark::State& state) {
  const Graph g = make_torus(4, 2);
  const auto h = [](const ChameleonState& st) { return st.counts().w + 0.5 * st.counts().p; };
  const std::size_t trials = 5000;
  for (auto _ : state) {
    auto e = conditional_mean_given_A(g, 1, 2.0, h, trials, RngSeed{2}, {}, exec_of(state));
    benchmark::DoNotOptimize(e);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trials));
  label(state);
}

void BM_LowerBound(benchmark::State& state) {
  const std::size_t trials = 2000;
  for (auto _ : state) {
    auto r = run_lowerbound(16, 1, 8, 7.68, trials, RngSeed{3}, exec_of(state));
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trials));
  label(state);
}

}  // namespace

BENCHMARK(BM_Absorption)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConditionalMean)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LowerBound)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
