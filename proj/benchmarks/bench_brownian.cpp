#include "bsdelab/brownian.hpp"

#include <benchmark/benchmark.h>

using namespace bsde;

static void BM_SimulateEnsemble(benchmark::State& state) {
    const auto grid = make_uniform_grid(1.0, static_cast<std::size_t>(state.range(0)));
    const auto paths = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble(grid, 1, paths, 7));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_SimulateEnsemble)->Args({32, 10000})->Args({64, 50000})->Unit(benchmark::kMillisecond);

static void BM_BootstrapMean(benchmark::State& state) {
    std::vector<double> v(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 97) / 97.0;
    for (auto _ : state) benchmark::DoNotOptimize(bootstrap_mean(v, 3));
}
BENCHMARK(BM_BootstrapMean)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
