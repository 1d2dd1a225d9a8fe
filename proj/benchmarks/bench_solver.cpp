#include "bsdelab/brownian.hpp"
#include "bsdelab/generators.hpp"
#include "bsdelab/solver.hpp"

#include <benchmark/benchmark.h>

using namespace bsde;

static void BM_SolveAffine(benchmark::State& state) {
    const auto ens = simulate_ensemble(make_uniform_grid(1.0, static_cast<std::size_t>(state.range(0))), 1,
                                       static_cast<std::size_t>(state.range(1)), 1);
    const auto g = make_affine(1, 1, {-1.0}, {0.5}, {0.2});
    const auto xi = make_brownian_terminal(1);
    SchemeSpec scheme;
    scheme.stepping = state.range(2) ? Stepping::implicit_y : Stepping::explicit_euler;
    for (auto _ : state) benchmark::DoNotOptimize(solve_backward(g, xi, ens, scheme));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_SolveAffine)
    ->Args({32, 10000, 0})
    ->Args({32, 10000, 1})
    ->Args({64, 50000, 1})
    ->Unit(benchmark::kMillisecond);

/// Nonlinear drift with a singular forcing term.
static void BM_SolveExample1(benchmark::State& state) {
    const auto ens = simulate_ensemble(make_uniform_grid(1.0, 32), 1, static_cast<std::size_t>(state.range(0)), 1);
    HFunctionParams h;
    h.pbar = 2.0;
    const auto g = make_example1(h);
    const auto xi = make_sine_terminal(1);
    for (auto _ : state) benchmark::DoNotOptimize(solve_backward(g, xi, ens, SchemeSpec{}));
}
BENCHMARK(BM_SolveExample1)->Arg(10000)->Unit(benchmark::kMillisecond);
