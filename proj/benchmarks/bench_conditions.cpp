#include "bsdelab/conditions.hpp"
#include "bsdelab/generators.hpp"

#include <benchmark/benchmark.h>

using namespace bsde;

static void BM_CheckClaimsExample1(benchmark::State& state) {
    HFunctionParams h;
    h.pbar = 2.0;
    const auto g = make_example1(h);
    SamplerSpec s;
    s.count = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(check_claims(g, s));
}
BENCHMARK(BM_CheckClaimsExample1)->Arg(10000)->Unit(benchmark::kMillisecond);
