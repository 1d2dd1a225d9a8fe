#include "bsdelab/modulus.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace bsde;

namespace {

void star_table(std::size_t n, std::vector<double>& x, std::vector<double>& f) {
    x = log_grid(1e-12, 10.0, n);
    f.resize(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::sqrt(x[i]) * (1.0 + 0.1 * static_cast<double>(i % 3 == 0));
    for (std::size_t i = 1; i < n; ++i) f[i] = std::max(f[i], f[i - 1]);
}

}  // namespace

static void BM_UpperHull(benchmark::State& state) {
    std::vector<double> x, f;
    star_table(static_cast<std::size_t>(state.range(0)), x, f);
    for (auto _ : state) benchmark::DoNotOptimize(upper_hull_values(x, f));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_UpperHull)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

static void BM_LiftOrder(benchmark::State& state) {
    const auto rho = ModulusFn::log_osgood(1.0, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(lift_order(rho, 2.0, 3.0));
}
BENCHMARK(BM_LiftOrder);

static void BM_Classify(benchmark::State& state) {
    const auto rho = ModulusFn::log_osgood(1.0, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(osgood_classifier(rho, 1.0, OsgoodVariant::osgood));
}
BENCHMARK(BM_Classify)->Unit(benchmark::kMicrosecond);

static void BM_Bihari(benchmark::State& state) {
    const auto rho = ModulusFn::log_osgood(1.0, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(bihari_bound(0.01, rho, 1.0, 1.0));
}
BENCHMARK(BM_Bihari)->Unit(benchmark::kMicrosecond);
