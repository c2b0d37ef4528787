#include <benchmark/benchmark.h>

#include "phi4/cauchy.hpp"
#include "phi4/stochastic.hpp"

using namespace phi4;

namespace {

const MeasurementSetup& scenario() {
    static const MeasurementSetup s = standard_scenario();
    return s;
}

Exec mode(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_causal_green(benchmark::State& st) {
    const auto& s = scenario();
    for (auto _ : st) benchmark::DoNotOptimize(apply_green(s.lat, PropagatorKind::Causal, s.rho_in.values, mode(st)));
}

void BM_free_fields(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(phi0_from_sources(scenario(), mode(st)));
}

void BM_global_expand(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(global_expand(scenario(), 1.0, mode(st)));
}

void BM_sample_ensemble(benchmark::State& st) {
    StochasticConfig cfg;
    cfg.samples = 1024;
    for (auto _ : st) benchmark::DoNotOptimize(sample_ensemble(cfg, scenario().lat, mode(st)));
}

void BM_delta_E_mc(benchmark::State& st) {
    StochasticConfig cfg;
    cfg.samples = 64;
    for (auto _ : st) benchmark::DoNotOptimize(delta_E_mc(scenario(), cfg, 1.0, mode(st)));
}

}  // namespace

// arg 0: serial reference, arg 1: OpenMP
BENCHMARK(BM_causal_green)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_free_fields)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_global_expand)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sample_ensemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_delta_E_mc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
