#include "drsim/engine.hpp"
#include "drsim/power_model.hpp"
#include "drsim/sensing.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace drsim;

static void BM_SamplePower(benchmark::State& state) {
    const auto p = default_params(InterfaceKind::XenSchedCredit, *calibration_preset("r320-cluster"));
    Rng rng(1);
    double tau = 0.0;
    for (auto _ : state) {
        tau = tau >= 1.0 ? 0.0 : tau + 0.001;
        benchmark::DoNotOptimize(sample_power(p, DutyCycle::clamped(tau), 0.1, rng));
    }
}
BENCHMARK(BM_SamplePower);

static void BM_BlockAverage(benchmark::State& state) {
    std::vector<RawSample> raw;
    for (int i = 0; i < state.range(0); ++i) raw.push_back({i / 1000.0, 36.25 + (i % 7)});
    for (auto _ : state) {
        benchmark::DoNotOptimize(block_average(raw, 0.1, 0.001));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BlockAverage)->Arg(1000)->Arg(100000);

static void BM_Tracking(benchmark::State& state) {
    ExperimentConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_tracking(cfg));
    }
}
BENCHMARK(BM_Tracking)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
