#include "macromc/channel.hpp"
#include "macromc/fitting.hpp"
#include "macromc/kinetics.hpp"
#include "macromc/trace.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace macromc;

namespace {

Trace reference_trace()
{
    TransmitterSpec tx;
    tx.gamma = 3.0;
    return channel::sample_response(tx, {2.0, 0.5}, SensorSpec{}, 1.0, channel::uniform_grid(10.0, 0.01));
}

void BM_BoundConcentration(benchmark::State& state)
{
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kinetics::bound_concentration_unchecked(1e-3, 2.0, 0.5, t));
        t = t < 10.0 ? t + 1e-3 : 0.0;
    }
}
BENCHMARK(BM_BoundConcentration);

void BM_ImpulseResponse(benchmark::State& state)
{
    TransmitterSpec tx;
    tx.gamma = 3.0;
    const SensorSpec sensor;
    double t = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(channel::impulse_response(tx, {2.0, 0.5}, sensor, 1.0, t));
        t = t < 10.0 ? t + 1e-3 : 0.01;
    }
}
BENCHMARK(BM_ImpulseResponse);

void BM_SampleResponse(benchmark::State& state)
{
    TransmitterSpec tx;
    tx.gamma = 3.0;
    const auto grid = channel::uniform_grid(10.0, 10.0 / static_cast<double>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(channel::sample_response(tx, {2.0, 0.5}, SensorSpec{}, 1.0, grid));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_SampleResponse)->Arg(1000)->Arg(10000);

void BM_FitSensitivity(benchmark::State& state)
{
    const SensitivityCoeffs c;
    SensitivityTable table;
    for (int i = 0; i < 50; ++i) {
        const double x = 5e-5 * std::pow(200.0, i / 49.0);
        table.concentration.push_back(x);
        table.ratio.push_back(c.a * std::pow(x, c.b) + c.c);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fitting::fit_sensitivity(table));
    }
}
BENCHMARK(BM_FitSensitivity)->Unit(benchmark::kMicrosecond);

void BM_GridSearch(benchmark::State& state)
{
    const Trace measured = reference_trace();
    const fitting::SearchConfig search;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fitting::channel_grid_search(measured, TransmitterSpec{}, SensorSpec{}, 1.0, search));
    }
}
BENCHMARK(BM_GridSearch)->Unit(benchmark::kMillisecond);

void BM_EstimateChannel(benchmark::State& state)
{
    const Trace measured = traceio::add_gaussian_noise(reference_trace(), 0.01, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fitting::estimate_channel_params(measured, TransmitterSpec{}, SensorSpec{}, 1.0));
    }
}
BENCHMARK(BM_EstimateChannel)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
