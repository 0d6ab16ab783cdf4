// Serial reference vs OpenMP kernel; thread count from POLLING_THREADS or the OpenMP default.
#include <benchmark/benchmark.h>

#include <vector>

#include "polling/approximator.hpp"
#include "polling/experiments.hpp"
#include "polling/simulator.hpp"

using namespace polling;

namespace {

SimConfig bench_sim() {
    SimConfig c;
    c.warmup_cycles = 1000;
    c.measured_cycles = 20000;
    c.replications = 8;
    return c;
}

std::vector<double> dense_rhos() {
    std::vector<double> r;
    for (int k = 0; k < 990; ++k) r.push_back(0.001 * k);
    return r;
}

const std::vector<Method> kMethods(std::begin(kAllMethods), std::end(kAllMethods));

void BM_EvaluateGridSerial(benchmark::State& state) {
    const auto spec = showcase_system(0.5);
    const auto rhos = dense_rhos();
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_grid_serial(spec, rhos, kMethods));
}

void BM_EvaluateGridParallel(benchmark::State& state) {
    const auto spec = showcase_system(0.5);
    const auto rhos = dense_rhos();
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_grid(spec, rhos, kMethods));
}

void BM_SimulateSerial(benchmark::State& state) {
    const auto spec = showcase_system(0.7);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_serial(spec, bench_sim()));
}

void BM_SimulateParallel(benchmark::State& state) {
    const auto spec = showcase_system(0.7);
    for (auto _ : state) benchmark::DoNotOptimize(simulate(spec, bench_sim()));
}

std::vector<TestBedCase> bench_cases() {
    auto cases = select_subset(enumerate_testbed(), Subset::Sampled);
    cases.resize(16);
    return cases;
}

ComparisonOptions bench_options() {
    ComparisonOptions o;
    o.sim.warmup_cycles = 500;
    o.sim.measured_cycles = 5000;
    o.sim.replications = 2;
    return o;
}

void BM_RunComparisonSerial(benchmark::State& state) {
    const auto cases = bench_cases();
    for (auto _ : state) benchmark::DoNotOptimize(run_comparison_serial(cases, {Method::Interpolation}, bench_options()));
}

void BM_RunComparisonParallel(benchmark::State& state) {
    const auto cases = bench_cases();
    for (auto _ : state) benchmark::DoNotOptimize(run_comparison(cases, {Method::Interpolation}, bench_options()));
}

}  // namespace

BENCHMARK(BM_EvaluateGridSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EvaluateGridParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SimulateSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SimulateParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RunComparisonSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RunComparisonParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
