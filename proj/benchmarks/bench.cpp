// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths: per-series estimation, the correction
// objective, skew-normal evaluation and interval construction.  Grid
// calibration cost is essentially (cells x m) times the estimator lines.

#include <benchmark/benchmark.h>

#include <vector>

#include "arbc/ar_model.hpp"
#include "arbc/calibration.hpp"
#include "arbc/estimators.hpp"
#include "arbc/hermite.hpp"
#include "arbc/inference.hpp"
#include "arbc/rng.hpp"
#include "arbc/skew_normal.hpp"
#include "arbc/table.hpp"

using namespace arbc;

namespace {

const TimeSeries& series_ar1_n30()
{
    static const TimeSeries s = simulate(make_ar1(0.6), 30, 42);
    return s;
}

const TimeSeries& series_ar2_n30()
{
    static const TimeSeries s = simulate(make_ar2(0.5, 0.2), 30, 43);
    return s;
}

const GridSample& small_sample()
{
    static const GridSample s = [] {
        CalibrationConfig cfg;
        cfg.order = 1;
        cfg.n = 15;
        cfg.m = 200;
        cfg.grid = GridSpec{-0.9, 0.3, 7};
        cfg.seed = 7;
        cfg.threads = 1;
        cfg.methods = {EstimationMethod::yule_walker};
        return run_grid_simulation(cfg);
    }();
    return s;
}

const CalibrationTable& small_table(int order)
{
    static const CalibrationTable t1 = [] {
        return build_table(small_sample(), EstimationMethod::yule_walker, 3);
    }();
    static const CalibrationTable t2 = [] {
        CalibrationConfig cfg;
        cfg.order = 2;
        cfg.n = 15;
        cfg.m = 150;
        cfg.grid = GridSpec{-0.8, 0.4, 5};
        cfg.seed = 8;
        cfg.threads = 1;
        cfg.methods = {EstimationMethod::yule_walker};
        return build_table(run_grid_simulation(cfg),
                           EstimationMethod::yule_walker, 3);
    }();
    return order == 1 ? t1 : t2;
}

void BM_SimulateAr1N30(benchmark::State& state)
{
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate(make_ar1(0.6), 30, seed++));
}
BENCHMARK(BM_SimulateAr1N30);

void BM_YuleWalkerN30(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(yule_walker(series_ar1_n30(), 1));
}
BENCHMARK(BM_YuleWalkerN30);

void BM_BurgN30(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(burg(series_ar1_n30(), 1));
}
BENCHMARK(BM_BurgN30);

void BM_ConditionalMleN30(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(conditional_mle(series_ar1_n30(), 1));
}
BENCHMARK(BM_ConditionalMleN30);

void BM_ExactMleAr1N30(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(exact_mle(series_ar1_n30(), 1));
}
BENCHMARK(BM_ExactMleAr1N30);

void BM_ExactMleAr2N30(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(exact_mle(series_ar2_n30(), 2));
}
BENCHMARK(BM_ExactMleAr2N30);

void BM_BasisRow2dK3(benchmark::State& state)
{
    double out[10];
    for (auto _ : state) {
        basis_row_2d(3, 0.37, -1.2, out);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_BasisRow2dK3);

void BM_SnQuantile(benchmark::State& state)
{
    const SkewNormalParams p{0.2, 0.9, 1.4};
    double u = 0.0;
    for (auto _ : state) {
        u = u + 0.001;
        if (u >= 1.0)
            u = 0.001;
        benchmark::DoNotOptimize(sn_quantile(p, u));
    }
}
BENCHMARK(BM_SnQuantile);

void BM_SnFitM2000(benchmark::State& state)
{
    NormalSampler sampler(5);
    const SkewNormalParams p{0.0, 1.0, 1.5};
    std::vector<double> draws(2000);
    for (auto& v : draws)
        v = sn_quantile(p, sampler.uniform());
    for (auto _ : state)
        benchmark::DoNotOptimize(sn_fit(draws));
}
BENCHMARK(BM_SnFitM2000);

void BM_ObjectiveGradient(benchmark::State& state)
{
    CorrectionObjective obj(small_sample(), EstimationMethod::yule_walker, 3);
    const std::vector<double> beta = obj.identity_start();
    std::vector<double> grad(beta.size());
    for (auto _ : state)
        benchmark::DoNotOptimize(obj.value_and_gradient(beta, grad));
}
BENCHMARK(BM_ObjectiveGradient);

void BM_CorrectPartial(benchmark::State& state)
{
    const CorrectionModel& model = small_table(1).correction;
    const PartialAutocorrelations at{1, {0.42, 0.0}};
    for (auto _ : state)
        benchmark::DoNotOptimize(correct_partial(model, at));
}
BENCHMARK(BM_CorrectPartial);

void BM_IntervalAr1Draws10000(benchmark::State& state)
{
    const CalibrationTable& t = small_table(1);
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            mc_interval_ar1(t, 0.4, 0.95, 10000, seed++));
}
BENCHMARK(BM_IntervalAr1Draws10000);

void BM_IntervalAr2Draws10000(benchmark::State& state)
{
    const CalibrationTable& t = small_table(2);
    const PartialAutocorrelations plug{2, {0.4, -0.2}};
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            mc_interval_ar2(t, plug, 0.95, 10000, seed++));
}
BENCHMARK(BM_IntervalAr2Draws10000);

} // namespace

BENCHMARK_MAIN();
