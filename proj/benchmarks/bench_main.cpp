#include "cmdp/certificates.hpp"
#include "cmdp/dual_descent.hpp"
#include "cmdp/gridworld.hpp"
#include "cmdp/occupancy_lp.hpp"
#include "cmdp/policy_eval.hpp"
#include "cmdp/primal.hpp"

#include <benchmark/benchmark.h>

using namespace cmdp;

namespace {

void BM_PolicyEvaluation(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Cmdp c = random_cmdp(0, n, 4, 2);
    const Policy pi = random_policy(1, n, 4);
    for (auto _ : state) benchmark::DoNotOptimize(policy_values(c, pi));
}
BENCHMARK(BM_PolicyEvaluation)->Arg(5)->Arg(20)->Arg(65);

void BM_OccupancyLp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Cmdp c = random_cmdp(0, n, 3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(primal_optimum(c));
}
BENCHMARK(BM_OccupancyLp)->Arg(5)->Arg(20);

void BM_GridworldLp(benchmark::State& state) {
    const Cmdp c = build_gridworld(GridworldConfig::default_map());
    for (auto _ : state) benchmark::DoNotOptimize(primal_optimum(c));
}
BENCHMARK(BM_GridworldLp)->Unit(benchmark::kMillisecond);

void BM_ExactLagrangianMax(benchmark::State& state) {
    const Cmdp c = build_gridworld(GridworldConfig::default_map());
    const Vector lambda = Vector::Constant(1, 8.0);
    for (auto _ : state) benchmark::DoNotOptimize(exact_lagrangian_max(c, lambda));
}
BENCHMARK(BM_ExactLagrangianMax);

void BM_DualDescentExact(benchmark::State& state) {
    const Cmdp c = build_gridworld(GridworldConfig::default_map());
    DualConfig cfg;
    cfg.eta = 0.05;
    cfg.k_max = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(dual_descent(c, cfg));
}
BENCHMARK(BM_DualDescentExact)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_DualDescentPg(benchmark::State& state) {
    const Cmdp c = build_gridworld(GridworldConfig::default_map());
    DualConfig cfg;
    cfg.eta = 0.01;
    cfg.k_max = 200;
    cfg.primal_mode = PrimalMode::PolicyGradient;
    cfg.pg.max_iters = 1;
    for (auto _ : state) benchmark::DoNotOptimize(dual_descent(c, cfg));
}
BENCHMARK(BM_DualDescentPg)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
