#include <benchmark/benchmark.h>

#include "mimo/sweep.hpp"
#include "mimo/verify.hpp"

using namespace mimo;

namespace {

SweepConfig bench_sweep()
{
    SweepConfig cfg;
    cfg.problem = make_problem(ProblemId::P1);
    cfg.snr_db = {0.0, 10.0, 20.0};
    cfg.realizations = 4;
    return cfg;
}

void sweep(benchmark::State& state, Execution exec)
{
    const SweepConfig cfg = bench_sweep();
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(cfg, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.snr_db.size()) * cfg.realizations);
}

void monte_carlo(benchmark::State& state, Execution exec)
{
    const ProblemSpec spec = make_problem(ProblemId::P1);
    const Instance inst = desk_instance(spec, 3);
    const SolveResult res = solve_with_gp(spec, inst);
    const std::int64_t n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_mse_dl(res.dl, inst.ch, inst.noise, 0, 0, n, 7, exec));
    state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK_CAPTURE(sweep, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sweep, parallel, Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(monte_carlo, serial, Execution::Serial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(monte_carlo, parallel, Execution::Parallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
