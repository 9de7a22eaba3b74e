#include <benchmark/benchmark.h>

#include "levyhom/grid.hpp"
#include "levyhom/kernels.hpp"

using namespace levyhom;

static void SymbolEval(benchmark::State& state) {
    LevyKernel k = LevyKernel::create(2, 1.4, TailSpec::truncated());
    const double kk = static_cast<double>(state.range());
    for (auto _ : state) {
        SymbolValue v = symbol_radial(k, kk, 1e-10);
        benchmark::DoNotOptimize(v.psi);
    }
}
BENCHMARK(SymbolEval)->Arg(1)->Arg(10)->Arg(100);

static void SymbolEvalPowerLog(benchmark::State& state) {
    LevyKernel k = LevyKernel::create(2, 1.4, TailSpec::power_log(3.0, 0.0));
    const double kk = static_cast<double>(state.range());
    for (auto _ : state) {
        SymbolValue v = symbol_radial(k, kk, 1e-8);
        benchmark::DoNotOptimize(v.psi);
    }
}
BENCHMARK(SymbolEvalPowerLog)->Arg(1)->Arg(10);

static void TableForGrid(benchmark::State& state) {
    LevyKernel k = LevyKernel::create(2, 1.4, TailSpec::truncated());
    const int n = static_cast<int>(state.range());
    GridPtr grid = TorusGrid::make(2, n, 2.0 * 3.141592653589793);
    for (auto _ : state) {
        SymbolTable t = tabulate_for_grid(k, *grid);
        benchmark::DoNotOptimize(t.size());
    }
}
BENCHMARK(TableForGrid)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
