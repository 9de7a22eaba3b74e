#include <benchmark/benchmark.h>

#include <numbers>

#include "levyhom/corrector.hpp"
#include "levyhom/environment.hpp"
#include "levyhom/grid.hpp"
#include "levyhom/rng.hpp"

using namespace levyhom;

namespace {
constexpr double kL = 2.0 * std::numbers::pi;

Field random_field(const GridPtr& grid) {
    CounterRng rng(0xbe9cULL);
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.next_normal();
    return f;
}
}  // namespace

static void TransformRoundTrip(benchmark::State& state) {
    GridPtr grid = TorusGrid::make(2, static_cast<int>(state.range()), kL);
    Field f = random_field(grid);
    for (auto _ : state) {
        Spectrum s = SpectralOps::transform(f);
        Field g = SpectralOps::inverse_transform(s);
        benchmark::DoNotOptimize(g[0]);
    }
}
BENCHMARK(TransformRoundTrip)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

static void DriftedOperatorApply(benchmark::State& state) {
    const int n = static_cast<int>(state.range());
    GridPtr grid = TorusGrid::make(2, n, kL);
    LevyKernel k = LevyKernel::create(2, 1.4, TailSpec::truncated());
    SymbolTable table = tabulate_for_grid(k, *grid);
    auto bf = drift(shear_stream(kL, 2.0)).realize(grid);
    LinearOperator op = make_drifted_operator(
        grid, NonlocalMultiplier(grid, table).values(), bf, true, "bench");
    Field f = random_field(grid);
    for (auto _ : state) {
        Field g = op.apply(f);
        benchmark::DoNotOptimize(g[0]);
    }
}
BENCHMARK(DriftedOperatorApply)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

static void CorrectorSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range());
    GridPtr grid = TorusGrid::make(2, n, kL);
    LevyKernel k = LevyKernel::create(2, 1.4, TailSpec::truncated());
    StreamField stream = shear_stream(kL, 2.0);
    CorrectorProblem p = CorrectorProblem::make(grid, k, stream, 0.0, 1e-10);
    for (auto _ : state) {
        CorrectorSolution sol = solve_regularized(p);
        benchmark::DoNotOptimize(sol.energy[0]);
    }
}
BENCHMARK(CorrectorSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
