#include <benchmark/benchmark.h>

#include <numbers>

#include "levyhom/montecarlo.hpp"

using namespace levyhom;

static void SimulateShear(benchmark::State& state) {
    const double kL = 2.0 * std::numbers::pi;
    SimConfig c{LevyKernel::create(2, 1.4, TailSpec::truncated()),
                shear_stream(kL, 2.0),
                0.1, 0.0, 1.0,
                static_cast<int>(state.range()),
                7, 5, 32, 1, {}};
    for (auto _ : state) {
        PathStats st = simulate(c);
        benchmark::DoNotOptimize(st.cov.back()[0]);
    }
}
BENCHMARK(SimulateShear)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
