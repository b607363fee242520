#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include <dynpr/graph.hpp>
#include <dynpr/integrate.hpp>
#include <dynpr/solvers.hpp>
#include <dynpr/synth.hpp>
#include <dynpr/teleportation.hpp>

namespace {

dynpr::TransitionOperator make_operator(std::size_t n, std::size_t edges) {
    return dynpr::build_transition(dynpr::synth_graph(n, edges, 42));
}

void BM_apply(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto P = make_operator(n, 10 * n);
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    std::vector<double> y(n);
    for (auto _ : state) {
        P.apply(x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(10 * n));
}
BENCHMARK(BM_apply)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_static_pagerank(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto P = make_operator(n, 10 * n);
    const std::vector<double> v(n, 1.0 / static_cast<double>(n));
    for (auto _ : state) {
        auto scores = dynpr::static_pagerank(P, dynpr::SolveConfig{}, v);
        benchmark::DoNotOptimize(scores.data());
    }
}
BENCHMARK(BM_static_pagerank)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_evolve_rk45(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto P = make_operator(n, 10 * n);
    const auto columns = dynpr::normalize_activity(dynpr::synth_activity(n, 6, 7));
    const auto schedule = dynpr::TeleportationSchedule::piecewise(columns, 1.0, 6.0);

    dynpr::EvolutionConfig cfg;
    cfg.t_max = 6.0;
    cfg.output_grid = dynpr::uniform_grid(6.0, 12);
    for (auto _ : state) {
        auto traj = dynpr::evolve(P, schedule, cfg);
        benchmark::DoNotOptimize(traj.states.data());
        state.counters["steps"] = static_cast<double>(traj.stats.steps);
    }
}
BENCHMARK(BM_evolve_rk45)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
