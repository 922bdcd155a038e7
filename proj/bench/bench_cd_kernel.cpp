#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "cusplab/cd_kernel.hpp"
#include "cusplab/euler_patch.hpp"

using namespace cusplab;

namespace {

// Node velocities of the corner patch; state.range(0) is the node budget.
template <auto Kernel>
void node_velocities_bench(benchmark::State& state) {
    const PatchState patch = make_corner_patch(std::numbers::pi / 8, 0.99, state.range(0));
    std::vector<Vec2> targets;
    for (const auto& c : patch.contours) targets.insert(targets.end(), c.nodes.begin(), c.nodes.end());
    std::vector<Vec2> out(targets.size());
    const KernelOptions opt;
    for (auto _ : state) {
        Kernel(patch.contours, targets, out, opt);
        benchmark::DoNotOptimize(out.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(targets.size()));
}

} // namespace

BENCHMARK(node_velocities_bench<velocities_serial>)->Name("serial")->Arg(512)->Arg(1024)->Arg(2048)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(node_velocities_bench<velocities_parallel>)->Name("parallel")->Arg(512)->Arg(1024)->Arg(2048)
    ->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
