#include <benchmark/benchmark.h>

#include "haarlab/bellman.hpp"
#include "haarlab/operators.hpp"
#include "haarlab/specnorm.hpp"
#include "haarlab/transference.hpp"
#include "haarlab/weights.hpp"

using namespace haarlab;

namespace {

StepFunction random_function(const DyadicGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(grid.leaf_count());
  for (double& x : v) x = rng.normal();
  return StepFunction(grid, std::move(v));
}

void BM_HaarExpand(benchmark::State& state) {
  const DyadicGrid grid(static_cast<int>(state.range(0)));
  const StepFunction f = random_function(grid, 1);
  for (auto _ : state) benchmark::DoNotOptimize(haar_expand(f));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.leaf_count()));
}
BENCHMARK(BM_HaarExpand)->Arg(10)->Arg(16)->Arg(20);

void BM_ShiftApply(benchmark::State& state) {
  const DyadicGrid grid(12);
  Rng rng(2);
  const auto spec = ops::HaarShiftSpec::random(grid, static_cast<int>(state.range(0)), rng);
  const StepFunction f = random_function(grid, 3);
  for (auto _ : state) benchmark::DoNotOptimize(ops::apply_haar_shift(spec, f));
}
BENCHMARK(BM_ShiftApply)->DenseRange(1, 4);

void BM_WeightedNorm(benchmark::State& state) {
  const DyadicGrid grid(static_cast<int>(state.range(0)));
  Rng rng(4);
  const auto spec = ops::HaarShiftSpec::random(grid, 2, rng);
  const Weight w = gen_random_a2(grid, 4.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm_weighted(ops::as_map(spec), w));
}
BENCHMARK(BM_WeightedNorm)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_PlankAlpha(benchmark::State& state) {
  Rng rng(6);
  const MartingaleTree tree = random_martingale_tree(static_cast<int>(state.range(0)), 4.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(plank_alpha(tree));
}
BENCHMARK(BM_PlankAlpha)->DenseRange(1, 4);

void BM_DpBellman(benchmark::State& state) {
  const BellmanPoint x{0.3, -0.2, 1.2, 0.9, 1.1, 1.5};
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dp_bellman(x, 4.0, k, GridSpec{0.25}));
}
BENCHMARK(BM_DpBellman)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
