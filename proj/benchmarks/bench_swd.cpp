#include <benchmark/benchmark.h>

#include "swd/bootstrap.hpp"
#include "swd/exact_ot.hpp"
#include "swd/measures.hpp"
#include "swd/smooth_w1.hpp"

using namespace swd;

namespace {

PointCloud gaussian(std::size_t dim, std::size_t n, const char* stream) {
  return sample(DistributionSpec::standard_gaussian(dim), n, Seed{1, stream});
}

void BM_Assignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = gaussian(3, n, "a");
  const auto b = gaussian(3, n, "b");
  for (auto _ : state) benchmark::DoNotOptimize(w1_assignment(a, b).distance);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Assignment)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity();

void BM_MinCostFlow(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = empirical_measure(gaussian(3, n, "a"));
  const auto b = empirical_measure(gaussian(3, n / 2 + 1, "b"));
  for (auto _ : state) benchmark::DoNotOptimize(w1_mincost_flow(a, b).distance);
}
BENCHMARK(BM_MinCostFlow)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_Sorted1d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = empirical_measure(gaussian(1, n, "a"));
  const auto b = empirical_measure(gaussian(1, n, "b"));
  for (auto _ : state) benchmark::DoNotOptimize(w1_sorted_1d(a, b).distance);
}
BENCHMARK(BM_Sorted1d)->Range(1 << 10, 1 << 16);

void BM_Quadrature1d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = gaussian(1, n, "a");
  const auto b = gaussian(1, n, "b");
  for (auto _ : state) benchmark::DoNotOptimize(swd_quadrature_1d(a, b, 0.5).value);
}
BENCHMARK(BM_Quadrature1d)->Range(64, 4096)->Unit(benchmark::kMillisecond);

void BM_GridFlow(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto a = gaussian(dim, 256, "a");
  const auto b = gaussian(dim, 256, "b");
  SmoothingConfig c;
  c.method = SmoothingMethod::grid_flow;
  for (auto _ : state) benchmark::DoNotOptimize(swd_estimate(a, b, c).value);
}
BENCHMARK(BM_GridFlow)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);

void BM_MonteCarloExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = gaussian(5, n, "a");
  const auto b = gaussian(5, n, "b");
  SmoothingConfig c;
  c.method = SmoothingMethod::mc_exact;
  c.repeats = 1;
  for (auto _ : state) benchmark::DoNotOptimize(swd_estimate(a, b, c).value);
}
BENCHMARK(BM_MonteCarloExact)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMillisecond);

void BM_OneSampleBootstrap(benchmark::State& state) {
  const auto data = gaussian(2, 100, "data");
  SmoothingConfig c;
  c.method = SmoothingMethod::grid_flow;
  for (auto _ : state) {
    benchmark::DoNotOptimize(one_sample_bootstrap(data, 1.0, 20, Seed{3, "boot"}, c).values.back());
  }
}
BENCHMARK(BM_OneSampleBootstrap)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
