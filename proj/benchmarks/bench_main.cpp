#include <benchmark/benchmark.h>

#include "convreg/penalty.hpp"
#include "convreg/rng.hpp"
#include "convreg/spectrum.hpp"
#include "convreg/transform_matrix.hpp"

using namespace convreg;

namespace {

// Args: g, h. Filter size 3 and N = 20 throughout.
void shape_args(benchmark::internal::Benchmark* b) {
  for (auto [g, h] : {std::pair{3, 1}, {1, 3}, {3, 6}, {6, 3}}) b->Args({g, h});
}

void BM_BuildTransform(benchmark::State& state) {
  const auto kernel = random_kernel(3, state.range(0), state.range(1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_transform(kernel, 20));
}
BENCHMARK(BM_BuildTransform)->Apply(shape_args)->Unit(benchmark::kMicrosecond);

void BM_Gram(benchmark::State& state) {
  const auto m = build_transform(random_kernel(3, state.range(0), state.range(1), 1), 20);
  for (auto _ : state) benchmark::DoNotOptimize(gram(m));
}
BENCHMARK(BM_Gram)->Apply(shape_args)->Unit(benchmark::kMillisecond);

void BM_GradientFast(benchmark::State& state) {
  const auto kernel = random_kernel(3, state.range(0), state.range(1), 1);
  PenaltyEvaluator evaluator(kernel, RegularizerConfig{1.0, 20});
  for (auto _ : state) benchmark::DoNotOptimize(evaluator.evaluate(kernel));
}
BENCHMARK(BM_GradientFast)->Apply(shape_args)->Unit(benchmark::kMillisecond);

void BM_GradientDirect(benchmark::State& state) {
  const auto kernel = random_kernel(3, 2, 2, 1);
  const RegularizerConfig cfg{1.0, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(gradient_direct(kernel, cfg));
}
BENCHMARK(BM_GradientDirect)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SingularExtrema(benchmark::State& state) {
  const auto m = build_transform(random_kernel(3, state.range(0), state.range(1), 1), 20);
  for (auto _ : state) benchmark::DoNotOptimize(singular_extrema(m));
}
BENCHMARK(BM_SingularExtrema)->Apply(shape_args)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
