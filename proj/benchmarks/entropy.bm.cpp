#include <benchmark/benchmark.h>

#include "chainlift/catalog.hpp"
#include "chainlift/entropy.hpp"

using namespace chainlift;

static void BM_GreedyScalarCover(benchmark::State& state) {
  auto sys = scalar_affine();
  Box Q(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  auto samples = sample_box(Box(Vec::Constant(1, -0.5), Vec::Constant(1, 0.5)), 201);
  auto pool = constant_pool(shrink_control_range(sys.range(), 0.6), 301);
  auto cover = coverage(sys, samples, pool, Q, 3.0, 2e-2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_cover(cover, samples.size()));
}
BENCHMARK(BM_GreedyScalarCover);
