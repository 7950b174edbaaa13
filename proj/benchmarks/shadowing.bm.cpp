#include <benchmark/benchmark.h>

#include "chainlift/catalog.hpp"
#include "chainlift/chain.hpp"
#include "chainlift/shadowing.hpp"

using namespace chainlift;

static void BM_ShadowSaddle(benchmark::State& state) {
  auto sys = saddle2d();
  FlowMap map(sys, 2e-2);
  auto u = ControlFunction::constant(Vec::Zero(2));
  const int K = static_cast<int>(state.range(0));
  std::vector<Vec> states;
  for (int k = -K; k <= K; ++k) states.push_back(Vec::Constant(2, 1e-3 * ((k % 3) - 1)));
  PseudoOrbit p = make_pseudo_orbit(map, u, states);
  for (auto _ : state) benchmark::DoNotOptimize(shadow(map, p));
}
BENCHMARK(BM_ShadowSaddle)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
