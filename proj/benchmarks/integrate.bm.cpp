#include <benchmark/benchmark.h>

#include "chainlift/catalog.hpp"
#include "chainlift/chain.hpp"
#include "chainlift/integrator.hpp"

using namespace chainlift;

static void BM_IntegrateSaddle(benchmark::State& state) {
  auto sys = saddle2d();
  ControlFunction u = random_control(sys.range(), 8, 1);
  Integrator integ(sys, {1.0 / static_cast<double>(state.range(0))});
  Vec x = Vec::Zero(2);
  for (auto _ : state) benchmark::DoNotOptimize(integ.flow(x, u, 0.0, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IntegrateSaddle)->Arg(10)->Arg(100)->Arg(1000);

static void BM_VariationalTorus(benchmark::State& state) {
  auto sys = torus_shear();
  ControlFunction u = random_control(sys.range(), 8, 2);
  Vec x = Vec::Constant(2, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(variational_flow(sys, x, u, 1.0, 1e-2));
}
BENCHMARK(BM_VariationalTorus);
