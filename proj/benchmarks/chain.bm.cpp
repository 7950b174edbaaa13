#include <benchmark/benchmark.h>

#include "chainlift/catalog.hpp"
#include "chainlift/chain.hpp"

using namespace chainlift;

// Transition graph and chain control sets of the scalar system; arg is 1/h.
static void BM_ScalarChainSets(benchmark::State& state) {
  auto sys = scalar_affine();
  ChainParams p;
  p.eps = 0.02;
  p.step = 1e-2;
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    CellGraph g = build_transition_graph(sys, StateGrid(sys.domain(), h), p);
    benchmark::DoNotOptimize(chain_control_sets(g));
  }
}
BENCHMARK(BM_ScalarChainSets)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
