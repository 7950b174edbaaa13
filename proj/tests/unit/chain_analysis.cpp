#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chainlift/catalog.hpp"
#include "chainlift/chain.hpp"
#include "chainlift/errors.hpp"
#include "chainlift/fiber.hpp"
#include "chainlift/parallel.hpp"
#include "oracles.hpp"

using namespace chainlift;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ChainParams params(double T, double eps, double step) {
  ChainParams p;
  p.T = T;
  p.eps = eps;
  p.step = step;
  return p;
}

ChainControlSet box_set(const Box& b) {
  ChainControlSet Q;
  Q.hull = b;
  return Q;
}

std::vector<ChainControlSet> sets_for(const ControlAffineSystem& sys, double h, double eps, double step,
                                      CellGraph* keep = nullptr) {
  StateGrid grid(sys.domain(), h);
  CellGraph g = build_transition_graph(sys, grid, params(0.5, eps, step));
  auto out = chain_control_sets(g);
  if (keep) *keep = g;
  return out;
}

}  // namespace

TEST_CASE("scalar chain control set is [-1, 1]") {
  auto sys = scalar_affine(1.0);
  StateGrid grid(sys.domain(), 0.01);
  CellGraph g = build_transition_graph(sys, grid, params(0.5, 0.02, 1e-3));
  auto sets = chain_control_sets(g);
  REQUIRE(sets.size() == 1);
  double r = oracle::scalar_chain_half_width(1.0, 1.0);
  CHECK(hausdorff_per_axis(sets[0].hull, Box(v1(-r), v1(r))) <= 0.02 + 1e-9);
  CHECK(sets[0].eps == 0.02);
  CHECK(sets[0].T == 0.5);
  CHECK(strongly_connected(g, sets[0].cells));

  // Every stored witness replays within eps.
  std::size_t edges = 0, bad = 0;
  for (std::size_t c = 0; c < g.node_count(); ++c)
    for (auto* e = g.successors_begin(c); e != g.successors_end(c); ++e, ++edges)
      if (!(replay_edge(sys, g, c, *e) < g.params().eps)) ++bad;
  CHECK(edges == g.edge_count());
  CHECK(bad == 0);
}

TEST_CASE("graph construction validates its inputs") {
  auto sys = scalar_affine();
  StateGrid grid(sys.domain(), 0.01);
  CHECK_THROWS_AS(build_transition_graph(sys, grid, params(0.0, 0.02, 1e-3)), InputError);
  CHECK_THROWS_AS(build_transition_graph(sys, grid, params(0.5, 0.005, 1e-3)), InputError);
}

TEST_CASE("zero dynamics gives self-edges only and is reported as degenerate") {
  auto sys = make_system({"zero_dynamics", {}, {}, {}});
  StateGrid grid(sys.domain(), 0.5);
  CellGraph g = build_transition_graph(sys, grid, params(0.5, 0.5, 1e-2));
  for (std::size_t c = 0; c < g.node_count(); ++c) {
    REQUIRE(g.successors_end(c) - g.successors_begin(c) == 1);
    CHECK(g.successors_begin(c)->target == c);
  }
  CHECK(g.diagnostics().degenerate);
  CHECK_THROWS_AS(chain_control_sets(g), InputError);
}

TEST_CASE("one-cell grids") {
  auto still = make_system({"scalar_affine", {}, Box(v1(-0.1), v1(0.1)), {}});
  StateGrid g1(still.domain(), 0.2);
  REQUIRE(g1.cell_count() == 1);
  CellGraph a = build_transition_graph(still, g1, params(0.5, 0.2, 1e-3));
  CHECK(a.has_edge(0, 0));  // u = 0 keeps the center at the equilibrium

  auto away = make_system({"scalar_affine", {}, Box(v1(1.0), v1(1.2)), ControlRange(v1(0), v1(0.01))});
  StateGrid g2(away.domain(), 0.2);
  CellGraph b = build_transition_graph(away, g2, params(0.5, 0.2, 1e-3));
  CHECK_FALSE(b.has_edge(0, 0));
  CHECK(chain_control_sets(b).empty());
}

TEST_CASE("acyclic graph has no chain control sets") {
  auto sys = make_system({"scalar_affine", {}, Box(v1(0.5), v1(1.5)), ControlRange(v1(0), v1(0.001))});
  CellGraph g = build_transition_graph(sys, StateGrid(sys.domain(), 0.05), params(0.5, 0.05, 1e-3));
  CHECK(g.diagnostics().escaped > 0);
  CHECK(chain_control_sets(g).empty());
}

TEST_CASE("saddle chain control set is close to [-1, 1]^2 on a coarse grid") {
  auto sys = saddle2d();
  const double h = 0.05;
  CellGraph g = build_transition_graph(sys, StateGrid(sys.domain(), h), params(0.5, h, 1e-2));
  auto sets = chain_control_sets(g);
  REQUIRE(sets.size() == 1);
  Box truth(v2(-1, -1), v2(1, 1));
  CHECK(std::abs(sets[0].hull.lo[0] - truth.lo[0]) <= 2 * h);
  CHECK(std::abs(sets[0].hull.hi[0] - truth.hi[0]) <= 2 * h);
  CHECK(std::abs(sets[0].hull.lo[1] - truth.lo[1]) <= 2 * h);
  CHECK(std::abs(sets[0].hull.hi[1] - truth.hi[1]) <= 2 * h);

  // Maximality: adding a neighbouring outside cell breaks strong connectivity.
  const auto& cells = sets[0].cells;
  std::vector<std::size_t> boundary;
  for (std::size_t c : cells)
    for (std::size_t nb : g.grid().neighbors(c))
      if (!std::binary_search(cells.begin(), cells.end(), nb)) boundary.push_back(nb);
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
  REQUIRE(boundary.size() >= 10);
  std::mt19937_64 rng(1);
  std::shuffle(boundary.begin(), boundary.end(), rng);
  for (int i = 0; i < 10; ++i) {
    auto grown = cells;
    grown.push_back(boundary[static_cast<std::size_t>(i)]);
    std::sort(grown.begin(), grown.end());
    CHECK_FALSE(strongly_connected(g, grown));
  }

  std::size_t bad = 0;
  for (std::size_t c = 0; c < g.node_count(); ++c)
    for (auto* e = g.successors_begin(c); e != g.successors_end(c); ++e)
      if (!(replay_edge(sys, g, c, *e) < h)) ++bad;
  CHECK(bad == 0);
}

TEST_CASE("hull moves by at most 2h under refinement") {
  auto scalar = scalar_affine();
  std::vector<Box> hulls;
  for (double h : {0.04, 0.02, 0.01}) {
    auto sets = sets_for(scalar, h, 2 * h, 1e-3);
    REQUIRE(sets.size() == 1);
    hulls.push_back(sets[0].hull);
  }
  CHECK(hausdorff_per_axis(hulls[0], hulls[1]) <= 2 * 0.02 + 1e-9);
  CHECK(hausdorff_per_axis(hulls[1], hulls[2]) <= 2 * 0.01 + 1e-9);

  auto saddle = saddle2d();
  std::vector<Box> sh;
  for (double h : {0.1, 0.05, 0.025}) {
    auto sets = sets_for(saddle, h, h, 1e-2);
    REQUIRE(sets.size() == 1);
    sh.push_back(sets[0].hull);
  }
  CHECK(hausdorff_per_axis(sh[0], sh[1]) <= 2 * 0.05 + 1e-9);
  CHECK(hausdorff_per_axis(sh[1], sh[2]) <= 2 * 0.025 + 1e-9);
}

TEST_CASE("several sets are sorted by size then least cell") {
  auto sys = make_system({"bistable_cubic", {}, {}, {}});
  auto sets = sets_for(sys, 0.01, 0.02, 1e-3);
  REQUIRE(sets.size() == 3);
  for (std::size_t i = 1; i < sets.size(); ++i) {
    CHECK(sets[i - 1].cells.size() >= sets[i].cells.size());
    if (sets[i - 1].cells.size() == sets[i].cells.size()) CHECK(sets[i - 1].cells.front() < sets[i].cells.front());
  }
  CHECK(sets[0].hull.contains(v1(0.0)));
  CHECK(sets[1].hull.contains(v1(-1.0)));
  CHECK(sets[2].hull.contains(v1(1.0)));
}

TEST_CASE("equilibria of constant controls") {
  auto scalar = scalar_affine();
  StateGrid grid(scalar.domain(), 0.1);
  auto a = equilibria(scalar, v1(0.3), grid);
  REQUIRE(a.points.size() == 1);
  CHECK(std::abs(a.points[0].point[0] + 0.3) < 1e-12);
  CHECK(std::abs(a.points[0].eigenvalues[0] - std::complex<double>(1, 0)) < 1e-12);
  CHECK(a.points[0].hyperbolic);
  auto b = equilibria(scalar, v1(1.0), grid);
  REQUIRE(b.points.size() == 1);
  CHECK(std::abs(b.points[0].point[0] + 1.0) < 1e-12);

  auto saddle = saddle2d(2.0, 0.5);
  auto c = equilibria(saddle, v2(0, 0), StateGrid(saddle.domain(), 0.25));
  REQUIRE(c.points.size() == 1);
  CHECK(c.points[0].point.norm() < 1e-12);
  REQUIRE(c.points[0].eigenvalues.size() == 2);
  CHECK(std::abs(c.points[0].eigenvalues[0] - std::complex<double>(2.0, 0)) < 1e-12);
  CHECK(std::abs(c.points[0].eigenvalues[1] - std::complex<double>(-0.5, 0)) < 1e-12);

  auto bi = equilibria(make_system({"bistable_cubic", {}, {}, {}}), v1(0.0), grid);
  REQUIRE(bi.points.size() == 3);
  CHECK(bi.points[0].point[0] == doctest::Approx(-1.0));
  CHECK(bi.points[1].point[0] == doctest::Approx(0.0));
  CHECK(bi.points[2].point[0] == doctest::Approx(1.0));
}

TEST_CASE("fibers of constant controls") {
  auto saddle = saddle2d();
  ChainControlSet Q = box_set(Box(v2(-1, -1), v2(1, 1)));
  auto f0 = fiber(saddle, Q, ControlFunction::constant(v2(0, 0)));
  REQUIRE(f0.points.size() == 1);
  CHECK(f0.points[0].norm() < 1e-4);
  auto f1 = fiber(saddle, Q, ControlFunction::constant(v2(1, 1)));
  REQUIRE(f1.points.size() == 1);
  CHECK((f1.points[0] - v2(-1, 1)).norm() < 1e-3);

  auto scalar = scalar_affine();
  ChainControlSet Qs = box_set(Box(v1(-1), v1(1)));
  for (double c : {-0.8, -0.25, 0.0, 0.6}) {
    auto f = fiber(scalar, Qs, ControlFunction::constant(v1(c)));
    REQUIRE(f.points.size() == 1);
    CHECK(std::abs(f.points[0][0] + c) < 1e-4);
    // Finite fiber: exactly the hyperbolic equilibria inside Q.
    auto eq = equilibria(scalar, v1(c), StateGrid(scalar.domain(), 0.1));
    REQUIRE(eq.points.size() == 1);
    CHECK(std::abs(eq.points[0].point[0] - f.points[0][0]) < 1e-6);
  }
}

TEST_CASE("fibers of random controls match the bounded-orbit integrals") {
  auto saddle = saddle2d();
  ChainControlSet Q = box_set(Box(v2(-1.01, -1.01), v2(1.01, 1.01)));
  for (std::uint64_t s = 0; s < 5; ++s) {
    ControlFunction u = random_control(saddle.range(), 8, mix_seed(s, 5));
    auto f = fiber(saddle, Q, u);
    REQUIRE(f.points.size() == 1);
    Vec expected = v2(oracle::expanding_bounded_point(1.0, u, 0), oracle::contracting_bounded_point(1.0, u, 1));
    CHECK((f.points[0] - expected).norm() < 1e-3);
    CHECK(f.region.contains(f.points[0]));
    CHECK(f.horizon >= 10.0);
  }
}

TEST_CASE("isolated_check") {
  IsolationOptions o;
  o.T_probe = 20.0;
  o.samples = 100;
  auto saddle = saddle2d();
  auto rs = isolated_check(saddle, box_set(Box(v2(-1, -1), v2(1, 1))), {1.1}, o);
  REQUIRE(rs.probes.size() == 1);
  CHECK_FALSE(rs.probes[0].counterexample);
  CHECK(rs.largest_clean_factor == 1.1);
  CHECK(rs.heuristic);

  auto scalar = scalar_affine();
  auto sc = isolated_check(scalar, box_set(Box(v1(-1), v1(1))), {1.1}, o);
  CHECK_FALSE(sc.probes[0].counterexample);

  auto zero = make_system({"zero_dynamics", {}, {}, {}});
  auto z = isolated_check(zero, box_set(Box(v1(-1), v1(1))), {1.05, 1.1, 1.5}, o);
  REQUIRE(z.probes.size() == 3);
  for (const auto& p : z.probes) {
    CHECK(p.counterexample);
    CHECK_FALSE(Box(v1(-1), v1(1)).contains(p.witness));
  }
  CHECK(z.largest_clean_factor == 0.0);
}
