#include <doctest.h>

#include <cmath>
#include <random>

#include "chainlift/catalog.hpp"
#include "chainlift/errors.hpp"
#include "chainlift/graph_verify.hpp"
#include "chainlift/parallel.hpp"
#include "chainlift/shadowing.hpp"
#include "chainlift/transport.hpp"
#include "oracles.hpp"

using namespace chainlift;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ChainControlSet box_set(const Box& b) {
  ChainControlSet Q;
  Q.hull = b;
  return Q;
}

Vec saddle_oracle(const ControlFunction& u) {
  return v2(oracle::expanding_bounded_point(1.0, u, 0), oracle::contracting_bounded_point(1.0, u, 1));
}

// Saddle orbit x_k = saddle_oracle(shift(u, k)), k = -K..K, built from the
// closed forms so long windows do not amplify integration error.
std::vector<Vec> saddle_orbit_states(const ControlFunction& u, int K) {
  std::vector<Vec> out;
  for (int k = -K; k <= K; ++k) out.push_back(saddle_oracle(shift(u, k)));
  return out;
}

// Saddle orbit with every state moved by a seeded random vector of length r.
PseudoOrbit noisy_saddle_orbit(SkewProductMap& map, const ControlFunction& u, int K, double r, std::uint64_t seed) {
  auto states = saddle_orbit_states(u, K);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  for (auto& s : states) {
    Vec d = Vec::NullaryExpr(s.size(), [&] { return n(rng); });
    s += r * d / d.norm();
  }
  return make_pseudo_orbit(map, u, states);
}

}  // namespace

TEST_CASE("is_pseudo_orbit") {
  auto sys = saddle2d();
  FlowMap map(sys, 2e-2);
  ControlFunction u = random_control(sys.range(), 8, 1);
  PseudoOrbit exact = orbit_through(map, u, saddle_oracle(u), 6);
  CHECK(max_jump(map, exact) <= 1e-12);
  CHECK(is_pseudo_orbit(map, exact, 1e-9));
  CHECK(std::abs(exact.alpha - max_jump(map, exact)) <= 1e-12);

  auto states = exact.states;
  states[6][0] += 0.05;  // k = 0
  PseudoOrbit bumped = make_pseudo_orbit(map, u, states);
  // The next step carries the defect through x -> e x.
  double amplified = 0.05 * std::exp(1.0);
  CHECK(bumped.alpha == doctest::Approx(amplified).epsilon(1e-8));
  CHECK(is_pseudo_orbit(map, bumped, amplified * (1 + 1e-6)));
  CHECK_FALSE(is_pseudo_orbit(map, bumped, amplified * (1 - 1e-6)));
  CHECK_FALSE(is_pseudo_orbit(map, bumped, 0.05 * 1.01));

  PseudoOrbit broken = exact;
  broken.controls[3] = shift(broken.controls[3], 0.5);
  CHECK_THROWS_AS(is_pseudo_orbit(map, broken, 1.0), InputError);
  PseudoOrbit tiny = exact;
  tiny.K = 0;
  tiny.states = {exact.state(0)};
  tiny.controls = {exact.control(0)};
  CHECK_THROWS_AS(is_pseudo_orbit(map, tiny, 1.0), InputError);
}

TEST_CASE("exact orbits are their own shadows") {
  auto sys = saddle2d();
  FlowMap map(sys, 2e-2);
  ControlFunction u = random_control(sys.range(), 8, 2);
  PseudoOrbit exact = orbit_through(map, u, saddle_oracle(u), 10);
  auto r = shadow(map, exact);
  CHECK(r.beta <= 1e-10);
  CHECK(r.residual <= 1e-10);
  CHECK((r.y0 - exact.state(0)).norm() <= 1e-10);
}

TEST_CASE("doubling map with a constant defect") {
  AffineMap map(Mat::Constant(1, 1, 2.0), v1(0.1));
  ControlFunction b = ControlFunction::constant(v1(0));
  for (int K : {5, 30}) {
    PseudoOrbit p = make_pseudo_orbit(map, b, std::vector<Vec>(static_cast<std::size_t>(2 * K + 1), v1(0)));
    CHECK(p.alpha == doctest::Approx(0.1));
    auto r = shadow(map, p);
    CHECK(r.residual <= 1e-10);
    CHECK(r.unstable_dim == 1);
    for (int k = -K; k <= K; ++k)
      CHECK(std::abs(r.orbit[static_cast<std::size_t>(k + K)][0] - oracle::doubling_shadow(0.1, k, K)) <= 1e-12);
    CHECK(r.beta == doctest::Approx(0.1 * (1 - std::ldexp(1.0, -2 * K))));
  }
  PseudoOrbit p = make_pseudo_orbit(map, b, std::vector<Vec>(61, v1(0)));
  auto r = shadow(map, p);
  CHECK(std::abs(r.y0[0] + 0.1) <= 1e-9);
  CHECK(std::abs(r.beta - 0.1) <= 1e-9);
}

TEST_CASE("saddle shadows stay within 3 alpha") {
  auto sys = saddle2d();
  FlowMap map(sys, 2e-2);
  for (std::uint64_t s = 0; s < 5; ++s) {
    ControlFunction u = random_control(sys.range(), 8, mix_seed(s, 3));
    // Perturbation r gives jumps up to about (1 + e) r; scale so alpha <= 1e-3.
    PseudoOrbit p = noisy_saddle_orbit(map, u, 15, 2.5e-4, s);
    REQUIRE(p.alpha <= 1e-3);
    auto r = shadow(map, p);
    CHECK(r.residual <= 1e-10);
    CHECK(r.beta <= 3 * p.alpha);
  }
}

TEST_CASE("beta over alpha is stable at small alpha") {
  auto sys = saddle2d();
  FlowMap map(sys, 2e-2);
  ControlFunction u = random_control(sys.range(), 8, 9);
  std::vector<double> ratios;
  for (double a : {1e-2, 1e-3, 1e-4}) {
    PseudoOrbit p = noisy_saddle_orbit(map, u, 15, a, 77);
    auto r = shadow(map, p);
    ratios.push_back(r.beta / p.alpha);
  }
  for (double q : ratios) CHECK(std::abs(q / ratios[1] - 1.0) <= 0.2);
}

TEST_CASE("uniqueness under perturbed Newton seeds") {
  auto sys = saddle2d();
  FlowMap map(sys, 2e-2);
  ControlFunction u = random_control(sys.range(), 8, 4);
  PseudoOrbit p = noisy_saddle_orbit(map, u, 12, 1e-3, 5);
  auto a = shadow(map, p);
  ShadowOptions o;
  std::vector<Vec> guess = p.states;
  for (auto& g : guess) g += v2(1e-4, -1e-4);
  o.initial_guess = guess;
  auto b = shadow(map, p, o);
  CHECK(uniqueness_check(p, a, b, 0.1, 1e-8));
  CHECK(uniqueness_check(p, a, a, 0.1));

  PseudoOrbit q = noisy_saddle_orbit(map, u, 12, 1e-3, 6);
  auto c = shadow(map, q);
  CHECK_THROWS_AS(uniqueness_check(p, a, c, 0.1), InputError);
  CHECK_THROWS_AS(uniqueness_check(p, a, b, a.beta / 2), InputError);
}

TEST_CASE("splitting sources agree") {
  auto sys = saddle2d();
  FlowMap map(sys, 2e-2);
  ControlFunction u = random_control(sys.range(), 8, 8);
  // per_point flows every iterate over +-splitting_window; keep that inside the domain.
  PseudoOrbit p = noisy_saddle_orbit(map, u, 10, 1e-6, 8);
  auto qr = shadow(map, p);
  ShadowOptions fixed;
  fixed.source = SplittingSource::fixed;
  fixed.fixed_P = Mat::Zero(2, 2);
  fixed.fixed_P(1, 1) = 1.0;
  auto f = shadow(map, p, fixed);
  ShadowOptions per;
  per.source = SplittingSource::per_point;
  per.system = &sys;
  per.splitting_window = 6.0;
  auto pp = shadow(map, p, per);
  CHECK((qr.y0 - f.y0).norm() <= 1e-9);
  CHECK((qr.y0 - pp.y0).norm() <= 1e-9);
}

TEST_CASE("window growth changes y0 by geometrically decaying amounts") {
  auto sys = saddle2d();
  FlowMap map(sys, 2e-2);
  ControlFunction u = random_control(sys.range(), 8, 10);
  PseudoOrbit big = noisy_saddle_orbit(map, u, 24, 1e-3, 10);
  std::vector<Vec> y;
  for (int K : {3, 6, 12, 24}) {
    std::vector<Vec> mid(big.states.begin() + (24 - K), big.states.begin() + (24 + K + 1));
    y.push_back(shadow(map, make_pseudo_orbit(map, u, mid)).y0);
  }
  double d1 = (y[1] - y[0]).norm(), d2 = (y[2] - y[1]).norm(), d3 = (y[3] - y[2]).norm();
  MESSAGE("window changes " << d1 << " " << d2 << " " << d3);
  CHECK(d1 > 0.0);
  CHECK(d2 <= d1 * std::exp(-2.0));
  CHECK(d3 <= std::max(d2 * std::exp(-2.0), 1e-14));
}

TEST_CASE("Newton failure reports its trace") {
  auto sys = torus_shear();
  FlowMap map(sys, 2e-2);
  ControlFunction u = ControlFunction::constant(v2(0.1, 0.1));
  // Torus states wrap, so a plain orbit plus large offsets stays in the domain.
  auto states = orbit_through(map, u, v2(-0.1, 0.15), 8).states;
  for (std::size_t k = 0; k < states.size(); ++k) states[k] += v2(0.3 * std::cos(k), 0.3 * std::sin(k));
  PseudoOrbit p = make_pseudo_orbit(map, u, states);
  ShadowOptions o;
  o.max_iters = 1;
  try {
    shadow(map, p, o);
    FAIL("expected no convergence");
  } catch (const NoConvergenceError& e) {
    CHECK_FALSE(e.defect_trace().empty());
  }
}

TEST_CASE("fiber_transport reproduces bounded orbits") {
  auto saddle = saddle2d();
  auto Q = box_set(Box(v2(-1.01, -1.01), v2(1.01, 1.01)));
  auto u = ControlFunction::constant(v2(0, 0));
  auto same = fiber_transport(saddle, Q, u, u, v2(0, 0));
  CHECK(same.y == v2(0, 0));
  auto r = fiber_transport(saddle, Q, u, ControlFunction::constant(v2(1, 1)), v2(0, 0));
  CHECK((r.y - v2(-1, 1)).norm() <= 1e-3);
  CHECK(r.residual <= 1e-10);

  auto scalar = scalar_affine();
  auto Qs = box_set(Box(v1(-1.02), v1(1.02)));
  for (double c : {-0.9, 0.35, 0.7}) {
    auto s = fiber_transport(scalar, Qs, ControlFunction::constant(v1(0)), ControlFunction::constant(v1(c)), v1(0));
    CHECK(std::abs(s.y[0] + c) <= 1e-4);
  }
}

TEST_CASE("homotopy transport") {
  auto saddle = saddle2d();
  auto Q = box_set(Box(v2(-1.01, -1.01), v2(1.01, 1.01)));
  auto u = ControlFunction::constant(v2(0, 0));
  auto v = ControlFunction::constant(v2(1, 1));

  auto trivial = homotopy_transport(saddle, Q, u, u, v2(0, 0));
  CHECK(trivial.path.size() == 1);
  CHECK(trivial.endpoint == v2(0, 0));

  HomotopyOptions o;
  CHECK(homotopy_leg_count(saddle.range(), TestFunctionFamily(2), o.eps_step, 1) == 12);
  std::vector<Vec> ends;
  for (int legs : {2, 5, 12, 20}) {
    o.min_legs = legs;
    o.eps_step = 0.99;  // keep the forced count in charge
    auto h = homotopy_transport(saddle, Q, u, v, v2(0, 0), o);
    CHECK(h.legs >= legs);
    CHECK(h.path.size() == static_cast<std::size_t>(h.legs) + 1);
    CHECK(h.taus.back() == 1.0);
    ends.push_back(h.endpoint);
    CHECK((h.endpoint - v2(-1, 1)).norm() <= 1e-3);
  }
  for (const Vec& e : ends) CHECK((e - ends[0]).norm() <= 1e-6);
  auto direct = fiber_transport(saddle, Q, u, v, v2(0, 0));
  CHECK((direct.y - ends[0]).norm() <= 1e-6);
}

TEST_CASE("transport back and forth is the identity") {
  auto saddle = saddle2d();
  auto Q = box_set(Box(v2(-1.01, -1.01), v2(1.01, 1.01)));
  for (std::uint64_t s = 0; s < 4; ++s) {
    ControlFunction u = random_control(saddle.range(), 8, mix_seed(s, 40));
    ControlFunction v = random_control(saddle.range(), 8, mix_seed(s, 41));
    Vec x = saddle_oracle(u);
    auto there = fiber_transport(saddle, Q, u, v, x);
    CHECK((there.y - saddle_oracle(v)).norm() <= 1e-3);
    auto back = fiber_transport(saddle, Q, v, u, there.y);
    CHECK((back.y - x).norm() <= 1e-6);
  }
}

TEST_CASE("graph_verify on the scalar system matches the bounded-orbit formula") {
  auto scalar = scalar_affine();
  auto Q = box_set(Box(v1(-1.02), v1(1.02)));
  GraphVerifyOptions o;
  o.n_controls = 8;
  o.continuity_pairs = 4;
  auto r = graph_verify(scalar, Q, v1(0), o);
  REQUIRE(r.hypothesis_ok);
  CHECK(r.singleton_rate == 1.0);
  CHECK(r.isolation_ok);
  CHECK(r.failures.empty());
  for (const auto& c : r.controls) CHECK(std::abs(c.transported[0] - oracle::expanding_bounded_point(1.0, c.control, 0)) <= 1e-4);
  CHECK(r.continuity_pairs.size() == 4);
  for (std::size_t i = 1; i < r.continuity_pairs.size(); ++i)
    CHECK(r.continuity_pairs[i - 1].du <= r.continuity_pairs[i].du);
}

TEST_CASE("graph_verify refuses two equilibria in Q") {
  auto bi = make_system({"bistable_cubic", {}, {}, {}});
  auto Q = box_set(Box(v1(-1.2), v1(1.2)));
  auto r = graph_verify(bi, Q, v1(0), GraphVerifyOptions{});
  CHECK_FALSE(r.hypothesis_ok);
  CHECK(r.equilibria_in_Q == 3);
  CHECK(r.controls.empty());
  CHECK_FALSE(r.hypothesis_note.empty());
}
