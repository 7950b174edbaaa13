#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chainlift/catalog.hpp"
#include "chainlift/entropy.hpp"
#include "chainlift/errors.hpp"
#include "chainlift/integrator.hpp"

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

// Minimum number of constant controls covering the samples for x' = x + c on
// Q = [-q, q]: c keeps x inside on [0, tau] iff x lies in
// [-c + (c - q) e^-tau, -c + (c + q) e^-tau]. Exact by the interval sweep.
std::size_t interval_optimum(const std::vector<double>& xs, const std::vector<double>& pool, double q, double tau,
                             double margin) {
  std::vector<std::pair<double, double>> iv;
  for (double c : pool)
    iv.push_back({-c + (c - q) * std::exp(-tau) - margin, -c + (c + q) * std::exp(-tau) + margin});
  std::vector<double> pts = xs;
  std::sort(pts.begin(), pts.end());
  std::size_t count = 0, i = 0;
  while (i < pts.size()) {
    double best = -HUGE_VAL;
    for (auto [lo, hi] : iv)
      if (lo <= pts[i] && hi >= pts[i]) best = std::max(best, hi);
    if (best == -HUGE_VAL) return 0;  // uncoverable
    ++count;
    while (i < pts.size() && pts[i] <= best) ++i;
  }
  return count;
}

std::vector<double> values(const std::vector<ControlFunction>& pool) {
  std::vector<double> out;
  for (const auto& c : pool) out.push_back(c(0.0)[0]);
  return out;
}

std::vector<double> firsts(const std::vector<Vec>& xs) {
  std::vector<double> out;
  for (const auto& x : xs) out.push_back(x[0]);
  return out;
}

}  // namespace

TEST_CASE("sample_box and constant_pool") {
  auto s = sample_box(Box(v1(-0.5), v1(0.5)), 5);
  REQUIRE(s.size() == 5);
  CHECK(s.front()[0] == -0.5);
  CHECK(s.back()[0] == 0.5);
  CHECK(sample_box(Box(v2(0, 0), v2(1, 1)), 3).size() == 9);
  auto pool = constant_pool(ControlRange(v1(0), v1(1)), 3);
  REQUIRE(pool.size() == 3);
  CHECK(pool[0](0.0)[0] == -1.0);
  CHECK(pool[2](0.0)[0] == 1.0);
}

TEST_CASE("admissible pair witnesses keep their samples in Q") {
  auto sys = scalar_affine();
  auto Q = box_set(Box(v1(-1), v1(1)));
  auto pool = constant_pool(shrink_control_range(sys.range(), 0.6), 61);
  auto pair = make_admissible_pair(sys, Q, sample_box(Box(v1(-0.5), v1(0.5)), 21), pool, 10.0);
  REQUIRE(pair.witnesses.size() == 21);
  Integrator integ(sys, {1e-2});
  for (std::size_t i = 0; i < 21; ++i)
    CHECK(integ.exit_time(pair.K_samples[i], pair.witnesses[i], 0, 10, Q.hull) >= 10.0);
  CHECK_THROWS_AS(make_admissible_pair(sys, Q, {v1(1.5)}, pool, 10.0), InputError);
}

TEST_CASE("r_inv small horizon and empty pool") {
  auto sys = scalar_affine();
  auto Q = box_set(Box(v1(-1), v1(1)));
  auto pool = constant_pool(shrink_control_range(sys.range(), 0.6), 31);
  auto pair = make_admissible_pair(sys, Q, sample_box(Box(v1(-0.5), v1(0.5)), 101), pool, 10.0);
  auto r = r_inv_estimate(sys, pair, 0.01, pool, 1.0);
  CHECK(r.count == 1);
  CHECK_FALSE(r.infinite);
  auto none = r_inv_estimate(sys, pair, 1.0, {}, 1.0);
  CHECK(none.infinite);
  CHECK(none.uncovered.size() == 101);
}

TEST_CASE("scalar spanning counts grow like e^tau") {
  auto sys = scalar_affine();
  auto Q = box_set(Box(v1(-1), v1(1)));
  auto pool = constant_pool(shrink_control_range(sys.range(), 0.6), 301);
  auto pair = make_admissible_pair(sys, Q, sample_box(Box(v1(-0.5), v1(0.5)), 101), pool, 10.0);
  const auto xs = firsts(pair.K_samples);
  const auto cs = values(pool);
  std::vector<double> taus{1, 2, 3}, counts, optimum;
  for (double tau : taus) {
    auto r = r_inv_estimate(sys, pair, tau, pool, 1.0, 1e-2);
    REQUIRE_FALSE(r.infinite);
    std::size_t lo = interval_optimum(xs, cs, 1.0, tau, 1e-6);
    std::size_t hi = interval_optimum(xs, cs, 1.0, tau, -1e-6);
    CHECK(r.count >= lo);
    CHECK(static_cast<double>(r.count) <= (1 + std::log(101.0)) * static_cast<double>(hi));
    counts.push_back(static_cast<double>(r.count));
    optimum.push_back(static_cast<double>(hi));
  }
  CHECK(counts[0] <= counts[1]);
  CHECK(counts[1] <= counts[2]);
  auto fit = h_inv_direct(taus, optimum);
  MESSAGE("greedy " << counts[0] << " " << counts[1] << " " << counts[2] << ", optimum slope " << fit.slope);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("h_inv_direct") {
  const double c = 3.0;
  auto fit = h_inv_direct({1, 2, 3}, {c * std::exp(1.0), c * std::exp(2.0), c * std::exp(3.0)});
  REQUIRE(fit.defined);
  CHECK(fit.slope == doctest::Approx(1.0));
  CHECK(fit.residual < 1e-12);
  CHECK(h_inv_direct({1, 2, 3}, {4, 4, 4}).slope == 0.0);
  CHECK_FALSE(h_inv_direct({1, 2}, {2, 4}).defined);
  CHECK_FALSE(h_inv_direct({1, 2, 3}, {2, 0, 4}).defined);
}

TEST_CASE("h_inv_formula on linear systems") {
  for (double a : {1.0, 2.0}) {
    auto sys = scalar_affine(a);
    auto f = h_inv_formula(sys, {{ControlFunction::constant(v1(0.3)), v1(-0.3 / a)}}, 5.0);
    CHECK(std::abs(f.value - a) <= 1e-3);
    CHECK(f.samples_used == 1);
  }
  for (auto [a, expected] : {std::pair{1.0, 1.0}, std::pair{2.0, 2.0}}) {
    auto sys = saddle2d(a, 1.0);
    auto f = h_inv_formula(sys, {{ControlFunction::constant(v2(0, 0)), v2(0, 0)}}, 5.0);
    CHECK(std::abs(f.value - expected) <= 1e-3);
  }
}

TEST_CASE("adding lift samples never raises the formula minimum") {
  auto sys = torus_shear();
  std::vector<LiftSample> samples;
  double prev = HUGE_VAL;
  for (double c : {0.0, 0.2, -0.3, 0.45}) {
    // Equilibrium of x' = sin x + c, y' = -sin y + k sin x + c on the branch through 0.
    double x = -std::asin(c);
    double y = std::asin(0.5 * std::sin(x) + c);
    samples.push_back({ControlFunction::constant(v2(c, c)), v2(x, y)});
    auto f = h_inv_formula(sys, samples, 4.0);
    CHECK(f.value <= prev);
    prev = f.value;
    CHECK(f.per_sample.size() == samples.size());
  }
}

TEST_CASE("r_inv monotonicity in K and in the inflation") {
  auto sys = scalar_affine();
  auto Q = box_set(Box(v1(-1), v1(1)));
  auto pool = constant_pool(shrink_control_range(sys.range(), 0.6), 121);
  auto big = make_admissible_pair(sys, Q, sample_box(Box(v1(-0.5), v1(0.5)), 101), pool, 10.0);
  auto small = make_admissible_pair(sys, Q, sample_box(Box(v1(-0.5), v1(0.5)), 51), pool, 10.0);
  for (double tau : {1.0, 2.0, 3.0}) {
    auto rb = r_inv_estimate(sys, big, tau, pool, 1.0);
    auto rs = r_inv_estimate(sys, small, tau, pool, 1.0);
    CHECK(rs.count <= rb.count);
    auto wide = r_inv_estimate(sys, big, tau, pool, 1.05);
    CHECK(wide.count <= rb.count);
  }
}

TEST_CASE("greedy cover matches exact cover on small instances") {
  std::mt19937_64 rng(2);
  int instances = 0, equal = 0;
  for (int t = 0; t < 40; ++t) {
    auto sys = scalar_affine();
    auto Q = box_set(Box(v1(-1), v1(1)));
    std::uniform_real_distribution<double> d(-0.6, 0.6);
    std::vector<ControlFunction> pool;
    for (int i = 0; i < 20; ++i) pool.push_back(ControlFunction::constant(v1(d(rng))));
    std::vector<Vec> samples;
    for (int i = 0; i < 12; ++i) samples.push_back(v1(-0.5 + i / 11.0));
    double tau = 0.5 + 0.1 * t;
    auto cover = coverage(sys, samples, pool, Q.hull, tau, 1e-2, 1);
    auto g = greedy_cover(cover, samples.size());
    auto e = exact_cover(cover, samples.size());
    CHECK(g.infinite == e.infinite);
    if (e.infinite) continue;
    ++instances;
    CHECK(g.count >= e.count);
    CHECK(static_cast<double>(g.count) <= (1 + std::log(12.0)) * static_cast<double>(e.count));
    if (g.count == e.count) ++equal;
  }
  MESSAGE(equal << " of " << instances << " feasible instances have greedy == exact");
  CHECK(instances > 10);
}

TEST_CASE("exact cover is a true minimum") {
  // Three samples; {0, 2} covers everything, each singleton misses one.
  CoverMatrix m{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}};
  auto e = exact_cover(m, 3);
  CHECK(e.count == 2);
  auto g = greedy_cover(m, 3);
  CHECK(g.count == 2);
  CHECK(g.chosen.front() == 0);  // ties go to the lowest index
  CHECK_THROWS_AS(exact_cover(CoverMatrix(21, std::vector<char>(3, 1)), 3), InputError);
}
