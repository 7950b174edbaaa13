#include "chainlift/graph_verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chainlift/parallel.hpp"

namespace chainlift {

GraphVerifyReport graph_verify(const ControlAffineSystem& sys, const ChainControlSet& Q, const Vec& u0,
                               const GraphVerifyOptions& opts) {
  if (opts.n_controls < 0 || opts.continuity_pairs < 0) throw InputError("graph_verify: counts must be >= 0");
  GraphVerifyReport rep;
  const Box region = Q.hull.inflated(opts.fiber.inflate);

  const StateGrid seeds(sys.domain(), opts.equilibrium_h);
  const EquilibriumSearch eq = equilibria(sys, u0, seeds);
  std::vector<const Equilibrium*> inside;
  for (const auto& e : eq.points) {
    if (region.contains(e.point)) inside.push_back(&e);
  }
  rep.equilibria_in_Q = inside.size();
  if (inside.size() != 1) {
    rep.hypothesis_note = "hypothesis failed: Q(u0) has " + std::to_string(inside.size()) +
                          " equilibria in the inflated hull, expected exactly one";
    return rep;
  }
  if (!inside.front()->hyperbolic) {
    rep.hypothesis_note = "hypothesis failed: the equilibrium of u0 is not hyperbolic";
    return rep;
  }
  rep.hypothesis_ok = true;
  rep.hypothesis_note = "Q(u0) is a single hyperbolic equilibrium";
  rep.base_point = inside.front()->point;

  const ControlFunction base = ControlFunction::constant(u0);
  auto control_for = [&](std::size_t i) {
    return random_control(sys.range(), opts.control_pieces, mix_seed(opts.seed, i), opts.piece_len);
  };

  FiberOptions fopts = opts.fiber;
  fopts.threads = 1;
  rep.controls.resize(static_cast<std::size_t>(opts.n_controls));
  parallel_for(rep.controls.size(), opts.threads, [&](std::size_t i) {
    ControlRecord& rec = rep.controls[i];
    rec.index = i;
    rec.control = control_for(i);
    rec.discrepancy = std::numeric_limits<double>::infinity();
    rec.roundtrip = std::numeric_limits<double>::infinity();
    try {
      const HomotopyResult there = homotopy_transport(sys, Q, base, rec.control, rep.base_point, opts.homotopy);
      rec.transported = there.endpoint;
      rec.legs = there.legs;
      const HomotopyResult back = homotopy_transport(sys, Q, rec.control, base, there.endpoint, opts.homotopy);
      rec.roundtrip = sys.domain().distance(back.endpoint, rep.base_point);
      rec.isolation_warning = there.isolation_warning || back.isolation_warning;
    } catch (const Error& e) {
      rec.failure = e.what();
    }
    const LiftFiber fib = fiber(sys, Q, rec.control, fopts);
    rec.fiber_points = fib.points;
    rec.singleton = fib.points.size() == 1;
    if (rec.transported.size() > 0) {
      for (const Vec& p : fib.points) {
        rec.discrepancy = std::min(rec.discrepancy, sys.domain().distance(p, rec.transported));
      }
    }
  });

  std::size_t singles = 0;
  for (const auto& rec : rep.controls) {
    if (rec.singleton) ++singles;
    rep.max_discrepancy = std::max(rep.max_discrepancy, rec.discrepancy);
    rep.max_roundtrip = std::max(rep.max_roundtrip, rec.roundtrip);
    if (rec.isolation_warning) rep.isolation_ok = false;
    if (!rec.failure.empty()) rep.failures.push_back("control " + std::to_string(rec.index) + ": " + rec.failure);
    if (!rec.singleton) {
      rep.failures.push_back("control " + std::to_string(rec.index) + ": fiber has " +
                             std::to_string(rec.fiber_points.size()) + " points");
    }
  }
  rep.singleton_rate = rep.controls.empty() ? 1.0 : static_cast<double>(singles) / rep.controls.size();

  // Continuity pairs: v_j against (1 - s) v_j + s v_{j+1} with s shrinking.
  const TestFunctionFamily family(sys.control_dim());
  const std::size_t n_pairs = std::min<std::size_t>(static_cast<std::size_t>(opts.continuity_pairs),
                                                    rep.controls.size());
  std::vector<ContinuityPair> pairs(n_pairs, ContinuityPair{0.0, std::numeric_limits<double>::infinity()});
  parallel_for(n_pairs, opts.threads, [&](std::size_t j) {
    const ControlRecord& rec = rep.controls[j];
    if (!rec.failure.empty()) return;
    const ControlFunction other = control_for(static_cast<std::size_t>(opts.n_controls) + j);
    const double s = std::ldexp(0.5, -static_cast<int>(j % 6));
    const ControlFunction near = convex_combination(rec.control, other, s);
    pairs[j].du = du_distance(rec.control, near, family, opts.metric_N).value;
    try {
      const TransportResult tr = fiber_transport(sys, Q, rec.control, near, rec.transported, opts.homotopy.transport);
      pairs[j].dx = sys.domain().distance(tr.y, rec.transported);
    } catch (const Error&) {
    }
  });
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.du < b.du; });
  rep.continuity_pairs = std::move(pairs);
  return rep;
}

}  // namespace chainlift
