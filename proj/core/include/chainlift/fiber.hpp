#pragma once

#include <cstdint>
#include <vector>

#include "chainlift/chain.hpp"
#include "chainlift/control.hpp"
#include "chainlift/system.hpp"

namespace chainlift {

struct FiberOptions {
  double T_f = 40.0;          // requested horizon (s)
  double inflate = 1.1;       // containment region is Q.hull inflated about its center
  double seed_h = 0.1;        // spacing of the candidate lattice over the inflated hull
  double min_survival = 10.0; // candidates must survive min(T_f, min_survival) both ways
  double tol = 1e-9;          // pattern-search step at which refinement stops
  double cluster_tol = 1e-3;  // refined points closer than this are merged
  double step = 1e-2;         // integrator step (s)
  int threads = 1;
};

/// Finite approximation of Q(u): states whose u-trajectory stays in the
/// inflated hull of Q on [-horizon, horizon].
struct LiftFiber {
  ControlFunction u;
  std::vector<Vec> points;       // lexicographically sorted
  std::vector<double> survival;  // min(forward, backward) stay time per point
  double horizon = 0.0;          // smallest survival over the points (T_f when empty)
  double requested_horizon = 0.0;
  double containment_tol = 0.0;  // cluster tolerance
  Box region;                    // the inflated hull
  std::size_t seeds = 0;         // lattice points that were refined
};

/// Survival score of x under u: the forward and backward exit times of the
/// inflated region, each capped at T_f.
struct Survival {
  double forward = 0.0;
  double backward = 0.0;
  double score() const { return forward < backward ? forward : backward; }
};

Survival survival(Integrator& integ, const Vec& x, const ControlFunction& u, const Box& region, double T_f);

/// Maximises survival from every local maximum of a candidate lattice by a
/// compass search with step halving, keeps points surviving
/// min(T_f, min_survival) both ways and clusters them.
LiftFiber fiber(const ControlAffineSystem& sys, const ChainControlSet& Q, const ControlFunction& u,
                const FiberOptions& opts = {});

/// Refines a single starting point; returns the refined point and its survival.
std::pair<Vec, Survival> refine_fiber_point(Integrator& integ, const ControlFunction& u, const Box& region,
                                            Vec x, double initial_step, const FiberOptions& opts);

}  // namespace chainlift
