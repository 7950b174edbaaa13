#pragma once

#include <string>
#include <vector>

#include "chainlift/chain.hpp"
#include "chainlift/errors.hpp"
#include "chainlift/metric.hpp"
#include "chainlift/shadowing.hpp"

namespace chainlift {

struct TransportOptions {
  int K = 20;                 // window half-length (time-1 steps)
  double step = 2e-2;         // integrator step for the time-1 maps (s)
  double inflate = 1.1;       // containment probe region: Q.hull inflated
  ShadowOptions shadow;       // Newton settings shared by every solve
};

struct TransportResult {
  Vec y;                       // y_0 of the shadow orbit driven by v
  std::vector<Vec> orbit;      // shadow orbit, index k + K
  double alpha = 0.0;          // max jump of the re-driven pseudo-orbit
  double beta = 0.0;
  double residual = 0.0;
  bool isolation_warning = false;  // some orbit point left the inflated hull
};

/// The u-orbit through (approximately) x on [-K, K]: unit steps clamped to the
/// inflated hull form a pseudo-orbit which is then shadowed under u.
std::vector<Vec> refine_orbit(const ControlAffineSystem& sys, const ChainControlSet& Q, const ControlFunction& u,
                              const Vec& x, const TransportOptions& opts);

/// h_uv: the u-orbit through x re-driven by v is shadowed under v and the
/// shadow's point at time 0 is returned.
TransportResult fiber_transport(const ControlAffineSystem& sys, const ChainControlSet& Q, const ControlFunction& u,
                                const ControlFunction& v, const Vec& x, const TransportOptions& opts = {});

/// Same, starting from a known u-orbit (index k + K) instead of a single point.
TransportResult transport_orbit(const ControlAffineSystem& sys, const ChainControlSet& Q,
                                const std::vector<Vec>& u_orbit, const ControlFunction& v,
                                const TransportOptions& opts);

struct HomotopyOptions {
  double eps_step = 0.5;   // consecutive legs are delta(eps_step)-close in sup norm
  int min_legs = 1;
  FamilyConfig family;
  TransportOptions transport;
};

struct HomotopyResult {
  Vec endpoint;
  std::vector<Vec> path;    // x, then the fiber point after every leg
  std::vector<double> taus; // tau after every leg
  int legs = 0;
  double delta = 0.0;       // sup-norm step bound used for the partition
  double max_alpha = 0.0;
  bool isolation_warning = false;
  std::vector<Vec> final_orbit;
};

/// A leg of a homotopy transport failed; the path up to that leg is kept.
class HomotopyLegError : public NumericalError {
 public:
  HomotopyLegError(const std::string& what, HomotopyResult partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const HomotopyResult& partial() const noexcept { return partial_; }

 private:
  HomotopyResult partial_;
};

/// Transports x in Q(u) to Q(v) along w_tau = (1 - tau) u + tau v with
/// floor(diam U / delta(eps_step)) + 1 legs (at least min_legs). u == v gives the
/// one-point path {x}. A failing leg raises HomotopyLegError.
HomotopyResult homotopy_transport(const ControlAffineSystem& sys, const ChainControlSet& Q, const ControlFunction& u,
                                  const ControlFunction& v, const Vec& x, const HomotopyOptions& opts = {});

/// Number of legs for the partition of [0, 1].
int homotopy_leg_count(const ControlRange& range, const TestFunctionFamily& family, double eps_step, int min_legs);

}  // namespace chainlift
