#include "chainlift/transport.hpp"

#include <cmath>

namespace chainlift {

namespace {

Vec clamp_to(const Box& region, const Vec& x) { return x.cwiseMax(region.lo).cwiseMin(region.hi); }

bool inside(const ControlAffineSystem& sys, const Box& region, const Vec& x) {
  return region.contains(sys.domain().wrap(x), 1e-12) || region.contains(x, 1e-12);
}

}  // namespace

std::vector<Vec> refine_orbit(const ControlAffineSystem& sys, const ChainControlSet& Q, const ControlFunction& u,
                              const Vec& x, const TransportOptions& opts) {
  if (opts.K < 1) throw InputError("transport: window K must be >= 1");
  validate_integration_inputs(sys, x, u, opts.step);
  const Box region = Q.hull.inflated(opts.inflate);
  const int K = opts.K;
  Integrator integ(sys, {opts.step});
  std::vector<Vec> states(static_cast<std::size_t>(2 * K + 1));
  states[static_cast<std::size_t>(K)] = x;
  for (int k = 0; k < K; ++k) {
    const auto i = static_cast<std::size_t>(K + k);
    states[i + 1] = clamp_to(region, integ.flow(states[i], u, k, k + 1));
  }
  for (int k = 0; k > -K; --k) {
    const auto i = static_cast<std::size_t>(K + k);
    states[i - 1] = clamp_to(region, integ.flow(states[i], u, k, k - 1));
  }
  FlowMap map(sys, opts.step);
  const PseudoOrbit pseudo = make_pseudo_orbit(map, u, std::move(states));
  return shadow(map, pseudo, opts.shadow).orbit;
}

TransportResult transport_orbit(const ControlAffineSystem& sys, const ChainControlSet& Q,
                                const std::vector<Vec>& u_orbit, const ControlFunction& v,
                                const TransportOptions& opts) {
  if (u_orbit.size() != static_cast<std::size_t>(2 * opts.K + 1)) throw InputError("transport: orbit length != 2K + 1");
  FlowMap map(sys, opts.step);
  const PseudoOrbit pseudo = make_pseudo_orbit(map, v, u_orbit);
  const ShadowResult sh = shadow(map, pseudo, opts.shadow);
  TransportResult out;
  out.y = sh.y0;
  out.orbit = sh.orbit;
  out.alpha = pseudo.alpha;
  out.beta = sh.beta;
  out.residual = sh.residual;
  const Box region = Q.hull.inflated(opts.inflate);
  for (const Vec& p : sh.orbit) {
    if (!inside(sys, region, p)) out.isolation_warning = true;
  }
  return out;
}

TransportResult fiber_transport(const ControlAffineSystem& sys, const ChainControlSet& Q, const ControlFunction& u,
                                const ControlFunction& v, const Vec& x, const TransportOptions& opts) {
  if (u.dim() != sys.control_dim() || v.dim() != sys.control_dim()) throw InputError("transport: control dimension");
  if (u == v) {
    TransportResult same;
    same.y = x;
    return same;
  }
  return transport_orbit(sys, Q, refine_orbit(sys, Q, u, x, opts), v, opts);
}

int homotopy_leg_count(const ControlRange& range, const TestFunctionFamily& family, double eps_step, int min_legs) {
  const double delta = delta_for_epsilon(eps_step, family);
  // Legs of length 1/L keep |w_s - w_r| <= diam U / L strictly below delta.
  const int legs = static_cast<int>(std::floor(range.diameter() / delta)) + 1;
  return std::max(std::max(1, min_legs), legs);
}

HomotopyResult homotopy_transport(const ControlAffineSystem& sys, const ChainControlSet& Q, const ControlFunction& u,
                                  const ControlFunction& v, const Vec& x, const HomotopyOptions& opts) {
  HomotopyResult res;
  res.path.push_back(x);
  res.endpoint = x;
  if (u.dim() != sys.control_dim() || v.dim() != sys.control_dim()) throw InputError("homotopy: control dimension");
  if (u == v) return res;

  const TestFunctionFamily family(sys.control_dim(), opts.family);
  res.delta = delta_for_epsilon(opts.eps_step, family);
  const int legs = homotopy_leg_count(sys.range(), family, opts.eps_step, opts.min_legs);
  std::vector<Vec> orbit;
  try {
    orbit = refine_orbit(sys, Q, u, x, opts.transport);
  } catch (const Error& e) {
    throw HomotopyLegError(std::string("homotopy: refining the starting orbit failed: ") + e.what(), res);
  }
  for (int i = 1; i <= legs; ++i) {
    const double tau = i == legs ? 1.0 : static_cast<double>(i) / legs;
    try {
      const TransportResult tr = transport_orbit(sys, Q, orbit, convex_combination(u, v, tau), opts.transport);
      orbit = tr.orbit;
      res.path.push_back(tr.y);
      res.taus.push_back(tau);
      res.max_alpha = std::max(res.max_alpha, tr.alpha);
      res.isolation_warning = res.isolation_warning || tr.isolation_warning;
      res.legs = i;
      res.endpoint = tr.y;
    } catch (const Error& e) {
      throw HomotopyLegError("homotopy: leg " + std::to_string(i) + " failed: " + e.what(), res);
    }
  }
  res.final_orbit = std::move(orbit);
  return res;
}

}  // namespace chainlift
