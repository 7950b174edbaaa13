#pragma once

// Closed forms used as expected values. None of these call into the library's
// integrators or solvers; they only read the raw pieces of a control.

#include <cmath>
#include <limits>
#include <vector>

#include "chainlift/control.hpp"

namespace oracle {

/// Pieces of a piecewise-constant control as [lo, hi) intervals with values.
struct Piece {
  double lo;
  double hi;
  double value;
};

inline std::vector<Piece> pieces(const chainlift::ControlFunction& u, int coordinate) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> b = u.breakpoints();
  std::vector<Piece> out;
  double lo = -inf;
  for (std::size_t i = 0; i < u.values().size(); ++i) {
    double hi = i < b.size() ? b[i] : inf;
    out.push_back({lo, hi, u.values()[i][coordinate]});
    lo = hi;
  }
  return out;
}

/// x' = a x + c from x0 over time t.
inline double scalar_flow(double a, double x0, double c, double t) {
  if (a == 0.0) return x0 + c * t;
  return std::exp(a * t) * x0 + (std::exp(a * t) - 1.0) / a * c;
}

/// Unique bounded solution at time 0 of x' = a x + u (a > 0):
/// x(0) = -int_0^inf e^{-a s} u(s) ds, summed exactly over the pieces.
inline double expanding_bounded_point(double a, const chainlift::ControlFunction& u, int coordinate) {
  double sum = 0.0;
  for (const Piece& p : pieces(u, coordinate)) {
    double lo = std::max(p.lo, 0.0);
    double hi = p.hi;
    if (!(hi > lo)) continue;
    double e_hi = std::isinf(hi) ? 0.0 : std::exp(-a * hi);
    sum += p.value * (std::exp(-a * lo) - e_hi) / a;
  }
  return -sum;
}

/// Unique bounded solution at time 0 of y' = -b y + u (b > 0):
/// y(0) = int_{-inf}^0 e^{b s} u(s) ds.
inline double contracting_bounded_point(double b, const chainlift::ControlFunction& u, int coordinate) {
  double sum = 0.0;
  for (const Piece& p : pieces(u, coordinate)) {
    double lo = p.lo;
    double hi = std::min(p.hi, 0.0);
    if (!(hi > lo)) continue;
    double e_lo = std::isinf(lo) ? 0.0 : std::exp(b * lo);
    sum += p.value * (std::exp(b * hi) - e_lo) / b;
  }
  return sum;
}

/// Shadow of x_k = 0 under y -> 2 y + d on [-K, K] with the right end pinned
/// at y_K = 0: y_k = -d (1 - 2^{k - K}).
inline double doubling_shadow(double d, int k, int K) { return -d * (1.0 - std::ldexp(1.0, k - K)); }

/// Chain control set of x' = a x + u, u in [-r, r], a > 0: [-r/a, r/a].
inline double scalar_chain_half_width(double a, double r) { return r / a; }

}  // namespace oracle
