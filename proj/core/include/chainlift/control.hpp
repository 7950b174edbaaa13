#pragma once

#include <utility>
#include <vector>

#include "chainlift/geometry.hpp"

namespace chainlift {

/// Box-shaped control range u0 + rho * [-hw, hw].
class ControlRange {
 public:
  ControlRange(Vec center, Vec half_widths, double rho = 1.0);

  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  /// Half-widths before scaling by rho.
  const Vec& half_widths() const { return half_widths_; }
  double rho() const { return rho_; }

  Vec lower() const { return center_ - rho_ * half_widths_; }
  Vec upper() const { return center_ + rho_ * half_widths_; }
  Box box() const { return Box(lower(), upper()); }

  bool contains(const Vec& u, double tol = 1e-12) const;
  Vec clamp(const Vec& u) const;
  /// Euclidean diameter of the effective box.
  double diameter() const { return 2.0 * rho_ * half_widths_.norm(); }

 private:
  Vec center_;
  Vec half_widths_;
  double rho_;
};

/// Same center, half-widths scaled by rho (rho in (0, 1]).
ControlRange shrink_control_range(const ControlRange& range, double rho);

/// Piecewise-constant control on a finite window, extended by its first and
/// last values. Right-continuous: the value on [b_i, b_{i+1}) is values[i+1].
///
/// Shifts only touch an accumulated offset, so breakpoints and values are never
/// resampled and shift(shift(u, t), -t) == u holds bit for bit.
class ControlFunction {
 public:
  ControlFunction() = default;
  ControlFunction(std::vector<double> breakpoints, std::vector<Vec> values);

  static ControlFunction constant(Vec value);

  int dim() const { return values_.empty() ? 0 : static_cast<int>(values_.front().size()); }
  bool is_constant() const { return breakpoints_.empty(); }

  /// u(t).
  const Vec& operator()(double t) const;

  std::size_t piece_count() const { return values_.size(); }
  const std::vector<Vec>& values() const { return values_; }
  /// Breakpoints in the shifted frame.
  std::vector<double> breakpoints() const;
  /// Breakpoints strictly inside (t0, t1), ascending; t0 < t1 required.
  std::vector<double> breakpoints_between(double t0, double t1) const;
  /// [first breakpoint, last breakpoint] in the shifted frame; {0,0} if constant.
  std::pair<double, double> window() const;
  double offset() const { return offset_; }

  bool within(const ControlRange& range, double tol = 1e-12) const;

  friend bool operator==(const ControlFunction& a, const ControlFunction& b);
  friend ControlFunction shift(const ControlFunction& u, double t);

 private:
  std::vector<double> breakpoints_;  // unshifted frame
  std::vector<Vec> values_;
  double offset_ = 0.0;  // u(s) = base(s + offset_)
};

/// theta_t u: s -> u(t + s).
ControlFunction shift(const ControlFunction& u, double t);

/// (1 - tau) u + tau v on the union of breakpoints.
ControlFunction convex_combination(const ControlFunction& u, const ControlFunction& v, double tau);

/// ess sup_t |u(t) - v(t)| in the Euclidean norm on R^m.
double sup_norm_distance(const ControlFunction& u, const ControlFunction& v);

}  // namespace chainlift
