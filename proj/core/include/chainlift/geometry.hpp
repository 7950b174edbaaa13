#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace chainlift {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned box [lo, hi] in R^n.
struct Box {
  Vec lo;
  Vec hi;

  Box() = default;
  Box(Vec lo_, Vec hi_);

  int dim() const { return static_cast<int>(lo.size()); }
  Vec center() const { return 0.5 * (lo + hi); }
  Vec half_widths() const { return 0.5 * (hi - lo); }
  bool contains(const Vec& x, double tol = 0.0) const;

  /// Box with the same center and half-widths multiplied by `factor`.
  Box inflated(double factor) const;
  /// Smallest box containing both.
  Box merged(const Box& other) const;
};

/// Hausdorff distance between two boxes in the sup norm per axis, reported as
/// the max over axes of the endpoint discrepancy.
double hausdorff_per_axis(const Box& a, const Box& b);

/// Flat state space: either a box with an escape guard or a flat torus.
class Domain {
 public:
  enum class Kind { box, torus };

  static Domain box(Vec lo, Vec hi);
  /// Fundamental domain [lo, hi) with periods hi - lo on every axis.
  static Domain torus(Vec lo, Vec hi);

  Kind kind() const { return kind_; }
  bool periodic() const { return kind_ == Kind::torus; }
  int dim() const { return static_cast<int>(bounds_.lo.size()); }
  const Box& bounds() const { return bounds_; }
  Vec periods() const { return bounds_.hi - bounds_.lo; }

  /// Maps into the fundamental domain (identity on box domains).
  Vec wrap(const Vec& x) const;
  /// Minimal-image displacement to - from.
  Vec displacement(const Vec& from, const Vec& to) const;
  double distance(const Vec& a, const Vec& b) const;
  bool contains(const Vec& x) const;

  /// Box domains: 2x inflation about the center; integration aborts outside it.
  const Box& safety_box() const { return safety_; }

  std::string describe() const;

 private:
  Domain(Kind kind, Box bounds);

  Kind kind_;
  Box bounds_;
  Box safety_;
};

/// FNV-1a over a byte string; used for config and family fingerprints.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace chainlift
