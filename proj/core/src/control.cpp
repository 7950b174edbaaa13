#include "chainlift/control.hpp"

#include <algorithm>
#include <cmath>

#include "chainlift/errors.hpp"

namespace chainlift {

ControlRange::ControlRange(Vec center, Vec half_widths, double rho)
    : center_(std::move(center)), half_widths_(std::move(half_widths)), rho_(rho) {
  if (center_.size() == 0 || center_.size() != half_widths_.size()) {
    throw InputError("control range: center and half_widths must have equal positive length");
  }
  if (!(half_widths_.array() > 0.0).all() || !half_widths_.allFinite()) {
    throw InputError("control range: half_widths must be strictly positive");
  }
  if (!(rho_ > 0.0 && rho_ <= 1.0)) throw InputError("control range: rho must lie in (0, 1]");
}

bool ControlRange::contains(const Vec& u, double tol) const {
  if (u.size() != center_.size()) return false;
  return box().contains(u, tol);
}

Vec ControlRange::clamp(const Vec& u) const { return u.cwiseMax(lower()).cwiseMin(upper()); }

ControlRange shrink_control_range(const ControlRange& range, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InputError("shrink_control_range: rho must lie in (0, 1]");
  return ControlRange(range.center(), range.half_widths(), range.rho() * rho);
}

ControlFunction::ControlFunction(std::vector<double> breakpoints, std::vector<Vec> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.size() != breakpoints_.size() + 1) {
    throw InputError("control function: need exactly one more value than breakpoints");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw InputError("control function: breakpoints must be strictly increasing");
    }
  }
  for (double b : breakpoints_) {
    if (!std::isfinite(b)) throw InputError("control function: non-finite breakpoint");
  }
  const auto m = values_.front().size();
  if (m == 0) throw InputError("control function: empty control vector");
  for (const auto& v : values_) {
    if (v.size() != m || !v.allFinite()) {
      throw InputError("control function: values must be finite and share one dimension");
    }
  }
}

ControlFunction ControlFunction::constant(Vec value) { return ControlFunction({}, {std::move(value)}); }

const Vec& ControlFunction::operator()(double t) const {
  const double s = t + offset_;
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), s);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

std::vector<double> ControlFunction::breakpoints() const {
  std::vector<double> out(breakpoints_.size());
  std::transform(breakpoints_.begin(), breakpoints_.end(), out.begin(),
                 [this](double b) { return b - offset_; });
  return out;
}

std::vector<double> ControlFunction::breakpoints_between(double t0, double t1) const {
  std::vector<double> out;
  const auto lo = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t0 + offset_);
  for (auto it = lo; it != breakpoints_.end(); ++it) {
    const double b = *it - offset_;
    if (b >= t1) break;
    if (b > t0) out.push_back(b);
  }
  return out;
}

std::pair<double, double> ControlFunction::window() const {
  if (breakpoints_.empty()) return {0.0, 0.0};
  return {breakpoints_.front() - offset_, breakpoints_.back() - offset_};
}

bool ControlFunction::within(const ControlRange& range, double tol) const {
  return std::all_of(values_.begin(), values_.end(),
                     [&](const Vec& v) { return range.contains(v, tol); });
}

bool operator==(const ControlFunction& a, const ControlFunction& b) {
  if (a.offset_ != b.offset_ || a.breakpoints_ != b.breakpoints_) return false;
  if (a.values_.size() != b.values_.size()) return false;
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    if (a.values_[i].size() != b.values_[i].size() || a.values_[i] != b.values_[i]) return false;
  }
  return true;
}

ControlFunction shift(const ControlFunction& u, double t) {
  ControlFunction out = u;
  out.offset_ = u.offset_ + t;
  return out;
}

namespace {

// Merged breakpoints (shifted frame) plus one value pair per resulting piece.
template <class Fn>
ControlFunction combine(const ControlFunction& u, const ControlFunction& v, Fn&& fn) {
  if (u.dim() != v.dim()) throw InputError("control functions differ in dimension");
  std::vector<double> bp = u.breakpoints();
  const std::vector<double> bv = v.breakpoints();
  bp.insert(bp.end(), bv.begin(), bv.end());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  std::vector<Vec> values;
  values.reserve(bp.size() + 1);
  auto sample_at = [&](std::size_t piece) {
    // A point strictly inside piece `piece`.
    if (bp.empty()) return 0.0;
    if (piece == 0) return bp.front() - 1.0;
    if (piece == bp.size()) return bp.back() + 1.0;
    return 0.5 * (bp[piece - 1] + bp[piece]);
  };
  for (std::size_t i = 0; i <= bp.size(); ++i) {
    const double s = sample_at(i);
    values.push_back(fn(u(s), v(s)));
  }
  return ControlFunction(std::move(bp), std::move(values));
}

}  // namespace

ControlFunction convex_combination(const ControlFunction& u, const ControlFunction& v, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InputError("convex_combination: tau must lie in [0, 1]");
  if (tau == 0.0) return u;
  if (tau == 1.0) return v;
  return combine(u, v, [tau](const Vec& a, const Vec& b) -> Vec { return (1.0 - tau) * a + tau * b; });
}

double sup_norm_distance(const ControlFunction& u, const ControlFunction& v) {
  const ControlFunction d = combine(u, v, [](const Vec& a, const Vec& b) -> Vec { return a - b; });
  double best = 0.0;
  for (const auto& val : d.values()) best = std::max(best, val.norm());
  return best;
}

}  // namespace chainlift
