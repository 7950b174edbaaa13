#include "chainlift/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "chainlift/errors.hpp"

namespace chainlift {

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw InputError("box: lo/hi dimension mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw InputError("box: lo must not exceed hi");
  }
}

bool Box::contains(const Vec& x, double tol) const {
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

Box Box::inflated(double factor) const {
  const Vec c = center();
  const Vec r = half_widths() * factor;
  return Box(c - r, c + r);
}

Box Box::merged(const Box& other) const {
  return Box(lo.cwiseMin(other.lo), hi.cwiseMax(other.hi));
}

double hausdorff_per_axis(const Box& a, const Box& b) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.lo.size(); ++i) {
    d = std::max({d, std::abs(a.lo[i] - b.lo[i]), std::abs(a.hi[i] - b.hi[i])});
  }
  return d;
}

Domain::Domain(Kind kind, Box bounds) : kind_(kind), bounds_(std::move(bounds)) {
  for (Eigen::Index i = 0; i < bounds_.lo.size(); ++i) {
    if (!(bounds_.hi[i] > bounds_.lo[i])) {
      throw InputError("domain: every axis needs positive extent");
    }
  }
  safety_ = bounds_.inflated(2.0);
}

Domain Domain::box(Vec lo, Vec hi) { return Domain(Kind::box, Box(std::move(lo), std::move(hi))); }

Domain Domain::torus(Vec lo, Vec hi) {
  return Domain(Kind::torus, Box(std::move(lo), std::move(hi)));
}

Vec Domain::wrap(const Vec& x) const {
  if (kind_ == Kind::box) return x;
  Vec y = x;
  const Vec p = periods();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double r = std::fmod(y[i] - bounds_.lo[i], p[i]);
    if (r < 0.0) r += p[i];
    if (r >= p[i]) r = 0.0;
    y[i] = bounds_.lo[i] + r;
  }
  return y;
}

Vec Domain::displacement(const Vec& from, const Vec& to) const {
  Vec d = to - from;
  if (kind_ == Kind::torus) {
    const Vec p = periods();
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] -= p[i] * std::round(d[i] / p[i]);
  }
  return d;
}

double Domain::distance(const Vec& a, const Vec& b) const { return displacement(a, b).norm(); }

bool Domain::contains(const Vec& x) const {
  if (x.size() != bounds_.lo.size()) return false;
  if (!x.allFinite()) return false;
  return kind_ == Kind::torus || bounds_.contains(x);
}

std::string Domain::describe() const {
  std::ostringstream os;
  os << (kind_ == Kind::box ? "box" : "torus") << '[';
  for (Eigen::Index i = 0; i < bounds_.lo.size(); ++i) {
    if (i) os << " x ";
    os << bounds_.lo[i] << ',' << bounds_.hi[i];
  }
  os << ']';
  return os.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace chainlift
