#include "chainlift/catalog.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "chainlift/errors.hpp"

namespace chainlift {

namespace {

Vec filled(int n, double v) { return Vec::Constant(n, v); }

class ScalarAffine final : public FieldModel {
 public:
  explicit ScalarAffine(double a) : a_(a) {}
  int state_dim() const override { return 1; }
  int control_dim() const override { return 1; }
  void eval(const Vec& x, Mat& f) const override {
    f(0, 0) = a_ * x[0];
    f(0, 1) = 1.0;
  }
  void jacobian(int i, const Vec&, Mat& j) const override { j(0, 0) = i == 0 ? a_ : 0.0; }

 private:
  double a_;
};

class Saddle2d final : public FieldModel {
 public:
  Saddle2d(double a, double b) : a_(a), b_(b) {}
  int state_dim() const override { return 2; }
  int control_dim() const override { return 2; }
  void eval(const Vec& x, Mat& f) const override {
    f << a_ * x[0], 1.0, 0.0,
        -b_ * x[1], 0.0, 1.0;
  }
  void jacobian(int i, const Vec&, Mat& j) const override {
    j.setZero();
    if (i == 0) {
      j(0, 0) = a_;
      j(1, 1) = -b_;
    }
  }

 private:
  double a_, b_;
};

class TorusShear final : public FieldModel {
 public:
  TorusShear(double a, double b, double k) : a_(a), b_(b), k_(k) {}
  int state_dim() const override { return 2; }
  int control_dim() const override { return 2; }
  void eval(const Vec& x, Mat& f) const override {
    const double sx = std::sin(x[0]);
    f << a_ * sx, 1.0, 0.0,
        -b_ * std::sin(x[1]) + k_ * sx, 0.0, 1.0;
  }
  void jacobian(int i, const Vec& x, Mat& j) const override {
    j.setZero();
    if (i == 0) {
      const double cx = std::cos(x[0]);
      j(0, 0) = a_ * cx;
      j(1, 0) = k_ * cx;
      j(1, 1) = -b_ * std::cos(x[1]);
    }
  }

 private:
  double a_, b_, k_;
};

// x' = c0 * x + c3 * x^3 + gain * u in one dimension.
class Polynomial1d final : public FieldModel {
 public:
  Polynomial1d(double c1, double c3, double gain) : c1_(c1), c3_(c3), gain_(gain) {}
  int state_dim() const override { return 1; }
  int control_dim() const override { return 1; }
  void eval(const Vec& x, Mat& f) const override {
    f(0, 0) = c1_ * x[0] + c3_ * x[0] * x[0] * x[0];
    f(0, 1) = gain_;
  }
  void jacobian(int i, const Vec& x, Mat& j) const override {
    j(0, 0) = i == 0 ? c1_ + 3.0 * c3_ * x[0] * x[0] : 0.0;
  }

 private:
  double c1_, c3_, gain_;
};

double param(const SystemSpec& spec, const std::map<std::string, double>& defaults, const char* key) {
  const auto it = spec.params.find(key);
  return it != spec.params.end() ? it->second : defaults.at(key);
}

}  // namespace

std::vector<std::string> catalog_ids() {
  return {"scalar_affine", "saddle2d", "torus_shear", "integrator", "zero_dynamics", "bistable_cubic"};
}

std::map<std::string, double> catalog_defaults(const std::string& id) {
  if (id == "scalar_affine") return {{"a", 1.0}};
  if (id == "saddle2d") return {{"a", 1.0}, {"b", 1.0}};
  if (id == "torus_shear") return {{"a", 1.0}, {"b", 1.0}, {"k", 0.5}};
  if (id == "integrator" || id == "zero_dynamics" || id == "bistable_cubic") return {};
  throw InputError("unknown system id '" + id + "'");
}

ControlAffineSystem make_system(const SystemSpec& spec) {
  const auto defaults = catalog_defaults(spec.id);
  for (const auto& [key, value] : spec.params) {
    if (!defaults.count(key)) throw InputError("system '" + spec.id + "' has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw InputError("system parameter '" + key + "' is not finite");
  }

  std::shared_ptr<const FieldModel> model;
  Box box;
  bool periodic = false;
  ControlRange range(filled(1, 0.0), filled(1, 1.0));

  if (spec.id == "scalar_affine") {
    model = std::make_shared<ScalarAffine>(param(spec, defaults, "a"));
    box = Box(filled(1, -2.0), filled(1, 2.0));
  } else if (spec.id == "saddle2d") {
    const double a = param(spec, defaults, "a"), b = param(spec, defaults, "b");
    if (!(a > 0.0 && b > 0.0)) throw InputError("saddle2d needs a > 0 and b > 0");
    model = std::make_shared<Saddle2d>(a, b);
    box = Box(filled(2, -2.0), filled(2, 2.0));
    range = ControlRange(filled(2, 0.0), filled(2, 1.0));
  } else if (spec.id == "torus_shear") {
    model = std::make_shared<TorusShear>(param(spec, defaults, "a"), param(spec, defaults, "b"),
                                         param(spec, defaults, "k"));
    box = Box(filled(2, -std::numbers::pi), filled(2, std::numbers::pi));
    periodic = true;
    range = ControlRange(filled(2, 0.0), filled(2, 0.5));
  } else if (spec.id == "integrator") {
    model = std::make_shared<Polynomial1d>(0.0, 0.0, 1.0);
    box = Box(filled(1, -2.0), filled(1, 2.0));
  } else if (spec.id == "zero_dynamics") {
    model = std::make_shared<Polynomial1d>(0.0, 0.0, 0.0);
    box = Box(filled(1, -2.0), filled(1, 2.0));
  } else {  // bistable_cubic
    model = std::make_shared<Polynomial1d>(1.0, -1.0, 1.0);
    box = Box(filled(1, -2.0), filled(1, 2.0));
    range = ControlRange(filled(1, 0.0), filled(1, 0.1));
  }

  if (spec.domain) box = *spec.domain;
  if (spec.range) range = *spec.range;
  Domain domain = periodic ? Domain::torus(box.lo, box.hi) : Domain::box(box.lo, box.hi);
  return ControlAffineSystem(spec.id, std::move(model), std::move(domain), std::move(range));
}

ControlAffineSystem scalar_affine(double a) { return make_system({"scalar_affine", {{"a", a}}, {}, {}}); }

ControlAffineSystem saddle2d(double a, double b) {
  return make_system({"saddle2d", {{"a", a}, {"b", b}}, {}, {}});
}

ControlAffineSystem torus_shear(double a, double b, double k) {
  return make_system({"torus_shear", {{"a", a}, {"b", b}, {"k", k}}, {}, {}});
}

}  // namespace chainlift
