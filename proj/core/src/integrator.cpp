#include "chainlift/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "chainlift/errors.hpp"

namespace chainlift {

Integrator::Integrator(const ControlAffineSystem& sys, IntegratorOptions opts) : sys_(&sys), opts_(opts) {
  if (!(opts_.step > 0.0) || !std::isfinite(opts_.step)) throw InputError("integration step must be positive");
  const int n = sys.state_dim();
  fields_.resize(n, sys.control_dim() + 1);
  jac_.resize(n, n);
  jac_scratch_.resize(n, n);
  for (Vec* v : {&k1_, &k2_, &k3_, &k4_, &tmp_}) v->resize(n);
}

void Integrator::stage(const Vec& x, const Vec& u, Vec& out) { sys_->rhs(x, u, fields_, out); }

template <class Observer>
void Integrator::run(Vec& x, Mat* tangent, const ControlFunction& u, double t0, double t1,
                     Observer&& observe) {
  if (t0 == t1) return;
  const bool forward = t1 > t0;
  std::vector<double> cuts = forward ? u.breakpoints_between(t0, t1) : u.breakpoints_between(t1, t0);
  if (!forward) std::reverse(cuts.begin(), cuts.end());
  cuts.push_back(t1);

  const bool guard = !sys_->domain().periodic();
  const Box& safety = sys_->domain().safety_box();
  if (tangent) {
    const auto r = tangent->rows(), c = tangent->cols();
    for (Mat* m : {&t1_, &t2_, &t3_, &t4_, &ttmp_}) m->resize(r, c);
  }

  double a = t0;
  for (double b : cuts) {
    const double span = b - a;
    const int n_sub = std::max(1, static_cast<int>(std::ceil(std::abs(span) / opts_.step - 1e-9)));
    const double h = span / n_sub;
    const Vec& uv = u(0.5 * (a + b));
    for (int s = 0; s < n_sub; ++s) {
      if (tangent) {
        Mat& T = *tangent;
        sys_->rhs_jacobian(x, uv, jac_scratch_, jac_);
        stage(x, uv, k1_);
        t1_.noalias() = jac_ * T;

        tmp_ = x + 0.5 * h * k1_;
        ttmp_ = T + 0.5 * h * t1_;
        sys_->rhs_jacobian(tmp_, uv, jac_scratch_, jac_);
        stage(tmp_, uv, k2_);
        t2_.noalias() = jac_ * ttmp_;

        tmp_ = x + 0.5 * h * k2_;
        ttmp_ = T + 0.5 * h * t2_;
        sys_->rhs_jacobian(tmp_, uv, jac_scratch_, jac_);
        stage(tmp_, uv, k3_);
        t3_.noalias() = jac_ * ttmp_;

        tmp_ = x + h * k3_;
        ttmp_ = T + h * t3_;
        sys_->rhs_jacobian(tmp_, uv, jac_scratch_, jac_);
        stage(tmp_, uv, k4_);
        t4_.noalias() = jac_ * ttmp_;

        T += (h / 6.0) * (t1_ + 2.0 * t2_ + 2.0 * t3_ + t4_);
      } else {
        stage(x, uv, k1_);
        tmp_ = x + 0.5 * h * k1_;
        stage(tmp_, uv, k2_);
        tmp_ = x + 0.5 * h * k2_;
        stage(tmp_, uv, k3_);
        tmp_ = x + h * k3_;
        stage(tmp_, uv, k4_);
      }
      x += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);

      const double t = (s + 1 == n_sub) ? b : a + (s + 1) * h;
      if (!x.allFinite() || (guard && !safety.contains(x))) throw EscapeError(t, x);
      if (!observe(t, x)) return;
    }
    a = b;
  }
}

Vec Integrator::flow(const Vec& x0, const ControlFunction& u, double t0, double t1) {
  Vec x = x0;
  run(x, nullptr, u, t0, t1, [](double, const Vec&) { return true; });
  return sys_->domain().wrap(x);
}

Trajectory Integrator::trajectory(const Vec& x0, const ControlFunction& u, double t0, double t1) {
  Trajectory tr;
  tr.control = u;
  tr.times.push_back(t0);
  tr.states.push_back(sys_->domain().wrap(x0));
  Vec x = x0;
  const Domain& dom = sys_->domain();
  run(x, nullptr, u, t0, t1, [&](double t, const Vec& s) {
    tr.times.push_back(t);
    tr.states.push_back(dom.wrap(s));
    return true;
  });
  return tr;
}

void Integrator::flow_tangent(Vec& x, Mat& tangent, const ControlFunction& u, double t0, double t1) {
  run(x, &tangent, u, t0, t1, [](double, const Vec&) { return true; });
  x = sys_->domain().wrap(x);
}

double Integrator::exit_time(const Vec& x0, const ControlFunction& u, double t0, double t1,
                             const Box& region) {
  const Domain& dom = sys_->domain();
  Vec prev = dom.wrap(x0);
  if (!region.contains(prev)) return t0;
  double t_prev = t0;
  Vec raw_prev = x0;
  Vec x = x0;
  double exit = t1;
  try {
    run(x, nullptr, u, t0, t1, [&](double t, const Vec& s) {
      // Wrapped endpoint of the chord that starts at the last wrapped node.
      tmp_ = prev + (s - raw_prev);
      bool inside = true;
      double frac = 1.0;
      for (int a = 0; a < s.size(); ++a) {
        const double p = prev[a], q = tmp_[a];
        double f = 2.0;
        if (q > region.hi[a]) f = (region.hi[a] - p) / (q - p);
        else if (q < region.lo[a]) f = (region.lo[a] - p) / (q - p);
        if (f <= 1.0) {
          inside = false;
          frac = std::min(frac, std::max(0.0, f));
        }
      }
      if (!inside) {
        exit = t_prev + frac * (t - t_prev);
        return false;
      }
      prev = dom.periodic() ? dom.wrap(tmp_) : tmp_;
      raw_prev = s;
      t_prev = t;
      return true;
    });
  } catch (const EscapeError& e) {
    exit = e.exit_time();
  }
  return exit;
}

void validate_integration_inputs(const ControlAffineSystem& sys, const Vec& x0, const ControlFunction& u,
                                 double step) {
  if (x0.size() != sys.state_dim()) throw InputError("initial state has wrong dimension");
  if (!sys.domain().contains(x0)) throw InputError("initial state outside the system domain");
  if (u.dim() != sys.control_dim()) throw InputError("control has wrong dimension");
  if (!u.within(sys.range())) throw InputError("control leaves the control range");
  if (!(step > 0.0) || !std::isfinite(step)) throw InputError("integration step must be positive");
}

Trajectory integrate(const ControlAffineSystem& sys, const Vec& x0, const ControlFunction& u, double t0,
                     double t1, double step) {
  validate_integration_inputs(sys, x0, u, step);
  Integrator integ(sys, {step});
  return integ.trajectory(x0, u, t0, t1);
}

Mat variational_flow(const ControlAffineSystem& sys, const Vec& x0, const ControlFunction& u, double t,
                     double step) {
  validate_integration_inputs(sys, x0, u, step);
  Integrator integ(sys, {step});
  Vec x = x0;
  Mat tangent = Mat::Identity(sys.state_dim(), sys.state_dim());
  integ.flow_tangent(x, tangent, u, 0.0, t);
  return tangent;
}

}  // namespace chainlift
