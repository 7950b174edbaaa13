#pragma once

#include <vector>

#include "chainlift/control.hpp"
#include "chainlift/system.hpp"

namespace chainlift {

struct IntegratorOptions {
  double step = 1e-3;  // seconds
};

/// States sampled at every integrator node, control kept for replay.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  ControlFunction control;
};

/// Fixed-step classical RK4 whose substeps never straddle a control breakpoint.
///
/// Time runs from t0 to t1 with the control read at absolute times, so
/// flow(x, u, 0, t) is phi(t, x, u). For t1 < t0 the same scheme runs with a
/// negative step, which is RK4 applied to the negated field with the control
/// read in reverse. On box domains leaving the safety box raises EscapeError;
/// on tori states are wrapped on output only.
///
/// Methods are unchecked; the free functions below validate their inputs.
/// Instances own scratch space and are not meant to be shared across threads.
class Integrator {
 public:
  explicit Integrator(const ControlAffineSystem& sys, IntegratorOptions opts = {});

  const ControlAffineSystem& system() const { return *sys_; }
  const IntegratorOptions& options() const { return opts_; }

  Vec flow(const Vec& x0, const ControlFunction& u, double t0, double t1);

  Trajectory trajectory(const Vec& x0, const ControlFunction& u, double t0, double t1);

  /// Advances `x` together with the tangent vectors in the columns of `tangent`.
  void flow_tangent(Vec& x, Mat& tangent, const ControlFunction& u, double t0, double t1);

  /// Time at which the (wrapped) trajectory first leaves `region`; the crossing
  /// is located on the chord between the last inside node and the first outside
  /// node. Returns t1 if it never leaves. Escapes count as leaving.
  double exit_time(const Vec& x0, const ControlFunction& u, double t0, double t1, const Box& region);

 private:
  template <class Observer>
  void run(Vec& x, Mat* tangent, const ControlFunction& u, double t0, double t1, Observer&& observe);

  void stage(const Vec& x, const Vec& u, Vec& out);

  const ControlAffineSystem* sys_;
  IntegratorOptions opts_;
  Mat fields_, jac_, jac_scratch_;
  Vec k1_, k2_, k3_, k4_, tmp_;
  Mat t1_, t2_, t3_, t4_, ttmp_;
};

/// phi(., x0, u) on [t0, t1] (or [t1, t0] run backward).
Trajectory integrate(const ControlAffineSystem& sys, const Vec& x0, const ControlFunction& u, double t0,
                     double t1, double step);

/// d phi_{t,u}(x0) from the joint state/tangent system.
Mat variational_flow(const ControlAffineSystem& sys, const Vec& x0, const ControlFunction& u, double t,
                     double step);

/// Throws InputError unless x0 lies in the domain, u in the range and step > 0.
void validate_integration_inputs(const ControlAffineSystem& sys, const Vec& x0, const ControlFunction& u,
                                 double step);

}  // namespace chainlift
