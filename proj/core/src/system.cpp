#include "chainlift/system.hpp"

#include <algorithm>
#include <utility>

#include "chainlift/errors.hpp"

namespace chainlift {

LambdaFieldModel::LambdaFieldModel(int n, int m, FieldsFn fields, JacobianFn jacobian)
    : n_(n), m_(m), fields_(std::move(fields)), jacobian_(std::move(jacobian)) {
  if (n_ < 1 || m_ < 1) throw InputError("field model: dimensions must be positive");
}

ControlAffineSystem::ControlAffineSystem(std::string id, std::shared_ptr<const FieldModel> model,
                                         Domain domain, ControlRange range)
    : id_(std::move(id)), model_(std::move(model)), domain_(std::move(domain)), range_(std::move(range)) {
  if (!model_) throw InputError("system: null field model");
  if (domain_.dim() != model_->state_dim()) throw InputError("system: domain dimension mismatch");
  if (range_.dim() != model_->control_dim()) throw InputError("system: control range dimension mismatch");
}

ControlAffineSystem ControlAffineSystem::with_range(ControlRange range) const {
  return ControlAffineSystem(id_, model_, domain_, std::move(range));
}

void ControlAffineSystem::rhs(const Vec& x, const Vec& u, Mat& fields, Vec& out) const {
  model_->eval(x, fields);
  out = fields.col(0);
  out.noalias() += fields.rightCols(fields.cols() - 1) * u;
}

void ControlAffineSystem::rhs_jacobian(const Vec& x, const Vec& u, Mat& scratch, Mat& out) const {
  model_->jacobian(0, x, out);
  for (int i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    model_->jacobian(i + 1, x, scratch);
    out += u[i] * scratch;
  }
}

namespace {

void validate_point(const ControlAffineSystem& sys, const Vec& x, const Vec& u_val) {
  if (x.size() != sys.state_dim()) throw InputError("state has wrong dimension");
  if (u_val.size() != sys.control_dim()) throw InputError("control value has wrong dimension");
  if (!sys.domain().contains(x)) throw InputError("state outside the system domain");
  if (!sys.range().contains(u_val)) throw InputError("control value outside the control range");
}

}  // namespace

Vec eval_rhs(const ControlAffineSystem& sys, const Vec& x, const Vec& u_val) {
  validate_point(sys, x, u_val);
  Mat fields(sys.state_dim(), sys.control_dim() + 1);
  Vec out(sys.state_dim());
  sys.rhs(x, u_val, fields, out);
  return out;
}

Mat eval_rhs_jacobian(const ControlAffineSystem& sys, const Vec& x, const Vec& u_val) {
  validate_point(sys, x, u_val);
  const int n = sys.state_dim();
  Mat scratch(n, n), out(n, n);
  sys.rhs_jacobian(x, u_val, scratch, out);
  return out;
}

double jacobian_fd_error(const ControlAffineSystem& sys, const Vec& x, double h) {
  const int n = sys.state_dim();
  const int m = sys.control_dim();
  const FieldModel& model = sys.model();
  Mat fp(n, m + 1), fm(n, m + 1), jac(n, n);
  double worst = 0.0;
  for (int i = 0; i <= m; ++i) {
    model.jacobian(i, x, jac);
    Mat fd(n, n);
    for (int j = 0; j < n; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      model.eval(xp, fp);
      model.eval(xm, fm);
      fd.col(j) = (fp.col(i) - fm.col(i)) / (2.0 * h);
    }
    const double scale = std::max(1.0, jac.norm());
    worst = std::max(worst, (fd - jac).norm() / scale);
  }
  return worst;
}

}  // namespace chainlift
