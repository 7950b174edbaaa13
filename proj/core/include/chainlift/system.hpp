#pragma once

#include <functional>
#include <memory>
#include <string>

#include "chainlift/control.hpp"
#include "chainlift/geometry.hpp"

namespace chainlift {

/// The vector fields f_0, ..., f_m of a control-affine system.
class FieldModel {
 public:
  virtual ~FieldModel() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;

  /// Column i of `fields` receives f_i(x); `fields` is n x (m + 1).
  virtual void eval(const Vec& x, Mat& fields) const = 0;
  /// Jacobian of f_i at x, n x n.
  virtual void jacobian(int i, const Vec& x, Mat& jac) const = 0;
};

/// FieldModel assembled from callables; handy for ad hoc systems in tests.
class LambdaFieldModel final : public FieldModel {
 public:
  using FieldsFn = std::function<void(const Vec&, Mat&)>;
  using JacobianFn = std::function<void(int, const Vec&, Mat&)>;

  LambdaFieldModel(int n, int m, FieldsFn fields, JacobianFn jacobian);

  int state_dim() const override { return n_; }
  int control_dim() const override { return m_; }
  void eval(const Vec& x, Mat& fields) const override { fields_(x, fields); }
  void jacobian(int i, const Vec& x, Mat& jac) const override { jacobian_(i, x, jac); }

 private:
  int n_;
  int m_;
  FieldsFn fields_;
  JacobianFn jacobian_;
};

/// x' = f_0(x) + sum_i u_i f_i(x) on a box or flat torus with a box control range.
class ControlAffineSystem {
 public:
  ControlAffineSystem(std::string id, std::shared_ptr<const FieldModel> model, Domain domain,
                      ControlRange range);

  const std::string& id() const { return id_; }
  int state_dim() const { return model_->state_dim(); }
  int control_dim() const { return model_->control_dim(); }
  const Domain& domain() const { return domain_; }
  const ControlRange& range() const { return range_; }
  const FieldModel& model() const { return *model_; }

  /// Same fields and domain, different control range.
  ControlAffineSystem with_range(ControlRange range) const;

  /// Unchecked right-hand side; `fields` is scratch space of shape n x (m + 1).
  void rhs(const Vec& x, const Vec& u, Mat& fields, Vec& out) const;
  /// Unchecked Jacobian of the right-hand side in x.
  void rhs_jacobian(const Vec& x, const Vec& u, Mat& scratch, Mat& out) const;

 private:
  std::string id_;
  std::shared_ptr<const FieldModel> model_;
  Domain domain_;
  ControlRange range_;
};

/// f_0(x) + sum_i u_i f_i(x) with domain and range validation.
Vec eval_rhs(const ControlAffineSystem& sys, const Vec& x, const Vec& u_val);

/// Jacobian of the right-hand side in x, with the same validation as eval_rhs.
Mat eval_rhs_jacobian(const ControlAffineSystem& sys, const Vec& x, const Vec& u_val);

/// Largest relative discrepancy between the analytic Jacobians of f_0..f_m
/// and central differences at `x`. Relative to max(1, |J|).
double jacobian_fd_error(const ControlAffineSystem& sys, const Vec& x, double h = 1e-6);

}  // namespace chainlift
