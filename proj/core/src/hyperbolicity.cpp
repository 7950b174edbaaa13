#include "chainlift/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "chainlift/errors.hpp"

namespace chainlift {

namespace {

struct Filtration {
  Mat frame;
  std::vector<double> log_r;
  std::vector<GrowthSample> growth;
  // Accumulated log_r and elapsed time after the first half, when the frame
  // has settled; exponents are measured from there to damp the start-up transient.
  std::vector<double> log_r_half;
  double t_half = 0.0;

  std::vector<double> exponents() const {
    std::vector<double> out;
    const double span = growth_span;
    for (std::size_t i = 0; i < log_r.size(); ++i) out.push_back((log_r[i] - log_r_half[i]) / span);
    return out;
  }
  double growth_span = 0.0;
};

Filtration run_filtration(Integrator& integ, const ControlFunction& u, Vec x, Mat frame, double t0, double t1,
                          double reortho, bool record) {
  Filtration out;
  out.log_r.assign(static_cast<std::size_t>(frame.cols()), 0.0);
  out.log_r_half = out.log_r;
  const int n_seg = std::max(2, static_cast<int>(std::ceil(std::abs(t1 - t0) / reortho - 1e-9)));
  double t = t0;
  for (int s = 1; s <= n_seg; ++s) {
    const double tn = s == n_seg ? t1 : t0 + s * (t1 - t0) / n_seg;
    integ.flow_tangent(x, frame, u, t, tn);
    orthonormalize(frame, out.log_r);
    if (record) out.growth.push_back({std::abs(tn - t0), out.log_r});
    if (s == n_seg / 2) {
      out.log_r_half = out.log_r;
      out.t_half = std::abs(tn - t0);
    }
    t = tn;
  }
  out.growth_span = std::abs(t1 - t0) - out.t_half;
  out.frame = std::move(frame);
  return out;
}

}  // namespace

Mat generic_frame(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = (i == j ? 1.0 : 0.0) + 0.25 * std::sin(1.0 + 3.0 * i + 7.0 * j);
  }
  std::vector<double> unused(static_cast<std::size_t>(n), 0.0);
  orthonormalize(m, unused);
  return m;
}

void orthonormalize(Mat& Q, std::vector<double>& log_r) {
  const Eigen::Index n = Q.rows(), k = Q.cols();
  if (k == 0) return;
  Eigen::HouseholderQR<Mat> qr(Q);
  Mat thin = qr.householderQ() * Mat::Identity(n, k);
  const auto& r = qr.matrixQR();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) thin.col(i) = -thin.col(i);
    log_r[static_cast<std::size_t>(i)] += std::log(std::abs(r(i, i)));
  }
  Q = std::move(thin);
}

double principal_angle(const Mat& A, const Mat& B) {
  if (A.cols() == 0 && B.cols() == 0) return 0.0;
  if (A.cols() != B.cols()) return M_PI / 2;
  Mat qa = A, qb = B;
  std::vector<double> la(static_cast<std::size_t>(A.cols()), 0.0), lb(la);
  orthonormalize(qa, la);
  orthonormalize(qb, lb);
  const Mat residual = qa - qb * (qb.transpose() * qa);
  const double s = Eigen::JacobiSVD<Mat>(residual).singularValues()(0);
  return std::asin(std::min(1.0, s));
}

Mat projection_from_bases(const Mat& E_plus, const Mat& E_minus) {
  const Eigen::Index n = E_plus.rows() > 0 ? E_plus.rows() : E_minus.rows();
  if (E_plus.cols() + E_minus.cols() != n) throw InputError("projection: bases do not span the state space");
  if (E_minus.cols() == 0) return Mat::Zero(n, n);
  if (E_plus.cols() == 0) return Mat::Identity(n, n);
  Mat B(n, n);
  B << E_plus, E_minus;
  Eigen::FullPivLU<Mat> lu(B);
  if (!lu.isInvertible()) throw NumericalError("projection: E+ and E- are not complementary");
  Mat D = Mat::Zero(n, n);
  for (Eigen::Index i = E_plus.cols(); i < n; ++i) D(i, i) = 1.0;
  return B * D * lu.inverse();
}

HyperbolicSplitting estimate_splitting(const ControlAffineSystem& sys, const ControlFunction& u, const Vec& x,
                                       const SplittingOptions& opts) {
  validate_integration_inputs(sys, x, u, opts.step);
  if (!(opts.window_T > 0.0) || !(opts.gap_tol > 0.0) || !(opts.reortho > 0.0)) {
    throw InputError("splitting: window_T, gap_tol and reortho must be positive");
  }
  const int n = sys.state_dim();
  const double T = opts.window_T;
  Integrator integ(sys, {opts.step});

  const Vec past = integ.flow(x, u, 0.0, -T);
  Filtration fwd = run_filtration(integ, u, past, generic_frame(n), -T, 0.0, opts.reortho, true);
  const Vec future = integ.flow(x, u, 0.0, T);
  Filtration bwd = run_filtration(integ, u, future, generic_frame(n), T, 0.0, opts.reortho, false);

  HyperbolicSplitting sp;
  sp.u = u;
  sp.x = x;
  sp.forward_growth = std::move(fwd.growth);
  sp.forward_exponents = fwd.exponents();
  sp.backward_exponents = bwd.exponents();

  std::vector<double> all = sp.forward_exponents;
  all.insert(all.end(), sp.backward_exponents.begin(), sp.backward_exponents.end());
  for (double l : sp.forward_exponents) {
    if (std::abs(l) < opts.gap_tol) {
      throw CenterDirectionError("no exponent gap: a finite-time exponent is within gap_tol of zero", all);
    }
  }
  int k_plus = 0;
  while (k_plus < n && sp.forward_exponents[static_cast<std::size_t>(k_plus)] > 0.0) ++k_plus;
  for (int i = k_plus; i < n; ++i) {
    if (sp.forward_exponents[static_cast<std::size_t>(i)] > 0.0) {
      throw NumericalError("splitting: forward filtration did not order the exponents");
    }
  }
  const int k_minus = n - k_plus;
  for (int i = 0; i < k_minus; ++i) {
    if (sp.backward_exponents[static_cast<std::size_t>(i)] < opts.gap_tol) {
      throw CenterDirectionError("no exponent gap: backward filtration finds a neutral direction", all);
    }
  }
  std::sort(sp.forward_exponents.begin(), sp.forward_exponents.end(), std::greater<>());
  std::sort(sp.backward_exponents.begin(), sp.backward_exponents.end(), std::greater<>());

  sp.E_plus = fwd.frame.leftCols(k_plus);
  sp.E_minus = bwd.frame.leftCols(k_minus);
  sp.P = projection_from_bases(sp.E_plus, sp.E_minus);

  // Rates are checked on the first half of the window only: the leftover error
  // in E- is of order exp(-T) and the expanding part would amplify it over T.
  std::vector<double> ts;
  for (int k = 1; k <= 8; ++k) ts.push_back(k * T / 16.0);
  const RateFit fit = verify_rates(sp, sys, ts, 8, opts.step);
  sp.c_est = fit.c_est;
  sp.lambda_est = fit.lambda_est;
  sp.C_est = 1.0 / sp.c_est;
  sp.mu_est = std::exp(-sp.lambda_est);
  return sp;
}

RateFit verify_rates(const HyperbolicSplitting& splitting, const ControlAffineSystem& sys,
                     const std::vector<double>& t_samples, int vec_samples, double step) {
  if (t_samples.empty() || vec_samples < 1) throw InputError("verify_rates: need samples");
  std::vector<double> ts = t_samples;
  std::sort(ts.begin(), ts.end());
  if (ts.front() <= 0.0) throw InputError("verify_rates: sample times must be positive");

  auto unit_vectors = [&](const Mat& basis) {
    const Eigen::Index k = basis.cols();
    Mat out(basis.rows(), k == 0 ? 0 : vec_samples);
    for (int j = 0; j < out.cols(); ++j) {
      Vec c(k);
      if (j < k) {
        c = Vec::Unit(k, j);
      } else {
        for (Eigen::Index i = 0; i < k; ++i) c[i] = std::sin(1.0 + 2.3 * (i + 1) * (j + 1));
        if (c.norm() < 1e-3) c = Vec::Unit(k, 0);
      }
      out.col(j) = basis * c.normalized();
    }
    return out;
  };
  const Mat vp = unit_vectors(splitting.E_plus), vm = unit_vectors(splitting.E_minus);
  const Eigen::Index np = vp.cols(), nm = vm.cols();
  Mat tangent(sys.state_dim(), np + nm);
  tangent << vp, vm;

  Integrator integ(sys, {step});
  Vec x = splitting.x;
  std::vector<std::vector<double>> plus(ts.size()), minus(ts.size());
  double t = 0.0;
  for (std::size_t s = 0; s < ts.size(); ++s) {
    integ.flow_tangent(x, tangent, splitting.u, t, ts[s]);
    t = ts[s];
    for (Eigen::Index j = 0; j < np; ++j) plus[s].push_back(tangent.col(j).norm());
    for (Eigen::Index j = 0; j < nm; ++j) minus[s].push_back(tangent.col(np + j).norm());
  }

  RateFit fit;
  const double t_max = ts.back();
  double lambda = std::numeric_limits<double>::infinity();
  for (double g : plus.back()) lambda = std::min(lambda, std::log(g) / t_max);
  for (double g : minus.back()) lambda = std::min(lambda, -std::log(g) / t_max);
  if (!std::isfinite(lambda)) lambda = 0.0;
  fit.lambda_est = lambda;

  double c = 1.0;
  for (std::size_t s = 0; s < ts.size(); ++s) {
    const double e = std::exp(lambda * ts[s]);
    for (double g : plus[s]) c = std::min(c, g / e);
    for (double g : minus[s]) c = std::min(c, 1.0 / (g * e));
  }
  fit.c_est = c;
  for (std::size_t s = 0; s < ts.size(); ++s) {
    const double e = std::exp(lambda * ts[s]);
    for (double g : plus[s]) {
      if (g < c * e * (1.0 - 1e-9)) fit.violations.push_back({ts[s], true, g, c * e});
    }
    for (double g : minus[s]) {
      if (g > (1.0 + 1e-9) / (c * e)) fit.violations.push_back({ts[s], false, g, 1.0 / (c * e)});
    }
  }
  return fit;
}

double projection_commutation(const HyperbolicSplitting& at_x, const HyperbolicSplitting& at_image,
                              const ControlAffineSystem& sys, double step) {
  const Mat D = variational_flow(sys, at_x.x, at_x.u, 1.0, step);
  const Mat residual = at_image.P * D - D * at_x.P;
  return Eigen::JacobiSVD<Mat>(residual).singularValues()(0);
}

double unstable_log_determinant(const ControlAffineSystem& sys, const ControlFunction& u, const Vec& x,
                                const Mat& E_plus, double tau, double step, Mat* image_basis, double reortho) {
  validate_integration_inputs(sys, x, u, step);
  if (E_plus.rows() != sys.state_dim()) throw InputError("log determinant: basis has wrong dimension");
  if (tau < 0.0) throw InputError("log determinant: tau must be nonnegative");
  Mat frame = E_plus;
  std::vector<double> log_r(static_cast<std::size_t>(frame.cols()), 0.0);
  // Normalise the supplied basis without counting its own volume.
  orthonormalize(frame, log_r);
  std::fill(log_r.begin(), log_r.end(), 0.0);
  if (tau > 0.0 && frame.cols() > 0) {
    Integrator integ(sys, {step});
    Filtration f = run_filtration(integ, u, x, frame, 0.0, tau, reortho, false);
    frame = std::move(f.frame);
    log_r = std::move(f.log_r);
  }
  if (image_basis) *image_basis = frame;
  double total = 0.0;
  for (double l : log_r) total += l;
  return total;
}

}  // namespace chainlift
