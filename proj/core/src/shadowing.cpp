#include "chainlift/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "chainlift/errors.hpp"
#include "chainlift/hyperbolicity.hpp"

namespace chainlift {

FlowMap::FlowMap(const ControlAffineSystem& sys, double step) : integ_(sys, {step}) {}

Vec FlowMap::apply(const ControlFunction& b, const Vec& y) { return integ_.flow(y, b, 0.0, 1.0); }

Vec FlowMap::apply_with_jacobian(const ControlFunction& b, const Vec& y, Mat& jac) {
  const int n = dim();
  jac.setIdentity(n, n);
  Vec x = y;
  integ_.flow_tangent(x, jac, b, 0.0, 1.0);
  return x;
}

Vec FlowMap::displacement(const Vec& from, const Vec& to) const {
  return integ_.system().domain().displacement(from, to);
}

Vec FlowMap::wrap(const Vec& y) const { return integ_.system().domain().wrap(y); }

AffineMap::AffineMap(Mat A, Vec c) : A_(std::move(A)), c_(std::move(c)) {
  if (A_.rows() != A_.cols() || A_.rows() != c_.size() || c_.size() == 0) {
    throw InputError("affine map: A must be square and match c");
  }
}

void check_base_coherence(const PseudoOrbit& pseudo) {
  const std::size_t n = static_cast<std::size_t>(2 * pseudo.K + 1);
  if (pseudo.K < 1) throw InputError("pseudo-orbit: window K must be >= 1");
  if (pseudo.states.size() != n || pseudo.controls.size() != n) {
    throw InputError("pseudo-orbit: need 2K + 1 states and base points");
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(shift(pseudo.controls[i], 1.0) == pseudo.controls[i + 1])) {
      throw InputError("pseudo-orbit: base points are not consecutive unit shifts");
    }
  }
}

double max_jump(SkewProductMap& map, const PseudoOrbit& pseudo) {
  double alpha = 0.0;
  for (std::size_t i = 0; i + 1 < pseudo.states.size(); ++i) {
    const Vec img = map.apply(pseudo.controls[i], pseudo.states[i]);
    alpha = std::max(alpha, map.distance(pseudo.states[i + 1], img));
  }
  return alpha;
}

PseudoOrbit make_pseudo_orbit(SkewProductMap& map, const ControlFunction& b0, std::vector<Vec> states) {
  if (states.size() < 3 || states.size() % 2 == 0) throw InputError("pseudo-orbit: need 2K + 1 states, K >= 1");
  PseudoOrbit p;
  p.K = static_cast<int>(states.size() / 2);
  for (int k = -p.K; k <= p.K; ++k) p.controls.push_back(shift(b0, k));
  p.states = std::move(states);
  for (const Vec& s : p.states) {
    if (s.size() != map.dim()) throw InputError("pseudo-orbit: state has wrong dimension");
  }
  p.alpha = max_jump(map, p);
  return p;
}

PseudoOrbit orbit_through(SkewProductMap& map, const ControlFunction& b0, const Vec& x0, int K) {
  if (K < 1) throw InputError("orbit_through: K must be >= 1");
  std::vector<Vec> states(static_cast<std::size_t>(2 * K + 1));
  states[static_cast<std::size_t>(K)] = x0;
  for (int k = 0; k < K; ++k) {
    const auto i = static_cast<std::size_t>(K + k);
    states[i + 1] = map.wrap(map.apply(shift(b0, k), states[i]));
  }
  // Backward pieces come from inverting the time-1 map by Newton on the forward map.
  for (int k = 0; k > -K; --k) {
    const auto i = static_cast<std::size_t>(K + k);
    const ControlFunction b = shift(b0, k - 1);
    Vec z = states[i];
    Mat jac;
    for (int it = 0; it < 50; ++it) {
      const Vec r = map.displacement(states[i], map.apply_with_jacobian(b, z, jac));
      if (r.norm() <= 1e-15 * std::max(1.0, z.norm())) break;
      z -= jac.partialPivLu().solve(r);
    }
    states[i - 1] = map.wrap(z);
  }
  return make_pseudo_orbit(map, b0, std::move(states));
}

bool is_pseudo_orbit(SkewProductMap& map, const PseudoOrbit& candidate, double alpha) {
  check_base_coherence(candidate);
  for (std::size_t i = 0; i + 1 < candidate.states.size(); ++i) {
    const Vec img = map.apply(candidate.controls[i], candidate.states[i]);
    if (!(map.distance(candidate.states[i + 1], img) < alpha)) return false;
  }
  return true;
}

std::uint64_t pseudo_orbit_fingerprint(const PseudoOrbit& pseudo) {
  std::string bytes;
  auto put = [&](double d) {
    char buf[sizeof(double)];
    std::memcpy(buf, &d, sizeof(double));
    bytes.append(buf, sizeof(double));
  };
  put(static_cast<double>(pseudo.K));
  for (const Vec& s : pseudo.states) {
    for (Eigen::Index i = 0; i < s.size(); ++i) put(s[i]);
  }
  for (const ControlFunction& c : pseudo.controls) {
    put(c.offset());
    for (double b : c.breakpoints()) put(b);
    for (const Vec& v : c.values()) {
      for (Eigen::Index i = 0; i < v.size(); ++i) put(v[i]);
    }
  }
  return fnv1a(bytes);
}

namespace {

// Splitting bases at every window point plus the smallest |per-step exponent|.
struct WindowSplitting {
  std::vector<Mat> E_plus, E_minus;
  int k_plus = 0;
  double lambda_min = 0.0;
};

std::vector<double> forward_filtration(const std::vector<Mat>& A, int padding, std::vector<Mat>* frames) {
  const std::size_t steps = A.size();
  const int n = static_cast<int>(A.front().rows());
  Mat frame = generic_frame(n);
  std::vector<double> scratch(static_cast<std::size_t>(n), 0.0), log_r(static_cast<std::size_t>(n), 0.0);
  for (int p = 0; p < padding; ++p) {
    frame = A.front() * frame;
    orthonormalize(frame, scratch);
  }
  if (frames) frames->push_back(frame);
  for (std::size_t i = 0; i < steps; ++i) {
    frame = A[i] * frame;
    orthonormalize(frame, log_r);
    if (frames) frames->push_back(frame);
  }
  for (double& l : log_r) l /= static_cast<double>(steps);
  return log_r;
}

std::vector<Mat> backward_frames(const std::vector<Mat>& A, int padding) {
  const std::size_t steps = A.size();
  const int n = static_cast<int>(A.front().rows());
  std::vector<Eigen::PartialPivLU<Mat>> inv;
  inv.reserve(steps);
  for (const Mat& a : A) inv.emplace_back(a);
  Mat frame = generic_frame(n);
  std::vector<double> scratch(static_cast<std::size_t>(n), 0.0);
  for (int p = 0; p < padding; ++p) {
    frame = inv.back().solve(frame);
    orthonormalize(frame, scratch);
  }
  std::vector<Mat> frames(steps + 1);
  frames[steps] = frame;
  for (std::size_t i = steps; i-- > 0;) {
    frame = inv[i].solve(frame);
    orthonormalize(frame, scratch);
    frames[i] = frame;
  }
  return frames;
}

Mat range_basis(const Mat& P) {
  Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeFullU);
  int rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > 0.5) ++rank;
  return svd.matrixU().leftCols(rank);
}

WindowSplitting window_splitting(const std::vector<Mat>& A, const std::vector<Vec>& y, const PseudoOrbit& pseudo,
                                 const ShadowOptions& opts, SkewProductMap& map) {
  const int n = static_cast<int>(A.front().rows());
  const std::size_t points = A.size() + 1;
  WindowSplitting ws;
  std::vector<Mat> fwd_frames;
  const bool need_frames = opts.source == SplittingSource::orbit_qr;
  std::vector<double> exps = forward_filtration(A, opts.qr_padding, need_frames ? &fwd_frames : nullptr);
  ws.lambda_min = std::numeric_limits<double>::infinity();
  for (double l : exps) ws.lambda_min = std::min(ws.lambda_min, std::abs(l));

  switch (opts.source) {
    case SplittingSource::orbit_qr: {
      for (double l : exps) {
        if (std::abs(l) < opts.gap_tol) throw CenterDirectionError("shadow: neutral direction along the window", exps);
      }
      while (ws.k_plus < n && exps[static_cast<std::size_t>(ws.k_plus)] > 0.0) ++ws.k_plus;
      const std::vector<Mat> bwd = backward_frames(A, opts.qr_padding);
      for (std::size_t i = 0; i < points; ++i) {
        ws.E_plus.push_back(fwd_frames[i].leftCols(ws.k_plus));
        ws.E_minus.push_back(bwd[i].leftCols(n - ws.k_plus));
      }
      break;
    }
    case SplittingSource::fixed: {
      if (opts.fixed_P.rows() != n || opts.fixed_P.cols() != n) throw InputError("shadow: fixed_P has wrong shape");
      const Mat Em = range_basis(opts.fixed_P);
      const Mat Ep = range_basis(Mat::Identity(n, n) - opts.fixed_P);
      if (Em.cols() + Ep.cols() != n) throw InputError("shadow: fixed_P is not a projection");
      ws.k_plus = static_cast<int>(Ep.cols());
      ws.E_plus.assign(points, Ep);
      ws.E_minus.assign(points, Em);
      break;
    }
    case SplittingSource::per_point: {
      if (!opts.system) throw InputError("shadow: per-point splittings need the system");
      SplittingOptions so;
      so.window_T = opts.splitting_window;
      so.step = 1e-2;
      ws.lambda_min = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < points; ++i) {
        const HyperbolicSplitting sp =
            estimate_splitting(*opts.system, pseudo.controls[i], map.wrap(y[i]), so);
        if (i == 0) ws.k_plus = static_cast<int>(sp.E_plus.cols());
        if (sp.E_plus.cols() != ws.k_plus) throw NumericalError("shadow: splitting dimension changes along the window");
        ws.E_plus.push_back(sp.E_plus);
        ws.E_minus.push_back(sp.E_minus);
        for (double l : sp.forward_exponents) ws.lambda_min = std::min(ws.lambda_min, std::abs(l));
      }
      break;
    }
  }
  return ws;
}

}  // namespace

ShadowResult shadow(SkewProductMap& map, const PseudoOrbit& pseudo, const ShadowOptions& opts) {
  check_base_coherence(pseudo);
  const int n = map.dim();
  const std::size_t points = pseudo.states.size();
  const std::size_t steps = points - 1;
  for (const Vec& s : pseudo.states) {
    if (s.size() != n) throw InputError("shadow: state has wrong dimension");
  }
  if (!(opts.orbit_tol > 0.0) || opts.max_iters < 1) throw InputError("shadow: orbit_tol and max_iters must be positive");

  std::vector<Vec> y = opts.initial_guess ? *opts.initial_guess : pseudo.states;
  if (y.size() != points) throw InputError("shadow: initial guess has the wrong length");

  ShadowResult res;
  res.pseudo_fingerprint = pseudo_orbit_fingerprint(pseudo);
  std::vector<Mat> A(steps, Mat(n, n));
  std::vector<Vec> F(steps);
  std::vector<Vec> a(points), c(points);
  std::vector<Mat> Binv(points), B(points);
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  WindowSplitting ws;

  for (int iter = 0;; ++iter) {
    double residual = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      const Vec img = map.apply_with_jacobian(pseudo.controls[i], y[i], A[i]);
      F[i] = map.displacement(y[i + 1], img);
      residual = std::max(residual, F[i].norm());
    }
    res.defect_trace.push_back(residual);
    if (!std::isfinite(residual)) throw NoConvergenceError("shadow: defect is not finite", res.defect_trace);
    ws = window_splitting(A, y, pseudo, opts, map);
    if (residual <= opts.orbit_tol) {
      res.residual = residual;
      res.newton_iters = iter;
      break;
    }
    if (residual < 0.5 * best) {
      best = residual;
      since_best = 0;
    } else if (++since_best >= 6) {
      throw NoConvergenceError("shadow: Newton stagnated", res.defect_trace);
    }
    if (iter >= opts.max_iters) throw NoConvergenceError("shadow: iteration limit reached", res.defect_trace);

    const int kp = ws.k_plus, km = n - kp;
    for (std::size_t i = 0; i < points; ++i) {
      B[i].resize(n, n);
      B[i] << ws.E_plus[i], ws.E_minus[i];
      Eigen::FullPivLU<Mat> lu(B[i]);
      if (!lu.isInvertible()) throw NumericalError("shadow: E+ and E- are not complementary");
      Binv[i] = lu.inverse();
    }
    // M_i = Binv_{i+1} A_i B_i split into unstable (first kp) and stable blocks.
    std::vector<Mat> M(steps);
    std::vector<Vec> f(steps);
    std::vector<Eigen::PartialPivLU<Mat>> Muu_lu(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      M[i] = Binv[i + 1] * A[i] * B[i];
      f[i] = Binv[i + 1] * F[i];
      if (kp > 0) Muu_lu[i].compute(M[i].topLeftCorner(kp, kp));
    }
    const Vec left = Binv.front() * map.displacement(pseudo.states.front(), y.front());
    const Vec right = Binv.back() * map.displacement(pseudo.states.back(), y.back());
    for (std::size_t i = 0; i < points; ++i) {
      a[i] = Vec::Zero(kp);
      c[i] = Vec::Zero(km);
    }
    if (kp > 0) a.back() = -right.head(kp);
    if (km > 0) c.front() = -left.tail(km);
    for (int sweep = 0; sweep < 100; ++sweep) {
      for (std::size_t i = 0; i < steps && km > 0; ++i) {
        c[i + 1] = M[i].bottomRightCorner(km, km) * c[i] + f[i].tail(km);
        if (kp > 0) c[i + 1] += M[i].bottomLeftCorner(km, kp) * a[i];
      }
      double change = 0.0, scale = 1e-300;
      for (std::size_t i = steps; i-- > 0 && kp > 0;) {
        Vec rhs = a[i + 1] - f[i].head(kp);
        if (km > 0) rhs -= M[i].topRightCorner(kp, km) * c[i];
        const Vec next = Muu_lu[i].solve(rhs);
        change = std::max(change, (next - a[i]).norm());
        scale = std::max(scale, next.norm());
        a[i] = next;
      }
      if (kp == 0 || km == 0 || change <= 1e-15 * scale) break;
    }
    for (std::size_t i = 0; i < points; ++i) {
      Vec z(n);
      z << a[i], c[i];
      y[i] = map.wrap(y[i] + B[i] * z);
    }
  }

  res.unstable_dim = ws.k_plus;
  res.lambda_min = ws.lambda_min;
  res.window_flagged = std::exp(-ws.lambda_min * pseudo.K) > opts.window_flag_level;
  res.orbit = y;
  res.y0 = y[static_cast<std::size_t>(pseudo.K)];
  for (std::size_t i = 0; i < points; ++i) res.beta = std::max(res.beta, map.distance(pseudo.states[i], y[i]));
  return res;
}

bool uniqueness_check(const PseudoOrbit& pseudo, const ShadowResult& a, const ShadowResult& b, double beta0,
                      double merge_tol) {
  const std::uint64_t fp = pseudo_orbit_fingerprint(pseudo);
  if (a.pseudo_fingerprint != fp || b.pseudo_fingerprint != fp) {
    throw InputError("uniqueness_check: results shadow a different pseudo-orbit");
  }
  if (!(a.beta < beta0) || !(b.beta < beta0)) throw InputError("uniqueness_check: beta must be below beta0");
  if (a.orbit.size() != b.orbit.size()) throw InputError("uniqueness_check: orbit lengths differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.orbit.size(); ++i) worst = std::max(worst, (a.orbit[i] - b.orbit[i]).norm());
  return worst <= merge_tol;
}

}  // namespace chainlift
