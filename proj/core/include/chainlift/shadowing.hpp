#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "chainlift/control.hpp"
#include "chainlift/geometry.hpp"
#include "chainlift/integrator.hpp"
#include "chainlift/system.hpp"

namespace chainlift {

/// Time-1 map of the skew product: (k, y) -> phi(1, y, b_k) for the base
/// sequence b_k = shift(b_0, k).
class SkewProductMap {
 public:
  virtual ~SkewProductMap() = default;

  virtual int dim() const = 0;
  virtual Vec apply(const ControlFunction& b, const Vec& y) = 0;
  virtual Vec apply_with_jacobian(const ControlFunction& b, const Vec& y, Mat& jac) = 0;
  /// to - from, taking the minimal image on tori.
  virtual Vec displacement(const Vec& from, const Vec& to) const { return to - from; }
  virtual Vec wrap(const Vec& y) const { return y; }
  double distance(const Vec& a, const Vec& b) const { return displacement(a, b).norm(); }
};

/// Time-1 map of a control-affine system, integrated with RK4.
class FlowMap : public SkewProductMap {
 public:
  FlowMap(const ControlAffineSystem& sys, double step);

  int dim() const override { return integ_.system().state_dim(); }
  Vec apply(const ControlFunction& b, const Vec& y) override;
  Vec apply_with_jacobian(const ControlFunction& b, const Vec& y, Mat& jac) override;
  Vec displacement(const Vec& from, const Vec& to) const override;
  Vec wrap(const Vec& y) const override;

 private:
  Integrator integ_;
};

/// y -> A y + c, independent of the base; a discrete model for tests.
class AffineMap : public SkewProductMap {
 public:
  AffineMap(Mat A, Vec c);

  int dim() const override { return static_cast<int>(c_.size()); }
  Vec apply(const ControlFunction&, const Vec& y) override { return A_ * y + c_; }
  Vec apply_with_jacobian(const ControlFunction&, const Vec& y, Mat& jac) override {
    jac = A_;
    return A_ * y + c_;
  }

 private:
  Mat A_;
  Vec c_;
};

/// States x_k and base points b_k for k = -K..K, stored at index k + K.
struct PseudoOrbit {
  int K = 0;
  std::vector<ControlFunction> controls;
  std::vector<Vec> states;
  double alpha = 0.0;  // max_k d(phi(1, x_k, b_k), x_{k+1})

  const Vec& state(int k) const { return states[static_cast<std::size_t>(k + K)]; }
  const ControlFunction& control(int k) const { return controls[static_cast<std::size_t>(k + K)]; }
};

/// Checks base coherence (b_{k+1} == shift(b_k, 1) exactly); throws InputError otherwise.
void check_base_coherence(const PseudoOrbit& pseudo);

/// Recomputed max jump of the sequence under `map`.
double max_jump(SkewProductMap& map, const PseudoOrbit& pseudo);

/// Builds a pseudo-orbit over b_k = shift(b0, k) and fills in alpha.
PseudoOrbit make_pseudo_orbit(SkewProductMap& map, const ControlFunction& b0, std::vector<Vec> states);

/// Exact orbit pieces x_{k+1} = phi(1, x_k, b_k) from x_0 in both directions.
PseudoOrbit orbit_through(SkewProductMap& map, const ControlFunction& b0, const Vec& x0, int K);

/// True iff every jump is < alpha. Throws InputError for an incoherent base or K < 1.
bool is_pseudo_orbit(SkewProductMap& map, const PseudoOrbit& candidate, double alpha);

/// Fingerprint of the states and base of a pseudo-orbit.
std::uint64_t pseudo_orbit_fingerprint(const PseudoOrbit& pseudo);

enum class SplittingSource {
  orbit_qr,   // QR filtrations of the step Jacobians along the current iterate
  fixed,      // one projection for the whole window
  per_point,  // estimate_splitting at every iterate point (FlowMap only)
};

struct ShadowOptions {
  double orbit_tol = 1e-10;
  int max_iters = 30;
  SplittingSource source = SplittingSource::orbit_qr;
  Mat fixed_P;                               // projection onto E- along E+, for `fixed`
  int qr_padding = 20;                       // frozen end Jacobians prepended/appended to the filtrations
  double gap_tol = 1e-3;                     // per-step log growth below this is neutral
  std::optional<std::vector<Vec>> initial_guess;  // defaults to the pseudo-orbit itself
  const ControlAffineSystem* system = nullptr;    // required for per_point
  double splitting_window = 10.0;                 // per_point filtration length
  double window_flag_level = 1e-6;  // flag when exp(-lambda K) exceeds this
};

struct ShadowResult {
  Vec y0;
  std::vector<Vec> orbit;  // y_k at index k + K
  double beta = 0.0;       // max_k d(y_k, x_k)
  double residual = 0.0;   // max_k d(phi(1, y_k, b_k), y_{k+1})
  int newton_iters = 0;
  std::vector<double> defect_trace;
  double lambda_min = 0.0;       // smallest per-step |log growth| seen by the splitting
  bool window_flagged = false;   // exp(-lambda_min K) above the flag level
  int unstable_dim = 0;
  std::uint64_t pseudo_fingerprint = 0;
};

/// Newton on F_k(y) = phi(1, y_k, b_k) - y_{k+1} with the stable part of
/// y_{-K} - x_{-K} and the unstable part of y_K - x_K held at zero. Each
/// linear step is solved by forward substitution on the stable block and
/// backward substitution on the unstable block in splitting coordinates,
/// with block Gauss-Seidel refinement of the coupling terms.
ShadowResult shadow(SkewProductMap& map, const PseudoOrbit& pseudo, const ShadowOptions& opts = {});

/// True iff both results shadow `pseudo` and agree to merge_tol at every index.
/// Throws InputError when a result belongs to another pseudo-orbit or has beta >= beta0.
bool uniqueness_check(const PseudoOrbit& pseudo, const ShadowResult& a, const ShadowResult& b, double beta0,
                      double merge_tol = 1e-8);

}  // namespace chainlift
