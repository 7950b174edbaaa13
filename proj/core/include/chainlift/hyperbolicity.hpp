#pragma once

#include <vector>

#include "chainlift/control.hpp"
#include "chainlift/integrator.hpp"
#include "chainlift/system.hpp"

namespace chainlift {

struct SplittingOptions {
  double window_T = 12.0;  // filtration length on each side (s)
  double step = 1e-2;      // integrator step (s)
  double gap_tol = 0.1;    // finite-time exponents with |l| below this are neutral (1/s)
  double reortho = 0.5;    // re-orthonormalisation interval (s)
};

/// One row of an exponent sweep: time since the start of the filtration and
/// the accumulated log growth of each orthonormalised direction.
struct GrowthSample {
  double t;
  std::vector<double> log_growth;
};

/// Estimated E+ (+) E- at (u, x) with rate constants.
struct HyperbolicSplitting {
  ControlFunction u;
  Vec x;
  Mat E_plus;   // n x k+, orthonormal columns
  Mat E_minus;  // n x k-, orthonormal columns
  Mat P;        // projection onto E- along E+
  std::vector<double> forward_exponents;   // sorted descending
  std::vector<double> backward_exponents;  // sorted descending
  std::vector<GrowthSample> forward_growth;
  double c_est = 1.0;
  double lambda_est = 0.0;
  double C_est = 1.0;   // 1 / c_est for the time-1 map
  double mu_est = 1.0;  // exp(-lambda_est)
};

/// Forward QR filtration from phi(-T, x, u) gives E+, the backward filtration
/// from phi(T, x, u) gives E-. Dimensions follow the sign of the forward
/// exponents; any |exponent| < gap_tol raises CenterDirectionError. Rates are
/// fitted by verify_rates on t = k T / 16, k = 1..8.
HyperbolicSplitting estimate_splitting(const ControlAffineSystem& sys, const ControlFunction& u, const Vec& x,
                                       const SplittingOptions& opts = {});

/// Projection onto span(E_minus) along span(E_plus).
Mat projection_from_bases(const Mat& E_plus, const Mat& E_minus);

struct RateViolation {
  double t;
  bool unstable_side;
  double growth;  // |d phi_t v| for the offending unit vector
  double bound;
};

struct RateFit {
  double c_est = 1.0;
  double lambda_est = 0.0;
  std::vector<RateViolation> violations;
};

/// lambda is the smallest finite-time rate at the largest sample time over the
/// sampled unit vectors of E+ and E-; c in (0, 1] is then the largest constant
/// for which both exponential bounds hold at every sample. Violations list the
/// samples that break the fitted bounds by more than 1e-9 relative.
RateFit verify_rates(const HyperbolicSplitting& splitting, const ControlAffineSystem& sys,
                     const std::vector<double>& t_samples, int vec_samples, double step = 1e-2);

/// |P(image) d phi_1 - d phi_1 P(base)| in the operator norm.
double projection_commutation(const HyperbolicSplitting& at_x, const HyperbolicSplitting& at_image,
                              const ControlAffineSystem& sys, double step = 1e-2);

/// log |det d phi_{tau,u}(x)| restricted to span(E_plus), between orthonormal
/// bases, accumulated from the QR factors along the trajectory. When
/// `image_basis` is given it receives the orthonormal basis of the image.
double unstable_log_determinant(const ControlAffineSystem& sys, const ControlFunction& u, const Vec& x,
                                const Mat& E_plus, double tau, double step = 1e-2, Mat* image_basis = nullptr,
                                double reortho = 0.5);

/// Largest principal angle between the column spans of A and B (radians).
double principal_angle(const Mat& A, const Mat& B);

/// Thin QR with a positive diagonal; `Q` is overwritten by the orthonormal
/// factor and the log of the diagonal of R is added to `log_r`.
void orthonormalize(Mat& Q, std::vector<double>& log_r);

/// Fixed orthonormal n x n frame with no column aligned to a coordinate axis.
Mat generic_frame(int n);

}  // namespace chainlift
