#pragma once

#include <cstdint>
#include <vector>

#include "chainlift/chain.hpp"
#include "chainlift/hyperbolicity.hpp"

namespace chainlift {

/// K sampled on a grid, the set Q and one witness control per sample keeping
/// it in the inflated hull of Q over the probe horizon.
struct AdmissiblePair {
  std::vector<Vec> K_samples;
  ChainControlSet Q;
  std::vector<ControlFunction> witnesses;
  double probe_T = 0.0;
  double inflate = 1.0;
};

/// Uniform grid with `per_axis` points per axis on the closed box.
std::vector<Vec> sample_box(const Box& box, int per_axis);

/// Witnesses: first the constant control that makes the sample an
/// equilibrium (least squares, clamped to the range), then the pool in order.
/// Throws InputError if some sample has no witness.
AdmissiblePair make_admissible_pair(const ControlAffineSystem& sys, const ChainControlSet& Q,
                                    std::vector<Vec> K_samples, const std::vector<ControlFunction>& pool,
                                    double probe_T, double inflate = 1.0, double step = 1e-2);

/// cover[c][s] != 0 iff candidate c keeps sample s in the region on [0, tau].
using CoverMatrix = std::vector<std::vector<char>>;

CoverMatrix coverage(const ControlAffineSystem& sys, const std::vector<Vec>& samples,
                     const std::vector<ControlFunction>& candidates, const Box& region, double tau, double step,
                     int threads);

struct CoverResult {
  std::size_t count = 0;
  bool infinite = false;                // some sample is covered by no candidate
  std::vector<std::size_t> chosen;      // candidate indices, in pick order
  std::vector<std::size_t> uncovered;   // samples nobody covers
};

/// Greedy cover: most newly covered samples first, ties to the lowest index.
CoverResult greedy_cover(const CoverMatrix& cover, std::size_t n_samples);

/// Minimum cover by enumeration of subsets in increasing size; pools of at
/// most 20 candidates and at most 64 samples.
CoverResult exact_cover(const CoverMatrix& cover, std::size_t n_samples);

/// Greedy spanning-set size for horizon tau.
CoverResult r_inv_estimate(const ControlAffineSystem& sys, const AdmissiblePair& pair, double tau,
                           const std::vector<ControlFunction>& candidates, double inflate, double step = 1e-2,
                           int threads = 1);

struct SlopeFit {
  bool defined = false;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the fit
};

/// Least-squares slope of log(count) against tau; undefined when fewer than
/// three horizons are given or a count is infinite (pass 0 for infinite).
SlopeFit h_inv_direct(const std::vector<double>& taus, const std::vector<double>& counts);

struct LiftSample {
  ControlFunction u;
  Vec x;
};

struct FormulaEstimate {
  double value = 0.0;                  // min over samples (an upper estimate of the infimum)
  std::vector<double> per_sample;      // (1/tau) log |det| on E+
  std::size_t samples_used = 0;
};

/// min over the samples of (1/tau) log |det d phi_{tau,u}(x)| on E+_{u,x}.
FormulaEstimate h_inv_formula(const ControlAffineSystem& sys, const std::vector<LiftSample>& samples, double tau,
                              const SplittingOptions& splitting = {});

struct EntropyEstimate {
  std::vector<double> taus;
  std::vector<double> r_counts;     // 0 marks an infinite count
  std::vector<bool> infinite;
  SlopeFit fit;
  double formula_value = 0.0;
  std::size_t samples_used = 0;
};

/// Constant controls on a lattice of `range` (per_axis points per axis).
std::vector<ControlFunction> constant_pool(const ControlRange& range, int per_axis);

}  // namespace chainlift
