#include "chainlift/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "chainlift/errors.hpp"
#include "chainlift/parallel.hpp"

namespace chainlift {

std::vector<Vec> sample_box(const Box& box, int per_axis) {
  if (per_axis < 1) throw InputError("sample_box: need at least one point per axis");
  const int n = box.dim();
  std::vector<Vec> out;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    Vec x(n);
    for (int a = 0; a < n; ++a) {
      x[a] = per_axis == 1 ? 0.5 * (box.lo[a] + box.hi[a])
                           : box.lo[a] + (box.hi[a] - box.lo[a]) * idx[static_cast<std::size_t>(a)] / (per_axis - 1);
    }
    out.push_back(x);
    int a = 0;
    while (a < n && ++idx[static_cast<std::size_t>(a)] == per_axis) idx[static_cast<std::size_t>(a++)] = 0;
    if (a == n) break;
  }
  return out;
}

std::vector<ControlFunction> constant_pool(const ControlRange& range, int per_axis) {
  std::vector<ControlFunction> pool;
  for (const Vec& u : control_lattice(range, per_axis)) pool.push_back(ControlFunction::constant(u));
  return pool;
}

AdmissiblePair make_admissible_pair(const ControlAffineSystem& sys, const ChainControlSet& Q,
                                    std::vector<Vec> K_samples, const std::vector<ControlFunction>& pool,
                                    double probe_T, double inflate, double step) {
  if (!(probe_T > 0.0)) throw InputError("admissible pair: probe_T must be positive");
  AdmissiblePair pair;
  pair.Q = Q;
  pair.probe_T = probe_T;
  pair.inflate = inflate;
  const Box region = Q.hull.inflated(inflate);
  Integrator integ(sys, {step});
  const int n = sys.state_dim(), m = sys.control_dim();
  Mat fields(n, m + 1);
  for (const Vec& x : K_samples) {
    if (!region.contains(x)) throw InputError("admissible pair: K sample outside the inflated hull");
    sys.model().eval(x, fields);
    const Mat G = fields.rightCols(m);
    const Vec u_eq = sys.range().clamp(G.colPivHouseholderQr().solve(Vec(-fields.col(0))));
    ControlFunction witness = ControlFunction::constant(u_eq);
    bool ok = integ.exit_time(x, witness, 0.0, probe_T, region) >= probe_T;
    for (std::size_t c = 0; !ok && c < pool.size(); ++c) {
      if (integ.exit_time(x, pool[c], 0.0, probe_T, region) >= probe_T) {
        witness = pool[c];
        ok = true;
      }
    }
    if (!ok) throw InputError("admissible pair: a K sample has no witness control; (K, Q) is not admissible");
    pair.witnesses.push_back(std::move(witness));
  }
  pair.K_samples = std::move(K_samples);
  return pair;
}

CoverMatrix coverage(const ControlAffineSystem& sys, const std::vector<Vec>& samples,
                     const std::vector<ControlFunction>& candidates, const Box& region, double tau, double step,
                     int threads) {
  CoverMatrix cover(candidates.size(), std::vector<char>(samples.size(), 0));
  parallel_for(candidates.size(), threads, [&](std::size_t c) {
    Integrator integ(sys, {step});
    for (std::size_t s = 0; s < samples.size(); ++s) {
      cover[c][s] = tau <= 0.0 ? region.contains(samples[s])
                               : integ.exit_time(samples[s], candidates[c], 0.0, tau, region) >= tau;
    }
  });
  return cover;
}

namespace {

std::vector<std::size_t> uncoverable(const CoverMatrix& cover, std::size_t n_samples) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const bool any = std::any_of(cover.begin(), cover.end(), [s](const auto& row) { return row[s] != 0; });
    if (!any) out.push_back(s);
  }
  return out;
}

}  // namespace

CoverResult greedy_cover(const CoverMatrix& cover, std::size_t n_samples) {
  CoverResult res;
  res.uncovered = uncoverable(cover, n_samples);
  if (!res.uncovered.empty()) {
    res.infinite = true;
    return res;
  }
  std::vector<char> done(n_samples, 0);
  std::size_t remaining = n_samples;
  while (remaining > 0) {
    std::size_t best = 0, best_gain = 0;
    for (std::size_t c = 0; c < cover.size(); ++c) {
      std::size_t gain = 0;
      for (std::size_t s = 0; s < n_samples; ++s) gain += cover[c][s] && !done[s];
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    res.chosen.push_back(best);
    for (std::size_t s = 0; s < n_samples; ++s) {
      if (cover[best][s] && !done[s]) {
        done[s] = 1;
        --remaining;
      }
    }
  }
  res.count = res.chosen.size();
  return res;
}

CoverResult exact_cover(const CoverMatrix& cover, std::size_t n_samples) {
  if (cover.size() > 20 || n_samples > 64) throw InputError("exact_cover: at most 20 candidates and 64 samples");
  CoverResult res;
  res.uncovered = uncoverable(cover, n_samples);
  if (!res.uncovered.empty()) {
    res.infinite = true;
    return res;
  }
  if (n_samples == 0) return res;
  const std::uint64_t full = n_samples == 64 ? ~0ULL : (1ULL << n_samples) - 1;
  std::vector<std::uint64_t> masks;
  for (const auto& row : cover) {
    std::uint64_t m = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      if (row[s]) m |= 1ULL << s;
    }
    masks.push_back(m);
  }
  const std::size_t P = masks.size();
  std::size_t best_subset = 0;
  int best_size = std::numeric_limits<int>::max();
  for (std::size_t subset = 1; subset < (1ULL << P); ++subset) {
    const int size = __builtin_popcountll(subset);
    if (size >= best_size) continue;
    std::uint64_t m = 0;
    for (std::size_t c = 0; c < P; ++c) {
      if (subset >> c & 1) m |= masks[c];
    }
    if (m == full) {
      best_size = size;
      best_subset = subset;
    }
  }
  for (std::size_t c = 0; c < P; ++c) {
    if (best_subset >> c & 1) res.chosen.push_back(c);
  }
  res.count = res.chosen.size();
  return res;
}

CoverResult r_inv_estimate(const ControlAffineSystem& sys, const AdmissiblePair& pair, double tau,
                           const std::vector<ControlFunction>& candidates, double inflate, double step,
                           int threads) {
  if (tau < 0.0) throw InputError("r_inv: tau must be nonnegative");
  if (candidates.empty()) {
    CoverResult res;
    res.infinite = true;
    for (std::size_t s = 0; s < pair.K_samples.size(); ++s) res.uncovered.push_back(s);
    return res;
  }
  const Box region = pair.Q.hull.inflated(inflate);
  return greedy_cover(coverage(sys, pair.K_samples, candidates, region, tau, step, threads), pair.K_samples.size());
}

SlopeFit h_inv_direct(const std::vector<double>& taus, const std::vector<double>& counts) {
  SlopeFit fit;
  if (taus.size() != counts.size()) throw InputError("h_inv_direct: taus and counts differ in length");
  if (taus.size() < 3) return fit;
  for (double c : counts) {
    if (!(c >= 1.0) || !std::isfinite(c)) return fit;
  }
  const double n = static_cast<double>(taus.size());
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double l = std::log(counts[i]);
    st += taus[i];
    sl += l;
    stt += taus[i] * taus[i];
    stl += taus[i] * l;
  }
  const double den = n * stt - st * st;
  if (den == 0.0) return fit;
  fit.slope = (n * stl - st * sl) / den;
  fit.intercept = (sl - fit.slope * st) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double r = std::log(counts[i]) - (fit.intercept + fit.slope * taus[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.defined = true;
  return fit;
}

FormulaEstimate h_inv_formula(const ControlAffineSystem& sys, const std::vector<LiftSample>& samples, double tau,
                              const SplittingOptions& splitting) {
  if (!(tau > 0.0)) throw InputError("h_inv_formula: tau must be positive");
  if (samples.empty()) throw InputError("h_inv_formula: need at least one lift sample");
  FormulaEstimate est;
  est.value = std::numeric_limits<double>::infinity();
  for (const LiftSample& s : samples) {
    const HyperbolicSplitting sp = estimate_splitting(sys, s.u, s.x, splitting);
    const double v = unstable_log_determinant(sys, s.u, s.x, sp.E_plus, tau, splitting.step) / tau;
    est.per_sample.push_back(v);
    est.value = std::min(est.value, v);
  }
  est.samples_used = samples.size();
  return est;
}

}  // namespace chainlift
