#include "chainlift/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chainlift/errors.hpp"
#include "chainlift/grid.hpp"
#include "chainlift/parallel.hpp"

namespace chainlift {

namespace {

// Smooth stand-in for min(forward, backward) so the compass search sees a
// gradient on both sides of the ridge.
double soft_score(const Survival& s) {
  const double m = std::min(s.forward, s.backward);
  return m - std::log1p(std::exp(-std::abs(s.forward - s.backward)));
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

Survival survival(Integrator& integ, const Vec& x, const ControlFunction& u, const Box& region, double T_f) {
  Survival s;
  s.forward = integ.exit_time(x, u, 0.0, T_f, region);
  s.backward = s.forward > 0.0 ? -integ.exit_time(x, u, 0.0, -T_f, region) : 0.0;
  return s;
}

std::pair<Vec, Survival> refine_fiber_point(Integrator& integ, const ControlFunction& u, const Box& region,
                                            Vec x, double initial_step, const FiberOptions& opts) {
  Survival best = survival(integ, x, u, region, opts.T_f);
  double best_key = soft_score(best);
  double step = initial_step;
  const int n = static_cast<int>(x.size());
  Vec trial(n);
  int evals = 0;
  while (step >= opts.tol && evals < 4000) {
    if (best.forward >= opts.T_f && best.backward >= opts.T_f) break;
    int best_dir = -1;
    Survival cand_best;
    double cand_key = best_key;
    for (int d = 0; d < 2 * n; ++d) {
      trial = x;
      trial[d / 2] += (d % 2 == 0 ? step : -step);
      const Survival s = survival(integ, trial, u, region, opts.T_f);
      ++evals;
      const double k = soft_score(s);
      if (k > cand_key) {
        cand_key = k;
        cand_best = s;
        best_dir = d;
      }
    }
    if (best_dir < 0) {
      step *= 0.5;
      continue;
    }
    x[best_dir / 2] += (best_dir % 2 == 0 ? step : -step);
    best = cand_best;
    best_key = cand_key;
  }
  return {x, best};
}

LiftFiber fiber(const ControlAffineSystem& sys, const ChainControlSet& Q, const ControlFunction& u,
                const FiberOptions& opts) {
  if (!(opts.T_f > 0.0) || !(opts.inflate >= 1.0) || !(opts.seed_h > 0.0) || !(opts.tol > 0.0)) {
    throw InputError("fiber: invalid options");
  }
  if (u.dim() != sys.control_dim()) throw InputError("fiber: control has wrong dimension");
  LiftFiber out;
  out.u = u;
  out.requested_horizon = opts.T_f;
  out.containment_tol = opts.cluster_tol;
  out.region = Q.hull.inflated(opts.inflate);

  const StateGrid lattice(Domain::box(out.region.lo, out.region.hi), opts.seed_h);
  const std::size_t n_seeds = lattice.cell_count();
  std::vector<Survival> scores(n_seeds);
  parallel_for(n_seeds, opts.threads, [&](std::size_t i) {
    Integrator integ(sys, {opts.step});
    scores[i] = survival(integ, sys.domain().wrap(lattice.cell_center(i)), u, out.region, opts.T_f);
  });

  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    if (scores[i].score() <= 0.0) continue;
    const double k = soft_score(scores[i]);
    bool is_max = true;
    for (std::size_t j : lattice.neighbors(i)) {
      if (j != i && soft_score(scores[j]) > k) {
        is_max = false;
        break;
      }
    }
    if (is_max) maxima.push_back(i);
  }
  constexpr std::size_t max_seeds = 32;
  std::stable_sort(maxima.begin(), maxima.end(),
                   [&](std::size_t a, std::size_t b) { return soft_score(scores[a]) > soft_score(scores[b]); });
  if (maxima.size() > max_seeds) maxima.resize(max_seeds);
  out.seeds = maxima.size();

  std::vector<std::pair<Vec, Survival>> refined(maxima.size());
  parallel_for(maxima.size(), opts.threads, [&](std::size_t i) {
    Integrator integ(sys, {opts.step});
    refined[i] = refine_fiber_point(integ, u, out.region, lattice.cell_center(maxima[i]),
                                    0.5 * lattice.widths().maxCoeff(), opts);
  });

  const double need = std::min(opts.T_f, opts.min_survival);
  std::vector<std::size_t> order(refined.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return soft_score(refined[a].second) > soft_score(refined[b].second);
  });
  std::vector<std::pair<Vec, double>> kept;
  for (std::size_t i : order) {
    const auto& [x, s] = refined[i];
    if (s.score() < need) continue;
    const Vec xw = sys.domain().wrap(x);
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const auto& p) {
      return sys.domain().distance(p.first, xw) <= opts.cluster_tol;
    });
    if (!dup) kept.emplace_back(xw, s.score());
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return lex_less(a.first, b.first); });
  out.horizon = opts.T_f;
  for (auto& [x, s] : kept) {
    out.points.push_back(x);
    out.survival.push_back(s);
    out.horizon = std::min(out.horizon, s);
  }
  return out;
}

}  // namespace chainlift
