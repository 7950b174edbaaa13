#include "chainlift/chain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "chainlift/errors.hpp"
#include "chainlift/parallel.hpp"

namespace chainlift {

CellGraph::CellGraph(ControlAffineSystem sys, StateGrid grid, ChainParams params, std::vector<Vec> controls)
    : sys_(std::move(sys)), grid_(std::move(grid)), params_(params), controls_(std::move(controls)) {}

bool CellGraph::has_edge(std::size_t from, std::size_t to) const {
  return std::any_of(successors_begin(from), successors_end(from),
                     [to](const CellEdge& e) { return e.target == to; });
}

Vec CellGraph::sample_state(std::size_t cell, std::uint32_t sample) const {
  if (sample == 0) return grid_.cell_center(cell);
  const Box box = grid_.cell_box(cell);
  std::mt19937_64 rng(mix_seed(params_.seed, cell * 1'000'003ULL + sample));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec x(grid_.dim());
  for (int a = 0; a < grid_.dim(); ++a) x[a] = box.lo[a] + unit(rng) * (box.hi[a] - box.lo[a]);
  return x;
}

std::vector<Vec> control_lattice(const ControlRange& range, int per_axis) {
  if (per_axis < 1) throw InputError("control lattice needs at least one point per axis");
  const int m = range.dim();
  const Vec lo = range.lower(), hi = range.upper();
  std::vector<Vec> out;
  std::vector<int> idx(m, 0);
  while (true) {
    Vec u(m);
    for (int a = 0; a < m; ++a) {
      u[a] = per_axis == 1 ? range.center()[a] : lo[a] + (hi[a] - lo[a]) * idx[a] / (per_axis - 1);
    }
    out.push_back(u);
    int a = 0;
    while (a < m && ++idx[a] == per_axis) {
      idx[a] = 0;
      ++a;
    }
    if (a == m) break;
  }
  return out;
}

CellGraph build_transition_graph(const ControlAffineSystem& sys, const StateGrid& grid,
                                 const ChainParams& params) {
  if (!(params.T > 0.0)) throw InputError("chain: transition time T must be positive");
  if (!(params.eps >= grid.widths().maxCoeff() - 1e-12)) throw InputError("chain: eps must be >= h");
  if (params.samples_per_cell < 1) throw InputError("chain: samples_per_cell must be >= 1");
  if (grid.domain().dim() != sys.state_dim()) throw InputError("chain: grid and system dimensions differ");

  CellGraph graph(sys, grid, params, control_lattice(sys.range(), params.controls_per_axis));
  const std::size_t n_cells = grid.cell_count();
  constexpr std::size_t chunk = 512;
  const std::size_t n_chunks = (n_cells + chunk - 1) / chunk;

  std::vector<std::vector<std::vector<CellEdge>>> chunk_edges(n_chunks);
  std::vector<GraphDiagnostics> chunk_diag(n_chunks);

  parallel_for(n_chunks, params.threads, [&](std::size_t c) {
    Integrator integ(sys, {params.step});
    std::vector<ControlFunction> controls;
    for (const Vec& u : graph.controls()) controls.push_back(ControlFunction::constant(u));
    auto& out = chunk_edges[c];
    auto& diag = chunk_diag[c];
    const std::size_t first = c * chunk, last = std::min(n_cells, first + chunk);
    out.resize(last - first);
    std::map<std::size_t, CellEdge> found;
    for (std::size_t cell = first; cell < last; ++cell) {
      found.clear();
      for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(params.samples_per_cell); ++s) {
        const Vec x = graph.sample_state(cell, s);
        for (std::uint32_t k = 0; k < controls.size(); ++k) {
          ++diag.trajectories;
          Vec y;
          try {
            y = integ.flow(x, controls[k], 0.0, params.T);
          } catch (const EscapeError&) {
            ++diag.escaped;
            continue;
          }
          if (grid.domain().distance(x, y) <= 1e-12) ++diag.stationary;
          for (std::size_t target : grid.cells_near(y, params.eps)) {
            found.emplace(target, CellEdge{static_cast<std::uint32_t>(target), s, k});
          }
        }
      }
      auto& edges = out[cell - first];
      edges.reserve(found.size());
      for (const auto& [t, e] : found) edges.push_back(e);
    }
  });

  graph.offsets_.assign(n_cells + 1, 0);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    for (std::size_t i = 0; i < chunk_edges[c].size(); ++i) {
      const std::size_t cell = c * chunk + i;
      graph.offsets_[cell + 1] = graph.offsets_[cell] + chunk_edges[c][i].size();
    }
    graph.diagnostics_.trajectories += chunk_diag[c].trajectories;
    graph.diagnostics_.escaped += chunk_diag[c].escaped;
    graph.diagnostics_.stationary += chunk_diag[c].stationary;
  }
  graph.edges_.reserve(graph.offsets_.back());
  for (auto& per_chunk : chunk_edges) {
    for (auto& edges : per_chunk) graph.edges_.insert(graph.edges_.end(), edges.begin(), edges.end());
  }
  const auto& d = graph.diagnostics_;
  graph.diagnostics_.degenerate = d.trajectories > 0 && d.stationary == d.trajectories;
  return graph;
}

double replay_edge(const ControlAffineSystem& sys, const CellGraph& graph, std::size_t from,
                   const CellEdge& edge) {
  Integrator integ(sys, {graph.params().step});
  const Vec x = graph.sample_state(from, edge.sample);
  const Vec y = integ.flow(x, ControlFunction::constant(graph.controls().at(edge.control)), 0.0,
                           graph.params().T);
  return graph.grid().domain().distance(y, graph.grid().cell_center(edge.target));
}

ChainControlSet make_chain_control_set(const StateGrid& grid, std::vector<std::size_t> cells, double eps,
                                       double T) {
  if (cells.empty()) throw InputError("chain control set needs at least one cell");
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  ChainControlSet q;
  q.hull = grid.cell_box(cells.front());
  for (std::size_t c : cells) {
    if (c >= grid.cell_count()) throw InputError("chain control set: cell index out of range");
    q.hull = q.hull.merged(grid.cell_box(c));
  }
  q.cells = std::move(cells);
  q.eps = eps;
  q.T = T;
  q.h = grid.widths();
  return q;
}

std::vector<ChainControlSet> chain_control_sets(const CellGraph& graph) {
  if (graph.diagnostics().degenerate) {
    throw InputError("degenerate dynamics: every sampled trajectory is stationary, "
                     "so every cell would be its own chain control set");
  }
  const std::size_t n = graph.node_count();
  if (n == 0 || graph.edge_count() == 0) return {};

  using G = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  G g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto e = graph.successors_begin(i); e != graph.successors_end(i); ++e) boost::add_edge(i, e->target, g);
  }
  std::vector<int> component(n);
  const int n_comp = boost::strong_components(g, boost::make_iterator_property_map(
                                                     component.begin(), boost::get(boost::vertex_index, g)));

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_comp));
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(component[i])].push_back(i);

  std::vector<ChainControlSet> out;
  for (auto& cells : members) {
    bool internal = cells.size() > 1;
    if (!internal) internal = graph.has_edge(cells.front(), cells.front());
    if (!internal || !viable(graph, cells)) continue;
    out.push_back(make_chain_control_set(graph.grid(), std::move(cells), graph.params().eps, graph.params().T));
  }
  std::sort(out.begin(), out.end(), [](const ChainControlSet& a, const ChainControlSet& b) {
    if (a.cells.size() != b.cells.size()) return a.cells.size() > b.cells.size();
    return a.cells.front() < b.cells.front();
  });
  return out;
}

bool viable(const CellGraph& graph, const std::vector<std::size_t>& cells) {
  const double Tv = graph.params().viability_factor * graph.params().T;
  if (!(Tv > 0.0)) return true;
  const StateGrid& grid = graph.grid();
  std::vector<char> member(grid.cell_count(), 0);
  for (std::size_t c : cells) member[c] = 1;
  // Deep cells first: order by distance to the center of the members' bounding box.
  Vec lo = grid.cell_center(cells.front()), hi = lo;
  for (std::size_t c : cells) {
    const Vec x = grid.cell_center(c);
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const Vec mid = 0.5 * (lo + hi);
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(cells.size());
  for (std::size_t c : cells) order.emplace_back(grid.domain().distance(grid.cell_center(c), mid), c);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  Integrator integ(graph.system(), {graph.params().step});
  auto stays = [&](const Vec& x0, const ControlFunction& u, double t1) {
    bool ok = true;
    try {
      const Trajectory tr = integ.trajectory(x0, u, 0.0, t1);
      for (const Vec& s : tr.states) {
        const long long c = grid.locate(s);
        if (c < 0 || !member[static_cast<std::size_t>(c)]) {
          ok = false;
          break;
        }
      }
    } catch (const EscapeError&) {
      ok = false;
    }
    return ok;
  };
  for (const auto& [d, c] : order) {
    const Vec x = grid.cell_center(c);
    for (const Vec& uv : graph.controls()) {
      const ControlFunction u = ControlFunction::constant(uv);
      if (stays(x, u, Tv) && stays(x, u, -Tv)) return true;
    }
  }
  return false;
}

bool strongly_connected(const CellGraph& graph, const std::vector<std::size_t>& cells) {
  if (cells.empty()) return true;
  const std::size_t n = graph.node_count();
  std::vector<std::vector<std::size_t>> reverse(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto e = graph.successors_begin(i); e != graph.successors_end(i); ++e) reverse[e->target].push_back(i);
  }
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{cells.front()};
    seen[cells.front()] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      auto visit = [&](std::size_t w) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      };
      if (forward) {
        for (auto e = graph.successors_begin(v); e != graph.successors_end(v); ++e) visit(e->target);
      } else {
        for (std::size_t w : reverse[v]) visit(w);
      }
    }
    return seen;
  };
  const auto fwd = reach(true), bwd = reach(false);
  return std::all_of(cells.begin(), cells.end(), [&](std::size_t c) { return fwd[c] && bwd[c]; });
}

EquilibriumSearch equilibria(const ControlAffineSystem& sys, const Vec& u0, const StateGrid& grid,
                             const EquilibriumOptions& opts) {
  if (!sys.range().contains(u0)) throw InputError("equilibria: u0 outside the control range");
  const int n = sys.state_dim();
  Mat fields(n, sys.control_dim() + 1), scratch(n, n), jac(n, n);
  Vec f(n);
  EquilibriumSearch out;
  std::vector<Vec> roots;
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    ++out.seeds;
    Vec x = grid.cell_center(cell);
    bool ok = false;
    for (int it = 0; it < opts.max_iters; ++it) {
      sys.rhs(x, u0, fields, f);
      if (!f.allFinite()) break;
      if (f.norm() <= opts.newton_tol) {
        ok = true;
        break;
      }
      sys.rhs_jacobian(x, u0, scratch, jac);
      Eigen::FullPivLU<Mat> lu(jac);
      if (!lu.isInvertible()) break;
      x -= lu.solve(f);
      if (!x.allFinite()) break;
      x = sys.domain().wrap(x);
      if (!sys.domain().contains(x)) break;
    }
    if (!ok) continue;
    ++out.converged;
    const bool dup = std::any_of(roots.begin(), roots.end(), [&](const Vec& r) {
      return sys.domain().distance(r, x) <= opts.dedupe_tol;
    });
    if (!dup) roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end(), [](const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  for (const Vec& r : roots) {
    Equilibrium e;
    e.point = r;
    sys.rhs_jacobian(r, u0, scratch, jac);
    Eigen::EigenSolver<Mat> es(jac, false);
    e.hyperbolic = true;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      e.eigenvalues.push_back(es.eigenvalues()[i]);
      if (std::abs(es.eigenvalues()[i].real()) < opts.spectral_gap_tol) e.hyperbolic = false;
    }
    std::sort(e.eigenvalues.begin(), e.eigenvalues.end(), [](auto a, auto b) {
      return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    out.points.push_back(std::move(e));
  }
  return out;
}

ControlFunction random_control(const ControlRange& range, int pieces, std::uint64_t seed, double piece_len) {
  if (pieces < 1) throw InputError("random control needs at least one piece");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec lo = range.lower(), hi = range.upper();
  auto draw = [&] {
    Vec u(range.dim());
    for (int a = 0; a < range.dim(); ++a) u[a] = lo[a] + unit(rng) * (hi[a] - lo[a]);
    return u;
  };
  std::vector<double> bps;
  std::vector<Vec> values;
  const double start = -0.5 * pieces * piece_len;
  for (int i = 0; i <= pieces; ++i) bps.push_back(start + i * piece_len);
  for (int i = 0; i < pieces + 2; ++i) values.push_back(draw());
  return ControlFunction(std::move(bps), std::move(values));
}

IsolationReport isolated_check(const ControlAffineSystem& sys, const ChainControlSet& Q,
                               const std::vector<double>& inflate_factors, const IsolationOptions& opts) {
  if (!(opts.T_probe > 0.0) || opts.samples < 1) throw InputError("isolated_check: bad probe parameters");
  IsolationReport report;
  bool all_clean_so_far = true;
  for (std::size_t fi = 0; fi < inflate_factors.size(); ++fi) {
    const double factor = inflate_factors[fi];
    if (!(factor > 1.0)) throw InputError("isolated_check: inflation factors must exceed 1");
    const Box outer = Q.hull.inflated(factor);
    std::vector<char> stays(static_cast<std::size_t>(opts.samples), 0);
    std::vector<Vec> points(static_cast<std::size_t>(opts.samples));
    parallel_for(static_cast<std::size_t>(opts.samples), opts.threads, [&](std::size_t i) {
      const std::uint64_t s = mix_seed(opts.seed, fi * 1'000'000ULL + i);
      std::mt19937_64 rng(s);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Vec x(outer.dim());
      do {
        for (int a = 0; a < x.size(); ++a) x[a] = outer.lo[a] + unit(rng) * (outer.hi[a] - outer.lo[a]);
      } while (Q.hull.contains(x));
      points[i] = x;
      const ControlFunction u = random_control(sys.range(), opts.control_pieces, mix_seed(s, 17));
      Integrator integ(sys, {opts.step});
      const bool fwd = integ.exit_time(x, u, 0.0, opts.T_probe, outer) >= opts.T_probe;
      const bool bwd = fwd && integ.exit_time(x, u, 0.0, -opts.T_probe, outer) <= -opts.T_probe;
      stays[i] = fwd && bwd;
    });
    IsolationProbe probe;
    probe.factor = factor;
    const auto it = std::find(stays.begin(), stays.end(), 1);
    if (it != stays.end()) {
      probe.counterexample = true;
      probe.witness = points[static_cast<std::size_t>(it - stays.begin())];
      all_clean_so_far = false;
    } else if (all_clean_so_far) {
      report.largest_clean_factor = std::max(report.largest_clean_factor, factor);
    }
    report.probes.push_back(probe);
  }
  return report;
}

}  // namespace chainlift
