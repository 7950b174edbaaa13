#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "chainlift/control.hpp"
#include "chainlift/grid.hpp"
#include "chainlift/integrator.hpp"
#include "chainlift/system.hpp"

namespace chainlift {

struct ChainParams {
  double T = 0.5;                // transition time (s)
  double eps = 0.02;             // jump tolerance (state units), must be >= h
  int samples_per_cell = 1;      // sample 0 is the cell center, the rest are seeded uniform draws
  int controls_per_axis = 3;     // constant controls on a lattice of the range, corners included
  std::uint64_t seed = 0;
  double step = 1e-3;            // integrator step (s)
  int threads = 1;
  double viability_factor = 2.0; // probe length in units of T; 0 disables the probe
};

/// Directed edge i -> target; the witness is (sample id in cell i, control id).
struct CellEdge {
  std::uint32_t target;
  std::uint32_t sample;
  std::uint32_t control;
};

struct GraphDiagnostics {
  std::size_t trajectories = 0;
  std::size_t escaped = 0;     // integration left the safety box; no edge recorded
  std::size_t stationary = 0;  // endpoint equals start to 1e-12
  /// Every trajectory was stationary: all vector fields vanish on the samples.
  bool degenerate = false;
};

/// Cell graph whose edges realise (eps, T)-chain jumps between cell centers.
class CellGraph {
 public:
  CellGraph(ControlAffineSystem sys, StateGrid grid, ChainParams params, std::vector<Vec> controls);

  const ControlAffineSystem& system() const { return sys_; }
  const StateGrid& grid() const { return grid_; }
  const ChainParams& params() const { return params_; }
  const std::vector<Vec>& controls() const { return controls_; }
  const GraphDiagnostics& diagnostics() const { return diagnostics_; }

  std::size_t node_count() const { return grid_.cell_count(); }
  std::size_t edge_count() const { return edges_.size(); }
  const CellEdge* successors_begin(std::size_t cell) const { return edges_.data() + offsets_[cell]; }
  const CellEdge* successors_end(std::size_t cell) const { return edges_.data() + offsets_[cell + 1]; }
  bool has_edge(std::size_t from, std::size_t to) const;

  /// Sample state `sample` of `cell` (deterministic under the seed).
  Vec sample_state(std::size_t cell, std::uint32_t sample) const;

 private:
  friend CellGraph build_transition_graph(const ControlAffineSystem&, const StateGrid&, const ChainParams&);

  ControlAffineSystem sys_;
  StateGrid grid_;
  ChainParams params_;
  std::vector<Vec> controls_;
  std::vector<std::size_t> offsets_;
  std::vector<CellEdge> edges_;
  GraphDiagnostics diagnostics_;
};

/// Lattice of constant control values with `per_axis` points per axis.
std::vector<Vec> control_lattice(const ControlRange& range, int per_axis);

/// For every cell, integrates each (sample state, lattice control) pair for
/// time T and links the cell to every cell whose center lies within eps of
/// the endpoint.
CellGraph build_transition_graph(const ControlAffineSystem& sys, const StateGrid& grid,
                                 const ChainParams& params);

/// |phi(T, witness) - center(target)| for a stored edge.
double replay_edge(const ControlAffineSystem& sys, const CellGraph& graph, std::size_t from,
                   const CellEdge& edge);

/// A nontrivial strongly connected component of a CellGraph.
struct ChainControlSet {
  std::vector<std::size_t> cells;  // ascending
  Box hull;                        // union of cell boxes
  double eps = 0.0;
  double T = 0.0;
  Vec h;
};

/// Nontrivial SCCs, largest first; ties broken by least member cell index.
/// A component is kept when it has an internal edge and passes the viability
/// probe: some member cell center, under some lattice control, stays inside
/// the member cells on [-viability_factor T, viability_factor T]. Components
/// held together only by jumps (strips one cell wide on the fringe of a set,
/// where collapsing states to cell centers creates recurrence) fail it.
/// Throws InputError when the graph is degenerate (stationary dynamics).
std::vector<ChainControlSet> chain_control_sets(const CellGraph& graph);

/// True iff the viability probe described above succeeds for `cells`.
bool viable(const CellGraph& graph, const std::vector<std::size_t>& cells);

/// True iff every member of `cells` reaches every other inside the graph.
bool strongly_connected(const CellGraph& graph, const std::vector<std::size_t>& cells);

/// Builds a set directly from a cell list (used for hand-made Q in tests and tools).
ChainControlSet make_chain_control_set(const StateGrid& grid, std::vector<std::size_t> cells, double eps,
                                       double T);

struct Equilibrium {
  Vec point;
  std::vector<std::complex<double>> eigenvalues;
  bool hyperbolic = false;
};

struct EquilibriumSearch {
  std::vector<Equilibrium> points;  // lexicographically sorted
  std::size_t seeds = 0;
  std::size_t converged = 0;
};

struct EquilibriumOptions {
  double newton_tol = 1e-12;
  double dedupe_tol = 1e-6;
  double spectral_gap_tol = 1e-3;
  int max_iters = 50;
};

/// Newton on f_0 + sum u0_i f_i from every cell center of `grid`.
EquilibriumSearch equilibria(const ControlAffineSystem& sys, const Vec& u0, const StateGrid& grid,
                             const EquilibriumOptions& opts = {});

struct IsolationProbe {
  double factor = 0.0;
  bool counterexample = false;
  Vec witness;  // point that stayed in the inflated hull without lying in Q
};

/// Heuristic evidence only; never a proof of isolation.
struct IsolationReport {
  std::vector<IsolationProbe> probes;
  double largest_clean_factor = 0.0;  // 0 if every factor produced a counterexample
  bool heuristic = true;
};

struct IsolationOptions {
  double T_probe = 20.0;
  int samples = 200;
  std::uint64_t seed = 0;
  double step = 1e-2;
  int control_pieces = 8;  // random piecewise-constant probe controls
  int threads = 1;
};

/// Samples (inflated hull) \ hull with random controls and looks for points
/// whose trajectory stays in the inflated hull on [-T_probe, T_probe].
IsolationReport isolated_check(const ControlAffineSystem& sys, const ChainControlSet& Q,
                               const std::vector<double>& inflate_factors, const IsolationOptions& opts);

/// Random piecewise-constant control with unit pieces on [-pieces/2, pieces/2].
ControlFunction random_control(const ControlRange& range, int pieces, std::uint64_t seed, double piece_len = 1.0);

}  // namespace chainlift
