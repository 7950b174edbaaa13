#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chainlift/chain.hpp"
#include "chainlift/fiber.hpp"
#include "chainlift/metric.hpp"
#include "chainlift/transport.hpp"

namespace chainlift {

struct GraphVerifyOptions {
  int n_controls = 100;
  std::uint64_t seed = 0;
  int control_pieces = 8;      // random piecewise-constant controls with unit pieces
  double piece_len = 1.0;
  int continuity_pairs = 20;   // perturbed pairs for the continuity modulus
  double equilibrium_h = 0.1;  // Newton seed spacing for the singleton gate
  std::size_t metric_N = 8;    // truncation for the reported d_U values
  FiberOptions fiber;
  HomotopyOptions homotopy;
  int threads = 1;
};

struct ContinuityPair {
  double du;
  double dx;
};

struct ControlRecord {
  std::size_t index = 0;
  ControlFunction control;
  Vec transported;                 // homotopy transport of the u0 fiber point
  std::vector<Vec> fiber_points;   // survival-based fiber of the same control
  bool singleton = false;
  double discrepancy = 0.0;        // |transported - nearest fiber point|, inf if none
  double roundtrip = 0.0;          // |transport back to u0 - x0|
  int legs = 0;
  bool isolation_warning = false;
  std::string failure;             // empty on success
};

struct GraphVerifyReport {
  bool hypothesis_ok = false;
  std::string hypothesis_note;
  Vec base_point;                  // the single u0 fiber point
  std::size_t equilibria_in_Q = 0;
  double singleton_rate = 0.0;
  double max_discrepancy = 0.0;
  double max_roundtrip = 0.0;
  bool isolation_ok = true;
  std::vector<ContinuityPair> continuity_pairs;  // sorted by du
  std::vector<ControlRecord> controls;
  std::vector<std::string> failures;
};

/// Checks that Q(u0) is a single equilibrium inside the inflated hull, then
/// for seeded random controls compares homotopy transport from u0 with the
/// survival-based fiber, transports back to u0, and samples continuity pairs
/// (v, (1 - s) v + s v') with their d_U and fiber distances.
GraphVerifyReport graph_verify(const ControlAffineSystem& sys, const ChainControlSet& Q, const Vec& u0,
                               const GraphVerifyOptions& opts = {});

}  // namespace chainlift
