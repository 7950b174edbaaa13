#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainlift/catalog.hpp"
#include "chainlift/chain.hpp"
#include "chainlift/fiber.hpp"
#include "chainlift/hyperbolicity.hpp"

namespace chainlift::cli {

struct ShadowConfig {
  int K = 20;
  double orbit_tol = 1e-10;
  int max_iters = 30;
  double step = 2e-2;
  double alpha = 1e-3;  // size of the synthetic defects for the `shadow` command
  std::optional<Vec> x;
  std::optional<ControlFunction> control;
};

struct MetricConfig {
  int depth = 6;
  int N = 8;
  double eps = 0.1;
  std::vector<double> t_samples{-4, -3, -2, -1, 0, 1, 2, 3, 4};
  std::optional<ControlFunction> u, v;
};

struct TransportConfig {
  std::optional<ControlFunction> u, v;
  std::optional<Vec> x;
  double eps_step = 0.5;
  int min_legs = 1;
};

struct GraphVerifyConfig {
  int n_controls = 100;
  std::optional<Vec> u0;
  int control_pieces = 8;
  int continuity_pairs = 20;
};

struct EntropyConfig {
  std::vector<double> taus{2, 3, 4};
  std::optional<Box> K;        // defaults to the middle half of Q's hull
  int K_points = 201;          // per axis
  int pool_per_axis = 301;
  double pool_rho = 0.6;       // pool spans the range shrunk by this factor
  double probe_T = 10.0;
  double inflate = 1.0;
  double formula_tau = 5.0;
  double step = 2e-2;
};

struct RunConfig {
  SystemSpec system;
  double grid_h = 0.01;
  ChainParams chain;
  SplittingOptions splitting;
  std::optional<Vec> splitting_x;
  std::optional<ControlFunction> splitting_u;
  ShadowConfig shadow;
  MetricConfig metric;
  FiberOptions fiber;
  TransportConfig transport;
  GraphVerifyConfig graph_verify;
  EntropyConfig entropy;
  std::optional<Box> Q;               // explicit hull, skips the chain computation
  std::optional<std::string> Q_summary;  // summary.json written by `chain`
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir = ".";
  std::uint64_t hash = 0;  // of the canonical config text
};

/// Strict parse: unknown keys and out-of-range values raise InputError naming the field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

std::string hex64(std::uint64_t v);

}  // namespace chainlift::cli
