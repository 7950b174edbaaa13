#include "chainlift/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "chainlift/catalog.hpp"
#include "chainlift/chain.hpp"
#include "chainlift/cli/config.hpp"
#include "chainlift/cli/json_out.hpp"
#include "chainlift/entropy.hpp"
#include "chainlift/errors.hpp"
#include "chainlift/fiber.hpp"
#include "chainlift/graph_verify.hpp"
#include "chainlift/hyperbolicity.hpp"
#include "chainlift/integrator.hpp"
#include "chainlift/metric.hpp"
#include "chainlift/parallel.hpp"
#include "chainlift/shadowing.hpp"
#include "chainlift/transport.hpp"

namespace chainlift::cli {
namespace {

struct Context {
  std::string command;
  RunConfig cfg;
  ControlAffineSystem sys;
  std::filesystem::path out;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string fmt(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + ")";
}

Json header(const Context& ctx) {
  Json j = Json::object();
  j["version"] = kVersion;
  j["command"] = ctx.command;
  j["config_hash"] = hex64(ctx.cfg.hash);
  j["seed"] = ctx.cfg.seed;
  Json sys = Json::object();
  sys["id"] = ctx.cfg.system.id;
  Json params = Json::object();
  for (const auto& [k, v] : ctx.cfg.system.params) params[k] = v;
  sys["params"] = params;
  sys["domain"] = to_json(ctx.sys.domain().bounds());
  sys["periodic"] = ctx.sys.domain().periodic();
  Json range = Json::object();
  range["lo"] = to_json(ctx.sys.range().lower());
  range["hi"] = to_json(ctx.sys.range().upper());
  sys["range"] = range;
  j["system"] = sys;
  return j;
}

Json control_json(const ControlFunction& u) {
  Json j = Json::object();
  Json bps = Json::array();
  for (double b : u.breakpoints()) bps.push_back(b);
  j["breakpoints"] = bps;
  Json vals = Json::array();
  for (const Vec& v : u.values()) vals.push_back(to_json(v));
  j["values"] = vals;
  return j;
}

void write_json(const Context& ctx, const std::string& name, const Json& j) {
  write_file((ctx.out / name).string(), dump(j));
}

ChainControlSet box_set(const Box& hull, const RunConfig& cfg, int n) {
  ChainControlSet Q;
  Q.hull = hull;
  Q.eps = cfg.chain.eps;
  Q.T = cfg.chain.T;
  Q.h = Vec::Constant(n, cfg.grid_h);
  return Q;
}

Box read_summary_hull(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw InputError("Q.summary: cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("Q.summary: " + path + ": " + e.what());
  }
  if (!doc.contains("hull") || !doc["hull"].is_object()) throw InputError("Q.summary: " + path + ": no hull");
  const auto& h = doc["hull"];
  auto read = [&](const char* key) {
    if (!h.contains(key) || !h[key].is_array() || static_cast<int>(h[key].size()) != n)
      throw InputError(std::string("Q.summary: hull.") + key + " has the wrong shape");
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = h[key][static_cast<std::size_t>(i)].get<double>();
    return v;
  };
  return Box(read("lo"), read("hi"));
}

struct ChainRun {
  CellGraph graph;
  std::vector<ChainControlSet> sets;
};

ChainRun run_chain(const Context& ctx) {
  StateGrid grid(ctx.sys.domain(), ctx.cfg.grid_h);
  CellGraph graph = build_transition_graph(ctx.sys, grid, ctx.cfg.chain);
  auto sets = chain_control_sets(graph);
  return {std::move(graph), std::move(sets)};
}

ChainControlSet resolve_Q(const Context& ctx) {
  const int n = ctx.sys.state_dim();
  if (ctx.cfg.Q) return box_set(*ctx.cfg.Q, ctx.cfg, n);
  if (ctx.cfg.Q_summary) return box_set(read_summary_hull(*ctx.cfg.Q_summary, n), ctx.cfg, n);
  auto run = run_chain(ctx);
  if (run.sets.empty()) throw NumericalError("no chain control set found");
  return run.sets.front();
}

// First equilibrium of the constant control u, optionally restricted to a box.
Vec default_point(const Context& ctx, const ControlFunction& u, const std::string& field,
                  const Box* inside = nullptr) {
  if (!u.is_constant()) throw InputError("config: " + field + ": required when the control is not constant");
  StateGrid grid(ctx.sys.domain(), 0.1);
  auto eq = equilibria(ctx.sys, u(0.0), grid);
  for (const auto& e : eq.points)
    if (!inside || inside->contains(e.point, 1e-9)) return e.point;
  throw InputError("config: " + field + ": no equilibrium of " + fmt(u(0.0)) + " to default to");
}

ControlFunction center_control(const Context& ctx) { return ControlFunction::constant(ctx.sys.range().center()); }

ShadowOptions shadow_options(const RunConfig& cfg) {
  ShadowOptions o;
  o.orbit_tol = cfg.shadow.orbit_tol;
  o.max_iters = cfg.shadow.max_iters;
  return o;
}

TransportOptions transport_options(const RunConfig& cfg) {
  TransportOptions o;
  o.K = cfg.shadow.K;
  o.step = cfg.shadow.step;
  o.inflate = cfg.fiber.inflate;
  o.shadow = shadow_options(cfg);
  return o;
}

HomotopyOptions homotopy_options(const RunConfig& cfg) {
  HomotopyOptions o;
  o.eps_step = cfg.transport.eps_step;
  o.min_legs = cfg.transport.min_legs;
  o.family.depth = cfg.metric.depth;
  o.transport = transport_options(cfg);
  return o;
}

std::string cmd_chain(const Context& ctx) {
  auto run = run_chain(ctx);
  const auto& g = run.graph;
  const int n = ctx.sys.state_dim();

  std::ostringstream csv;
  csv << "set,cell";
  for (int i = 0; i < n; ++i) csv << ",lo" << i << ",hi" << i;
  csv << '\n';
  char buf[32];
  for (std::size_t s = 0; s < run.sets.size(); ++s) {
    for (std::size_t c : run.sets[s].cells) {
      Box b = g.grid().cell_box(c);
      csv << s << ',' << c;
      for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g", b.lo[i]);
        csv << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", b.hi[i]);
        csv << buf;
      }
      csv << '\n';
    }
  }
  write_file((ctx.out / "cells.csv").string(), csv.str());

  Json j = header(ctx);
  Json params = Json::object();
  params["h"] = ctx.cfg.grid_h;
  params["eps"] = ctx.cfg.chain.eps;
  params["T"] = ctx.cfg.chain.T;
  params["samples_per_cell"] = ctx.cfg.chain.samples_per_cell;
  params["controls_per_axis"] = ctx.cfg.chain.controls_per_axis;
  params["step"] = ctx.cfg.chain.step;
  params["viability_factor"] = ctx.cfg.chain.viability_factor;
  j["params"] = params;
  Json graph = Json::object();
  graph["nodes"] = g.node_count();
  graph["edges"] = g.edge_count();
  graph["trajectories"] = g.diagnostics().trajectories;
  graph["escaped"] = g.diagnostics().escaped;
  graph["stationary"] = g.diagnostics().stationary;
  j["graph"] = graph;
  j["set_count"] = run.sets.size();
  Json sets = Json::array();
  for (const auto& s : run.sets) {
    Json o = Json::object();
    o["cell_count"] = s.cells.size();
    o["hull"] = to_json(s.hull);
    sets.push_back(o);
  }
  j["sets"] = sets;
  if (!run.sets.empty()) {
    j["cell_count"] = run.sets.front().cells.size();
    j["hull"] = to_json(run.sets.front().hull);
  }
  write_json(ctx, "summary.json", j);

  std::string line = std::to_string(run.sets.size()) + " chain control set(s), " + std::to_string(g.edge_count()) +
                     " edges";
  if (!run.sets.empty())
    line += ", hull " + fmt(run.sets.front().hull.lo) + " to " + fmt(run.sets.front().hull.hi);
  return line;
}

std::string cmd_splitting(const Context& ctx) {
  ControlFunction u = ctx.cfg.splitting_u ? *ctx.cfg.splitting_u : center_control(ctx);
  Vec x = ctx.cfg.splitting_x ? *ctx.cfg.splitting_x : default_point(ctx, u, "splitting.x");
  const auto& so = ctx.cfg.splitting;
  HyperbolicSplitting sp = estimate_splitting(ctx.sys, u, x, so);

  Integrator integ(ctx.sys, IntegratorOptions{so.step});
  Vec x1 = integ.flow(x, u, 0.0, 1.0);
  HyperbolicSplitting sp1 = estimate_splitting(ctx.sys, shift(u, 1.0), x1, so);
  double commutation = projection_commutation(sp, sp1, ctx.sys, so.step);
  double idempotence = (sp.P * sp.P - sp.P).norm();
  double invariance = 0.0;
  {
    Mat D = variational_flow(ctx.sys, x, u, 1.0, so.step);
    if (sp.E_plus.cols() > 0) invariance = std::max(invariance, principal_angle(D * sp.E_plus, sp1.E_plus));
    if (sp.E_minus.cols() > 0) invariance = std::max(invariance, principal_angle(D * sp.E_minus, sp1.E_minus));
  }

  Json j = header(ctx);
  j["control"] = control_json(u);
  j["x"] = to_json(x);
  j["window_T"] = so.window_T;
  j["gap_tol"] = so.gap_tol;
  j["unstable_dim"] = sp.E_plus.cols();
  j["stable_dim"] = sp.E_minus.cols();
  j["E_plus"] = to_json(Mat(sp.E_plus.transpose()));
  j["E_minus"] = to_json(Mat(sp.E_minus.transpose()));
  j["P"] = to_json(sp.P);
  Json fe = Json::array();
  for (double e : sp.forward_exponents) fe.push_back(e);
  j["forward_exponents"] = fe;
  Json be = Json::array();
  for (double e : sp.backward_exponents) be.push_back(e);
  j["backward_exponents"] = be;
  j["c"] = sp.c_est;
  j["lambda"] = sp.lambda_est;
  j["C"] = sp.C_est;
  j["mu"] = sp.mu_est;
  Json res = Json::object();
  res["projection_idempotence"] = idempotence;
  res["projection_commutation"] = commutation;
  res["invariance_angle"] = invariance;
  j["residuals"] = res;
  write_json(ctx, "report.json", j);

  std::ostringstream csv;
  csv << "t";
  for (int i = 0; i < ctx.sys.state_dim(); ++i) csv << ",log_growth" << i;
  csv << '\n';
  char buf[32];
  for (const auto& g : sp.forward_growth) {
    std::snprintf(buf, sizeof buf, "%.17g", g.t);
    csv << buf;
    for (double v : g.log_growth) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      csv << buf;
    }
    csv << '\n';
  }
  write_file((ctx.out / "exponents.csv").string(), csv.str());

  return "splitting dims +" + std::to_string(sp.E_plus.cols()) + "/-" + std::to_string(sp.E_minus.cols()) +
         ", lambda " + fmt(sp.lambda_est) + ", c " + fmt(sp.c_est) + ", commutation " + fmt(commutation);
}

std::string cmd_shadow(const Context& ctx) {
  const auto& sc = ctx.cfg.shadow;
  ControlFunction u = sc.control ? *sc.control : center_control(ctx);
  Vec x = sc.x ? *sc.x : default_point(ctx, u, "shadow.x");
  FlowMap map(ctx.sys, sc.step);
  PseudoOrbit exact = orbit_through(map, u, x, sc.K);

  // Seeded perturbation of every state by a random vector of length alpha.
  std::mt19937_64 rng(mix_seed(ctx.cfg.seed, 0x5ad0));
  std::normal_distribution<double> normal;
  std::vector<Vec> states = exact.states;
  for (auto& s : states) {
    Vec d(s.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = normal(rng);
    s = map.wrap(s + sc.alpha * d / d.norm());
  }
  PseudoOrbit pseudo = make_pseudo_orbit(map, u, std::move(states));
  ShadowResult r = shadow(map, pseudo, shadow_options(ctx.cfg));

  Json j = header(ctx);
  j["control"] = control_json(u);
  j["x"] = to_json(x);
  j["K"] = sc.K;
  j["perturbation"] = sc.alpha;
  j["alpha"] = pseudo.alpha;
  j["beta"] = r.beta;
  j["beta_over_alpha"] = pseudo.alpha > 0 ? r.beta / pseudo.alpha : 0.0;
  j["residual"] = r.residual;
  j["newton_iters"] = r.newton_iters;
  j["unstable_dim"] = r.unstable_dim;
  j["lambda_min"] = r.lambda_min;
  j["window_flagged"] = r.window_flagged;
  j["y0"] = to_json(r.y0);
  Json trace = Json::array();
  for (double d : r.defect_trace) trace.push_back(d);
  j["defect_trace"] = trace;
  Json orbit = Json::array();
  for (const Vec& y : r.orbit) orbit.push_back(to_json(y));
  j["orbit"] = orbit;
  write_json(ctx, "report.json", j);
  return "shadow alpha " + fmt(pseudo.alpha) + ", beta " + fmt(r.beta) + ", residual " + fmt(r.residual) + " in " +
         std::to_string(r.newton_iters) + " Newton steps";
}

std::string cmd_transport(const Context& ctx) {
  ChainControlSet Q = resolve_Q(ctx);
  const auto& tc = ctx.cfg.transport;
  ControlFunction u = tc.u ? *tc.u : center_control(ctx);
  if (!tc.v) throw InputError("config: transport.v: missing");
  ControlFunction v = *tc.v;
  Box region = Q.hull.inflated(ctx.cfg.fiber.inflate);
  Vec x = tc.x ? *tc.x : default_point(ctx, u, "transport.x", &region);

  HomotopyOptions ho = homotopy_options(ctx.cfg);
  HomotopyResult h = homotopy_transport(ctx.sys, Q, u, v, x, ho);
  TransportResult direct = fiber_transport(ctx.sys, Q, u, v, x, ho.transport);
  LiftFiber fv = fiber(ctx.sys, Q, v, ctx.cfg.fiber);

  double fiber_gap = HUGE_VAL;
  for (const Vec& p : fv.points) fiber_gap = std::min(fiber_gap, ctx.sys.domain().distance(p, h.endpoint));

  Json j = header(ctx);
  j["hull"] = to_json(Q.hull);
  j["u"] = control_json(u);
  j["v"] = control_json(v);
  j["x"] = to_json(x);
  j["endpoint"] = to_json(h.endpoint);
  j["legs"] = h.legs;
  j["delta"] = h.delta;
  Json taus = Json::array();
  for (double t : h.taus) taus.push_back(t);
  j["taus"] = taus;
  Json path = Json::array();
  for (const Vec& p : h.path) path.push_back(to_json(p));
  j["path"] = path;
  j["max_alpha"] = h.max_alpha;
  j["direct"] = to_json(direct.y);
  j["direct_alpha"] = direct.alpha;
  j["direct_beta"] = direct.beta;
  j["homotopy_vs_direct"] = ctx.sys.domain().distance(h.endpoint, direct.y);
  Json fp = Json::array();
  for (const Vec& p : fv.points) fp.push_back(to_json(p));
  j["fiber_points"] = fp;
  j["fiber_horizon"] = fv.horizon;
  j["homotopy_vs_fiber"] = fiber_gap;
  j["isolation_warning"] = h.isolation_warning || direct.isolation_warning;
  write_json(ctx, "report.json", j);
  return "transport endpoint " + fmt(h.endpoint) + " after " + std::to_string(h.legs) + " legs, direct gap " +
         fmt(ctx.sys.domain().distance(h.endpoint, direct.y)) + ", fiber gap " + fmt(fiber_gap);
}

std::string cmd_graph_verify(const Context& ctx) {
  ChainControlSet Q = resolve_Q(ctx);
  const auto& gc = ctx.cfg.graph_verify;
  Vec u0 = gc.u0 ? *gc.u0 : ctx.sys.range().center();
  GraphVerifyOptions o;
  o.n_controls = gc.n_controls;
  o.seed = ctx.cfg.seed;
  o.control_pieces = gc.control_pieces;
  o.continuity_pairs = gc.continuity_pairs;
  o.metric_N = static_cast<std::size_t>(ctx.cfg.metric.N);
  o.fiber = ctx.cfg.fiber;
  o.homotopy = homotopy_options(ctx.cfg);
  o.threads = ctx.cfg.threads;
  GraphVerifyReport r = graph_verify(ctx.sys, Q, u0, o);

  Json j = header(ctx);
  j["hull"] = to_json(Q.hull);
  j["u0"] = to_json(u0);
  j["hypothesis_ok"] = r.hypothesis_ok;
  j["hypothesis_note"] = r.hypothesis_note;
  j["equilibria_in_Q"] = r.equilibria_in_Q;
  j["base_point"] = to_json(r.base_point);
  j["n_controls"] = r.controls.size();
  j["singleton_rate"] = r.singleton_rate;
  j["max_discrepancy"] = r.max_discrepancy;
  j["max_roundtrip"] = r.max_roundtrip;
  j["isolation_ok"] = r.isolation_ok;
  Json pairs = Json::array();
  for (const auto& p : r.continuity_pairs) {
    Json o2 = Json::object();
    o2["du"] = p.du;
    o2["dx"] = p.dx;
    pairs.push_back(o2);
  }
  j["continuity_pairs"] = pairs;
  Json failures = Json::array();
  for (const auto& f : r.failures) failures.push_back(f);
  j["failures"] = failures;
  Json controls = Json::array();
  for (const auto& c : r.controls) {
    Json o2 = Json::object();
    o2["index"] = c.index;
    o2["control"] = control_json(c.control);
    o2["transported"] = to_json(c.transported);
    Json fp = Json::array();
    for (const Vec& p : c.fiber_points) fp.push_back(to_json(p));
    o2["fiber_points"] = fp;
    o2["singleton"] = c.singleton;
    o2["discrepancy"] = c.discrepancy;
    o2["roundtrip"] = c.roundtrip;
    o2["legs"] = c.legs;
    o2["isolation_warning"] = c.isolation_warning;
    o2["failure"] = c.failure;
    controls.push_back(o2);
  }
  j["controls"] = controls;
  write_json(ctx, "report.json", j);
  if (!r.hypothesis_ok) return "graph-verify: hypothesis failed (" + r.hypothesis_note + ")";
  return "graph-verify " + std::to_string(r.controls.size()) + " controls, singleton rate " + fmt(r.singleton_rate) +
         ", max discrepancy " + fmt(r.max_discrepancy) + ", max roundtrip " + fmt(r.max_roundtrip);
}

std::string cmd_entropy(const Context& ctx) {
  ChainControlSet Q = resolve_Q(ctx);
  const auto& ec = ctx.cfg.entropy;
  Box K = ec.K ? *ec.K : Box(Q.hull.center() - 0.5 * Q.hull.half_widths(), Q.hull.center() + 0.5 * Q.hull.half_widths());
  auto samples = sample_box(K, ec.K_points);
  ControlRange pool_range = shrink_control_range(ctx.sys.range(), ec.pool_rho);
  auto pool = constant_pool(pool_range, ec.pool_per_axis);
  AdmissiblePair pair = make_admissible_pair(ctx.sys, Q, samples, pool, ec.probe_T, ec.inflate, ec.step);

  EntropyEstimate est;
  est.taus = ec.taus;
  for (double tau : ec.taus) {
    CoverResult c = r_inv_estimate(ctx.sys, pair, tau, pool, ec.inflate, ec.step, ctx.cfg.threads);
    est.infinite.push_back(c.infinite);
    est.r_counts.push_back(c.infinite ? 0.0 : static_cast<double>(c.count));
  }
  est.fit = h_inv_direct(est.taus, est.r_counts);

  // Lift samples: hyperbolic equilibria inside Q of constant controls on a 3-per-axis lattice.
  std::vector<LiftSample> lift;
  StateGrid eq_grid(ctx.sys.domain(), 0.1);
  for (const Vec& c : control_lattice(pool_range, 3)) {
    for (const auto& e : equilibria(ctx.sys, c, eq_grid).points)
      if (e.hyperbolic && Q.hull.contains(e.point, 1e-9)) lift.push_back({ControlFunction::constant(c), e.point});
  }
  FormulaEstimate f;
  if (!lift.empty()) {
    SplittingOptions so = ctx.cfg.splitting;
    f = h_inv_formula(ctx.sys, lift, ec.formula_tau, so);
  }
  est.formula_value = f.value;
  est.samples_used = f.samples_used;

  Json j = header(ctx);
  j["hull"] = to_json(Q.hull);
  j["K"] = to_json(K);
  j["K_samples"] = samples.size();
  j["pool_size"] = pool.size();
  j["probe_T"] = ec.probe_T;
  j["inflate"] = ec.inflate;
  Json taus = Json::array(), counts = Json::array(), inf = Json::array();
  for (std::size_t i = 0; i < est.taus.size(); ++i) {
    taus.push_back(est.taus[i]);
    if (est.infinite[i]) counts.push_back(nullptr);
    else counts.push_back(static_cast<long long>(est.r_counts[i]));
    inf.push_back(static_cast<bool>(est.infinite[i]));
  }
  j["taus"] = taus;
  j["r_counts"] = counts;
  j["infinite"] = inf;
  j["slope_defined"] = est.fit.defined;
  j["slope"] = est.fit.slope;
  j["intercept"] = est.fit.intercept;
  j["residual"] = est.fit.residual;
  j["formula_tau"] = ec.formula_tau;
  if (lift.empty()) j["formula_value"] = nullptr;
  else j["formula_value"] = est.formula_value;
  Json per = Json::array();
  for (double p : f.per_sample) per.push_back(p);
  j["formula_per_sample"] = per;
  j["samples_used"] = est.samples_used;
  write_json(ctx, "report.json", j);

  std::ostringstream csv;
  csv << "tau,log_r\n";
  char buf[64];
  for (std::size_t i = 0; i < est.taus.size(); ++i) {
    if (est.infinite[i]) std::snprintf(buf, sizeof buf, "%.17g,inf\n", est.taus[i]);
    else std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", est.taus[i], std::log(est.r_counts[i]));
    csv << buf;
  }
  write_file((ctx.out / "entropy.csv").string(), csv.str());

  std::string line = "entropy counts";
  for (std::size_t i = 0; i < est.taus.size(); ++i)
    line += " " + (est.infinite[i] ? std::string("inf") : std::to_string(static_cast<long long>(est.r_counts[i])));
  line += est.fit.defined ? ", slope " + fmt(est.fit.slope) : ", slope undefined";
  line += lift.empty() ? ", no lift samples" : ", formula " + fmt(est.formula_value);
  return line;
}

std::string cmd_metric_probe(const Context& ctx) {
  const auto& mc = ctx.cfg.metric;
  ControlFunction u = mc.u ? *mc.u : center_control(ctx);
  ControlFunction v = mc.v ? *mc.v : random_control(ctx.sys.range(), 8, mix_seed(ctx.cfg.seed, 0x3e7));
  TestFunctionFamily family(ctx.sys.control_dim(), FamilyConfig{mc.depth, 1.0});
  if (static_cast<std::size_t>(mc.N) > family.size())
    throw InputError("config: metric.N: exceeds the family size " + std::to_string(family.size()));
  MetricValue d = du_distance(u, v, family, static_cast<std::size_t>(mc.N));
  SupShiftDistance sup = sup_shift_distance(u, v, family, static_cast<std::size_t>(mc.N), mc.t_samples);
  int N_eps = tail_N_for_epsilon(mc.eps);
  double delta = delta_for_epsilon(mc.eps, family);

  Json j = header(ctx);
  j["family_hash"] = hex64(family.hash());
  j["family_size"] = family.size();
  j["depth"] = mc.depth;
  j["N"] = mc.N;
  j["u"] = control_json(u);
  j["v"] = control_json(v);
  j["d"] = d.value;
  j["tail_bound"] = d.tail_bound;
  j["sup_norm"] = sup_norm_distance(u, v);
  j["sup_shift"] = sup.value;
  j["sampled"] = sup.sampled;
  Json recs = Json::array();
  for (const auto& s : sup.samples) {
    Json r = Json::object();
    r["t"] = s.t;
    r["d"] = s.d;
    recs.push_back(r);
  }
  j["records"] = recs;
  j["eps"] = mc.eps;
  j["N_eps"] = N_eps;
  j["delta"] = delta;
  write_json(ctx, "report.json", j);
  return "d_U " + fmt(d.value) + " (tail " + fmt(d.tail_bound) + "), sampled sup over shifts " + fmt(sup.value) +
         ", delta(" + fmt(mc.eps) + ") = " + fmt(delta);
}

}  // namespace

int run_command(const std::vector<std::string>& argv) {
  CLI::App app{"chainlift: chain control sets, hyperbolic lifts, shadowing and invariance entropy"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Flags {
    std::string config;
    std::string out = ".";
    int threads = 0;
    std::optional<std::uint64_t> seed;
  } flags;

  const std::vector<std::pair<std::string, std::string>> names = {
      {"chain", "cell graph and chain control sets (cells.csv, summary.json)"},
      {"splitting", "hyperbolic splitting at a base point (report.json, exponents.csv)"},
      {"shadow", "shadow a perturbed orbit (report.json)"},
      {"transport", "fiber transport along a control homotopy (report.json)"},
      {"graph-verify", "check that the lift is a graph over control space (report.json)"},
      {"entropy", "invariance entropy estimates (report.json, entropy.csv)"},
      {"metric-probe", "control metric and shift bound (report.json)"},
  };
  for (const auto& [name, desc] : names) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", flags.config, "JSON config file")->required();
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", flags.seed, "seed, overrides the config");
  }

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::string command = app.get_subcommands().front()->get_name();
  auto start = std::chrono::steady_clock::now();
  try {
    std::ifstream in(flags.config);
    if (!in) throw InputError("config: cannot open " + flags.config);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("config: " + flags.config + ": " + e.what());
    }
    if (flags.seed) {
      if (!doc.is_object()) throw InputError("config: expected an object");
      doc["seed"] = *flags.seed;
    }
    RunConfig cfg = parse_config(doc);
    if (flags.threads > 0) {
      cfg.threads = flags.threads;
      cfg.chain.threads = flags.threads;
      cfg.fiber.threads = flags.threads;
    }
    std::filesystem::path out = flags.out;
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw InputError("--out: cannot create " + out.string() + ": " + ec.message());

    Context ctx{command, cfg, make_system(cfg.system), out};
    std::string line;
    if (command == "chain") line = cmd_chain(ctx);
    else if (command == "splitting") line = cmd_splitting(ctx);
    else if (command == "shadow") line = cmd_shadow(ctx);
    else if (command == "transport") line = cmd_transport(ctx);
    else if (command == "graph-verify") line = cmd_graph_verify(ctx);
    else if (command == "entropy") line = cmd_entropy(ctx);
    else line = cmd_metric_probe(ctx);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << command << ": " << line << " [" << fmt(secs) << " s]" << std::endl;
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const NoConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << " (after " << e.defect_trace().size() << " Newton steps)"
              << std::endl;
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace chainlift::cli
