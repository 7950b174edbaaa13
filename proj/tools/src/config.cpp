#include "chainlift/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "chainlift/errors.hpp"

namespace chainlift::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InputError("config: " + path + ": " + msg);
}

// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  Section child(const std::string& key) {
    const json* v = get(key);
    static const json empty = json::object();
    return Section(v ? *v : empty, at(key));
  }

  void number(const std::string& key, double& out, double lo, double hi, bool open_lo = false) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_number()) fail(at(key), "expected a number");
    double x = v->get<double>();
    if (!std::isfinite(x) || x < lo || x > hi || (open_lo && x == lo)) {
      std::ostringstream os;
      os << "value " << x << " outside " << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
      fail(at(key), os.str());
    }
    out = x;
  }

  void positive(const std::string& key, double& out) { number(key, out, 0.0, HUGE_VAL, true); }

  void integer(const std::string& key, int& out, long long lo, long long hi) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_number_integer()) fail(at(key), "expected an integer");
    long long x = v->get<long long>();
    if (x < lo || x > hi) fail(at(key), "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "]");
    out = static_cast<int>(x);
  }

  void seed(const std::string& key, std::uint64_t& out) {
    const json* v = get(key);
    if (!v) return;
    if (v->is_number_unsigned()) {
      out = v->get<std::uint64_t>();
    } else if (v->is_number_integer() && v->get<long long>() >= 0) {
      out = static_cast<std::uint64_t>(v->get<long long>());
    } else {
      fail(at(key), "expected a non-negative integer");
    }
  }

  std::optional<Vec> vec(const std::string& key, int dim = -1) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    return to_vec(*v, at(key), dim);
  }

  std::optional<std::vector<double>> list(const std::string& key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    Vec x = to_vec(*v, at(key), -1);
    return std::vector<double>(x.data(), x.data() + x.size());
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(at(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

  static Vec to_vec(const json& v, const std::string& path, int dim) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    if (dim >= 0 && static_cast<int>(v.size()) != dim)
      fail(path, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
        fail(path + "[" + std::to_string(i) + "]", "expected a finite number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Box read_box(Section s, int dim) {
  auto lo = s.vec("lo", dim);
  auto hi = s.vec("hi", dim);
  if (!lo || !hi) fail(s.path(), "needs lo and hi");
  for (Eigen::Index i = 0; i < lo->size(); ++i)
    if (!((*lo)[i] < (*hi)[i])) fail(s.at("lo"), "lo must be below hi on every axis");
  s.finish();
  return Box(*lo, *hi);
}

std::optional<ControlFunction> read_control(Section& parent, const std::string& key, int m) {
  if (!parent.has(key)) {
    parent.get(key);
    return std::nullopt;
  }
  Section s = parent.child(key);
  std::optional<ControlFunction> out;
  if (s.has("constant")) {
    if (s.has("breakpoints") || s.has("values")) fail(s.path(), "use either constant or breakpoints/values");
    out = ControlFunction::constant(*s.vec("constant", m));
  } else {
    auto bps = s.list("breakpoints");
    const json* vals = s.get("values");
    if (!bps || !vals) fail(s.path(), "needs constant or breakpoints and values");
    if (!vals->is_array() || vals->size() != bps->size() + 1)
      fail(s.at("values"), "expected one more value than breakpoints");
    std::vector<Vec> values;
    for (std::size_t i = 0; i < vals->size(); ++i)
      values.push_back(Section::to_vec((*vals)[i], s.at("values") + "[" + std::to_string(i) + "]", m));
    for (std::size_t i = 1; i < bps->size(); ++i)
      if (!((*bps)[i - 1] < (*bps)[i])) fail(s.at("breakpoints"), "must be strictly increasing");
    out = ControlFunction(*bps, std::move(values));
  }
  s.finish();
  return out;
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  Section root(doc, "");

  {
    Section s = root.child("system");
    auto id = s.string("id");
    if (!id) fail("system.id", "missing");
    cfg.system.id = *id;
    auto defaults = catalog_defaults(*id);  // rejects unknown ids
    if (s.has("params")) {
      Section p = s.child("params");
      for (auto& [name, value] : defaults) p.number(name, value, -1e6, 1e6);
      p.finish();
    } else {
      s.get("params");
    }
    cfg.system.params = defaults;
    // Build once with catalog defaults to learn the dimensions.
    ControlAffineSystem probe = make_system(SystemSpec{*id, defaults, std::nullopt, std::nullopt});
    int n = probe.state_dim();
    int m = probe.control_dim();
    if (s.has("domain")) cfg.system.domain = read_box(s.child("domain"), n);
    else s.get("domain");
    if (s.has("range")) {
      Section r = s.child("range");
      auto center = r.vec("center", m);
      auto hw = r.vec("half_widths", m);
      double rho = 1.0;
      r.number("rho", rho, 0.0, 1.0, true);
      r.finish();
      Vec c = center ? *center : probe.range().center();
      Vec w = hw ? *hw : probe.range().half_widths();
      for (Eigen::Index i = 0; i < w.size(); ++i)
        if (!(w[i] > 0)) fail("system.range.half_widths", "entries must be positive");
      cfg.system.range = ControlRange(c, w, rho);
    } else {
      s.get("range");
    }
    s.finish();
  }
  ControlAffineSystem sys = make_system(cfg.system);
  const int n = sys.state_dim();
  const int m = sys.control_dim();

  {
    Section s = root.child("grid");
    s.positive("h", cfg.grid_h);
    s.finish();
  }
  {
    Section s = root.child("chain");
    s.positive("T", cfg.chain.T);
    s.positive("eps", cfg.chain.eps);
    s.integer("samples_per_cell", cfg.chain.samples_per_cell, 1, 1000);
    s.integer("controls_per_axis", cfg.chain.controls_per_axis, 1, 1000);
    s.positive("step", cfg.chain.step);
    s.number("viability_factor", cfg.chain.viability_factor, 0.0, 1e3);
    s.finish();
    if (cfg.chain.eps < cfg.grid_h) fail("chain.eps", "must be at least grid.h");
  }
  {
    Section s = root.child("splitting");
    s.positive("window_T", cfg.splitting.window_T);
    s.positive("step", cfg.splitting.step);
    s.positive("gap_tol", cfg.splitting.gap_tol);
    s.positive("reortho", cfg.splitting.reortho);
    cfg.splitting_x = s.vec("x", n);
    cfg.splitting_u = read_control(s, "control", m);
    s.finish();
  }
  {
    Section s = root.child("shadow");
    s.integer("K", cfg.shadow.K, 1, 100000);
    s.positive("orbit_tol", cfg.shadow.orbit_tol);
    s.integer("max_iters", cfg.shadow.max_iters, 1, 10000);
    s.positive("step", cfg.shadow.step);
    s.positive("alpha", cfg.shadow.alpha);
    cfg.shadow.x = s.vec("x", n);
    cfg.shadow.control = read_control(s, "control", m);
    s.finish();
  }
  {
    Section s = root.child("metric");
    s.integer("depth", cfg.metric.depth, 0, 12);
    s.integer("N", cfg.metric.N, 1, 1000000);
    s.number("eps", cfg.metric.eps, 0.0, 1.0, true);
    if (cfg.metric.eps >= 1.0) fail("metric.eps", "must be below 1");
    if (auto t = s.list("t_samples")) cfg.metric.t_samples = *t;
    cfg.metric.u = read_control(s, "u", m);
    cfg.metric.v = read_control(s, "v", m);
    s.finish();
  }
  {
    Section s = root.child("fiber");
    s.positive("T_f", cfg.fiber.T_f);
    s.number("inflate", cfg.fiber.inflate, 1.0, 100.0);
    s.positive("seed_h", cfg.fiber.seed_h);
    s.positive("min_survival", cfg.fiber.min_survival);
    s.positive("step", cfg.fiber.step);
    s.finish();
  }
  {
    Section s = root.child("transport");
    cfg.transport.u = read_control(s, "u", m);
    cfg.transport.v = read_control(s, "v", m);
    cfg.transport.x = s.vec("x", n);
    s.number("eps_step", cfg.transport.eps_step, 0.0, 1.0, true);
    if (cfg.transport.eps_step >= 1.0) fail("transport.eps_step", "must be below 1");
    s.integer("min_legs", cfg.transport.min_legs, 1, 100000);
    s.finish();
  }
  {
    Section s = root.child("graph_verify");
    s.integer("n_controls", cfg.graph_verify.n_controls, 0, 1000000);
    cfg.graph_verify.u0 = s.vec("u0", m);
    s.integer("control_pieces", cfg.graph_verify.control_pieces, 1, 100000);
    s.integer("continuity_pairs", cfg.graph_verify.continuity_pairs, 0, 100000);
    s.finish();
  }
  {
    Section s = root.child("entropy");
    if (auto t = s.list("taus")) {
      for (double tau : *t)
        if (!(tau > 0)) fail("entropy.taus", "horizons must be positive");
      cfg.entropy.taus = *t;
    }
    if (s.has("K")) cfg.entropy.K = read_box(s.child("K"), n);
    else s.get("K");
    s.integer("K_points", cfg.entropy.K_points, 1, 100000);
    s.integer("pool_per_axis", cfg.entropy.pool_per_axis, 1, 100000);
    s.number("pool_rho", cfg.entropy.pool_rho, 0.0, 1.0, true);
    s.positive("probe_T", cfg.entropy.probe_T);
    s.number("inflate", cfg.entropy.inflate, 1.0, 100.0);
    s.positive("formula_tau", cfg.entropy.formula_tau);
    s.positive("step", cfg.entropy.step);
    s.finish();
  }
  if (root.has("Q")) {
    Section s = root.child("Q");
    if (s.has("summary")) {
      cfg.Q_summary = s.string("summary");
      s.finish();
    } else {
      cfg.Q = read_box(s, n);
    }
  } else {
    root.get("Q");
  }
  root.seed("seed", cfg.seed);
  root.integer("threads", cfg.threads, 1, 1024);
  if (auto out = root.string("output_dir")) cfg.output_dir = *out;
  root.finish();

  cfg.chain.seed = cfg.seed;
  cfg.chain.threads = cfg.threads;
  cfg.fiber.threads = cfg.threads;
  cfg.hash = fnv1a(doc.dump());
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config: " + path + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace chainlift::cli
