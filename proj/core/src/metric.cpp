#include "chainlift/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chainlift/errors.hpp"

namespace chainlift {

namespace {

bool in_depth(int d, int j, long long k) {
  if (d < 0 || j > d) return false;
  const double len = std::ldexp(1.0, -j);
  const double s = static_cast<double>(k) * len;
  return s >= -d && s <= d && s + len <= d + 1;
}

}  // namespace

TestFunctionFamily::TestFunctionFamily(int control_dim, FamilyConfig config)
    : control_dim_(control_dim), config_(config) {
  if (control_dim_ < 1) throw InputError("test family: control dimension must be positive");
  if (config_.depth < 0 || config_.depth > 12) throw InputError("test family: depth must lie in [0, 12]");
  if (!(config_.scale > 0.0) || !std::isfinite(config_.scale)) {
    throw InputError("test family: scale must be positive");
  }
  for (int d = 0; d <= config_.depth; ++d) {
    for (int j = 0; j <= d; ++j) {
      const long long per_unit = 1LL << j;
      for (long long k = -static_cast<long long>(d) * per_unit; k <= static_cast<long long>(d) * per_unit; ++k) {
        if (!in_depth(d, j, k) || in_depth(d - 1, j, k)) continue;
        const double len = std::ldexp(1.0, -j);
        for (int c = 0; c < control_dim_; ++c) {
          members_.push_back({c, config_.scale * static_cast<double>(k) * len,
                              config_.scale * (static_cast<double>(k) + 1.0) * len});
        }
      }
    }
  }
  std::ostringstream os;
  os.precision(17);
  os << "dyadic-indicators;m=" << control_dim_ << ";depth=" << config_.depth << ";scale=" << config_.scale;
  hash_ = fnv1a(os.str());
}

const TestFunction& TestFunctionFamily::member(std::size_t n) const {
  if (n < 1 || n > members_.size()) throw InputError("test family: member index out of range");
  return members_[n - 1];
}

double TestFunctionFamily::max_l1_norm(std::size_t N) const {
  if (N < 1 || N > members_.size()) throw InputError("test family: truncation exceeds family size");
  double c = 0.0;
  for (std::size_t n = 0; n < N; ++n) c = std::max(c, members_[n].l1_norm());
  return c;
}

double integrate_component(const ControlFunction& u, int coordinate, double a, double b) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  double left = a;
  auto cuts = u.breakpoints_between(a, b);
  cuts.push_back(b);
  for (double right : cuts) {
    total += u(0.5 * (left + right))[coordinate] * (right - left);
    left = right;
  }
  return total;
}

MetricValue du_distance(const ControlFunction& u, const ControlFunction& v, const TestFunctionFamily& family,
                        std::size_t N) {
  if (u.dim() != family.control_dim() || v.dim() != family.control_dim()) {
    throw InputError("du_distance: control and family dimensions differ");
  }
  if (N < 1 || N > family.size()) throw InputError("du_distance: truncation N outside [1, family size]");
  MetricValue out;
  out.family_hash = family.hash();
  out.tail_bound = std::ldexp(1.0, -static_cast<int>(N));
  double weight = 0.5;
  for (std::size_t n = 1; n <= N; ++n, weight *= 0.5) {
    const TestFunction& x = family.member(n);
    const double s = std::abs(integrate_component(u, x.coordinate, x.start, x.end) -
                              integrate_component(v, x.coordinate, x.start, x.end));
    out.value += weight * s / (1.0 + s);
  }
  return out;
}

int tail_N_for_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("tail_N_for_epsilon: eps must lie in (0, 1)");
  int N = 1;
  while (!(std::ldexp(1.0, -N) < eps / 2.0)) ++N;
  return N;
}

double delta_from_bound(double eps, double c) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("delta: eps must lie in (0, 1)");
  if (!(c > 0.0)) throw InputError("delta: L1 bound must be positive");
  return eps / (2.0 * c);
}

double delta_for_epsilon(double eps, const TestFunctionFamily& family) {
  const int N = tail_N_for_epsilon(eps);
  return delta_from_bound(eps, family.max_l1_norm(static_cast<std::size_t>(N)));
}

SupShiftDistance sup_shift_distance(const ControlFunction& u, const ControlFunction& v,
                                    const TestFunctionFamily& family, std::size_t N,
                                    const std::vector<double>& t_samples) {
  if (t_samples.empty()) throw InputError("sup_shift_distance: empty time grid");
  SupShiftDistance out;
  out.family_hash = family.hash();
  out.tail_bound = std::ldexp(1.0, -static_cast<int>(N));
  for (double t : t_samples) {
    const double d = du_distance(shift(u, t), shift(v, t), family, N).value;
    out.samples.push_back({t, d});
    out.value = std::max(out.value, d);
  }
  return out;
}

}  // namespace chainlift
