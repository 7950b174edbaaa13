#pragma once

#include <cstdint>
#include <vector>

#include "chainlift/control.hpp"

namespace chainlift {

/// One member e_j * 1_[start, end) of the test-function family.
struct TestFunction {
  int coordinate;
  double start;
  double end;

  double l1_norm() const { return end - start; }
};

struct FamilyConfig {
  int depth = 6;       // enumeration depth
  double scale = 1.0;  // time unit of the dyadic support grid (seconds)
};

/// Countable family of vector-valued indicator functions with dyadic supports.
///
/// Depth d adds every interval [k 2^-j, (k+1) 2^-j) with j <= d, k 2^-j in
/// [-d, d] and right end <= d + 1 that was not present at depth d - 1; inside
/// one depth members are ordered by (j, k, coordinate). Depth 0 is [0, 1), so
/// the first member is e_1 * 1_[0,1) for scale 1.
class TestFunctionFamily {
 public:
  TestFunctionFamily(int control_dim, FamilyConfig config = {});

  int control_dim() const { return control_dim_; }
  const FamilyConfig& config() const { return config_; }
  std::size_t size() const { return members_.size(); }
  /// 1-based, matching the series index.
  const TestFunction& member(std::size_t n) const;
  /// max_{1 <= n <= N} |x_n|_1.
  double max_l1_norm(std::size_t N) const;
  std::uint64_t hash() const { return hash_; }

 private:
  int control_dim_;
  FamilyConfig config_;
  std::vector<TestFunction> members_;
  std::uint64_t hash_;
};

/// A truncated series value with its tail bound sum_{n > N} 2^-n = 2^-N.
struct MetricValue {
  double value = 0.0;
  double tail_bound = 0.0;
  std::uint64_t family_hash = 0;
};

/// int_a^b u_j(t) dt, exact for piecewise-constant u.
double integrate_component(const ControlFunction& u, int coordinate, double a, double b);

/// sum_{n <= N} 2^-n |I_n| / (1 + |I_n|), I_n = int <u - v, x_n> dt.
MetricValue du_distance(const ControlFunction& u, const ControlFunction& v, const TestFunctionFamily& family,
                        std::size_t N);

/// Smallest N >= 1 with 2^-N < eps / 2; eps in (0, 1).
int tail_N_for_epsilon(double eps);

/// eps / (2 c) for a known bound c on the first N(eps) L1 norms.
double delta_from_bound(double eps, double c);

/// eps / (2 max_{n <= N(eps)} |x_n|_1).
double delta_for_epsilon(double eps, const TestFunctionFamily& family);

struct ShiftSample {
  double t;
  double d;
};

/// Max of du(theta_t u, theta_t v) over a time grid. Always a sampled lower
/// bound for the supremum over all t.
struct SupShiftDistance {
  double value = 0.0;
  bool sampled = true;
  double tail_bound = 0.0;
  std::uint64_t family_hash = 0;
  std::vector<ShiftSample> samples;
};

SupShiftDistance sup_shift_distance(const ControlFunction& u, const ControlFunction& v,
                                    const TestFunctionFamily& family, std::size_t N,
                                    const std::vector<double>& t_samples);

}  // namespace chainlift
