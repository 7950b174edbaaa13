#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chainlift/system.hpp"

namespace chainlift {

/// Catalog request: identifier, named parameters, optional domain/range overrides.
/// For periodic systems `domain` is the fundamental domain.
struct SystemSpec {
  std::string id;
  std::map<std::string, double> params;
  std::optional<Box> domain;
  std::optional<ControlRange> range;
};

/// Known identifiers:
///   "scalar_affine"  x' = a x + u                                   (a)
///   "saddle2d"       x' = a x + u1,  y' = -b y + u2                 (a, b)
///   "torus_shear"    x' = a sin x + u1,  y' = -b sin y + k sin x + u2 on the
///                    flat torus [-pi, pi)^2                        (a, b, k)
///   "integrator"     x' = u                                         ()
///   "zero_dynamics"  x' = 0 * u                                     ()
///   "bistable_cubic" x' = x - x^3 + u                               ()
std::vector<std::string> catalog_ids();

/// Default parameter values for `id`; throws InputError for unknown ids.
std::map<std::string, double> catalog_defaults(const std::string& id);

ControlAffineSystem make_system(const SystemSpec& spec);

ControlAffineSystem scalar_affine(double a = 1.0);
ControlAffineSystem saddle2d(double a = 1.0, double b = 1.0);
ControlAffineSystem torus_shear(double a = 1.0, double b = 1.0, double k = 0.5);

}  // namespace chainlift
