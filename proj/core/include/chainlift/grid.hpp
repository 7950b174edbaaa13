#pragma once

#include <vector>

#include "chainlift/geometry.hpp"

namespace chainlift {

/// Uniform tiling of a domain by axis-aligned cells. Each axis gets
/// ceil(extent / h) cells, so the realised width never exceeds h.
/// Linear cell indices are row-major with axis 0 fastest.
class StateGrid {
 public:
  StateGrid(Domain domain, double h);
  StateGrid(Domain domain, Vec h);

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  const Vec& widths() const { return widths_; }
  const std::vector<int>& counts() const { return counts_; }
  std::size_t cell_count() const { return total_; }

  std::vector<int> multi_index(std::size_t cell) const;
  std::size_t linear_index(const std::vector<int>& idx) const;
  Box cell_box(std::size_t cell) const;
  Vec cell_center(std::size_t cell) const;
  /// Cell containing x (after wrapping); -1 if x lies outside a box domain.
  long long locate(const Vec& x) const;

  /// Cells whose center lies at distance < radius from x, ascending.
  std::vector<std::size_t> cells_near(const Vec& x, double radius) const;
  /// Cells sharing at least a corner with `cell` (torus aware), ascending.
  std::vector<std::size_t> neighbors(std::size_t cell) const;

 private:
  Domain domain_;
  Vec widths_;
  std::vector<int> counts_;
  std::size_t total_ = 0;
};

}  // namespace chainlift
