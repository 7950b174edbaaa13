#include "chainlift/grid.hpp"

#include <algorithm>
#include <cmath>

#include "chainlift/errors.hpp"

namespace chainlift {

StateGrid::StateGrid(Domain domain, double h) : StateGrid(domain, Vec::Constant(domain.dim(), h)) {}

StateGrid::StateGrid(Domain domain, Vec h) : domain_(std::move(domain)) {
  if (h.size() != domain_.dim()) throw InputError("grid: resolution has wrong dimension");
  const Vec extent = domain_.bounds().hi - domain_.bounds().lo;
  widths_.resize(h.size());
  total_ = 1;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !std::isfinite(h[i])) throw InputError("grid: resolution h must be positive");
    const double raw = std::ceil(extent[i] / h[i] - 1e-9);
    if (raw > 1e7) throw InputError("grid: too many cells along one axis");
    const int c = std::max(1, static_cast<int>(raw));
    counts_.push_back(c);
    widths_[i] = extent[i] / c;
    total_ *= static_cast<std::size_t>(c);
  }
  if (total_ > 50'000'000) throw InputError("grid: cell count exceeds 5e7");
}

std::vector<int> StateGrid::multi_index(std::size_t cell) const {
  std::vector<int> idx(counts_.size());
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    idx[a] = static_cast<int>(cell % static_cast<std::size_t>(counts_[a]));
    cell /= static_cast<std::size_t>(counts_[a]);
  }
  return idx;
}

std::size_t StateGrid::linear_index(const std::vector<int>& idx) const {
  std::size_t cell = 0;
  for (std::size_t a = counts_.size(); a-- > 0;) {
    cell = cell * static_cast<std::size_t>(counts_[a]) + static_cast<std::size_t>(idx[a]);
  }
  return cell;
}

Box StateGrid::cell_box(std::size_t cell) const {
  const auto idx = multi_index(cell);
  Vec lo(dim()), hi(dim());
  for (int a = 0; a < dim(); ++a) {
    lo[a] = domain_.bounds().lo[a] + idx[a] * widths_[a];
    hi[a] = domain_.bounds().lo[a] + (idx[a] + 1) * widths_[a];
  }
  return Box(lo, hi);
}

Vec StateGrid::cell_center(std::size_t cell) const {
  const auto idx = multi_index(cell);
  Vec c(dim());
  for (int a = 0; a < dim(); ++a) c[a] = domain_.bounds().lo[a] + (idx[a] + 0.5) * widths_[a];
  return c;
}

long long StateGrid::locate(const Vec& x) const {
  const Vec y = domain_.wrap(x);
  std::vector<int> idx(counts_.size());
  for (int a = 0; a < dim(); ++a) {
    const double r = (y[a] - domain_.bounds().lo[a]) / widths_[a];
    if (!domain_.periodic() && (r < 0.0 || r > counts_[a])) return -1;
    idx[a] = std::clamp(static_cast<int>(std::floor(r)), 0, counts_[a] - 1);
  }
  return static_cast<long long>(linear_index(idx));
}

std::vector<std::size_t> StateGrid::cells_near(const Vec& x, double radius) const {
  const Vec y = domain_.wrap(x);
  const int n = dim();
  std::vector<int> lo(n), hi(n);
  for (int a = 0; a < n; ++a) {
    const double r = (y[a] - domain_.bounds().lo[a]) / widths_[a] - 0.5;
    lo[a] = static_cast<int>(std::floor(r - radius / widths_[a]));
    hi[a] = static_cast<int>(std::ceil(r + radius / widths_[a]));
    if (!domain_.periodic()) {
      lo[a] = std::max(lo[a], 0);
      hi[a] = std::min(hi[a], counts_[a] - 1);
      if (lo[a] > hi[a]) return {};
    } else if (hi[a] - lo[a] + 1 > counts_[a]) {
      lo[a] = 0;
      hi[a] = counts_[a] - 1;
    }
  }
  std::vector<std::size_t> out;
  std::vector<int> cur(lo);
  std::vector<int> wrapped(n);
  while (true) {
    for (int a = 0; a < n; ++a) wrapped[a] = ((cur[a] % counts_[a]) + counts_[a]) % counts_[a];
    const std::size_t cell = linear_index(wrapped);
    if (domain_.distance(y, cell_center(cell)) < radius) out.push_back(cell);
    int a = 0;
    while (a < n && ++cur[a] > hi[a]) {
      cur[a] = lo[a];
      ++a;
    }
    if (a == n) break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> StateGrid::neighbors(std::size_t cell) const {
  const auto base = multi_index(cell);
  const int n = dim();
  std::vector<std::size_t> out;
  std::vector<int> off(n, -1);
  while (true) {
    bool self = std::all_of(off.begin(), off.end(), [](int o) { return o == 0; });
    bool valid = !self;
    std::vector<int> idx(n);
    for (int a = 0; a < n && valid; ++a) {
      int v = base[a] + off[a];
      if (domain_.periodic()) {
        v = ((v % counts_[a]) + counts_[a]) % counts_[a];
      } else if (v < 0 || v >= counts_[a]) {
        valid = false;
      }
      idx[a] = v;
    }
    if (valid) {
      const std::size_t c = linear_index(idx);
      if (c != cell) out.push_back(c);
    }
    int a = 0;
    while (a < n && ++off[a] > 1) {
      off[a] = -1;
      ++a;
    }
    if (a == n) break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace chainlift
