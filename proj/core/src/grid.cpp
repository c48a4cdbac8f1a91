#include "epislfv/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace epislfv {

Grid::Grid(const Region& region, double cell_edge)
    : region_(region), cell_edge_(cell_edge), inv_edge_(1.0 / cell_edge) {
  region_.validate();
  if (!(cell_edge > 0.0)) throw std::invalid_argument("Grid: cell edge must be positive");
  const int d = region_.dimension;
  cell_volume_ = std::pow(cell_edge, d);
  for (int i = 0; i < d; ++i) {
    const double ratio = region_.sides[i] / cell_edge;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
      throw std::invalid_argument("Grid: side lengths must be integer multiples of the cell edge");
    counts_[i] = static_cast<long long>(rounded);
    cell_count_ *= static_cast<std::size_t>(counts_[i]);
  }
  for (int i = 1; i < d; ++i) strides_[i] = strides_[i - 1] * counts_[i - 1];
}

CellCoords Grid::coords_of(const Point& p) const noexcept {
  CellCoords c{0, 0, 0};
  for (int i = 0; i < dimension(); ++i)
    c[i] = static_cast<long long>(std::floor(p[i] / cell_edge_));
  return c;
}

long long Grid::index_of_coords(CellCoords c) const noexcept {
  long long index = 0;
  for (int i = dimension() - 1; i >= 0; --i) {
    long long ci = c[i];
    const long long n = counts_[i];
    if (region_.is_torus()) {
      if (ci < 0) {
        ci += n;
      } else if (ci >= n) {
        ci -= n;
      }
      if (ci < 0 || ci >= n) {
        ci %= n;
        if (ci < 0) ci += n;
      }
    } else if (ci < 0 || ci >= n) {
      return -1;
    }
    index = index * n + ci;
  }
  return index;
}

std::size_t Grid::index_of(const Point& p) const {
  if (!region_.is_torus() && !region_.contains(p))
    throw std::invalid_argument("Grid: point outside the region");
  long long index = 0;
  for (int i = 0; i < dimension(); ++i) {
    auto c = static_cast<long long>(std::floor(p[i] * inv_edge_));
    // Points on the closed upper face (or rounded onto it) belong to the last cell.
    if (c >= counts_[i]) c = region_.is_torus() ? c % counts_[i] : counts_[i] - 1;
    if (c < 0) {
      if (!region_.is_torus()) throw std::invalid_argument("Grid: point outside the region");
      c = ((c % counts_[i]) + counts_[i]) % counts_[i];
    }
    index += c * strides_[i];
  }
  return static_cast<std::size_t>(index);
}

CellCoords Grid::coords_of_index(std::size_t index) const noexcept {
  CellCoords c{0, 0, 0};
  auto rest = static_cast<long long>(index);
  for (int i = 0; i < dimension(); ++i) {
    c[i] = rest % counts_[i];
    rest /= counts_[i];
  }
  return c;
}

Point Grid::cell_center(std::size_t index) const noexcept {
  const CellCoords c = coords_of_index(index);
  Point p;
  for (int i = 0; i < dimension(); ++i) p[i] = (static_cast<double>(c[i]) + 0.5) * cell_edge_;
  return p;
}

std::vector<std::size_t> Grid::rasterize(const Shape& shape) const {
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < cell_count_; ++c)
    if (shape_contains(shape, cell_center(c), dimension(), region_.torus_sides())) cells.push_back(c);
  return cells;
}

Stencil::Stencil(double radius, double cell_edge, int dim) {
  require_sim_dimension(dim);
  if (!(radius > 0.0) || !(cell_edge > 0.0))
    throw std::invalid_argument("Stencil: radius and cell edge must be positive");
  reach_ = static_cast<long long>(std::floor(radius / cell_edge)) + 1;
  // Same closed-ball rule as grid_ball_count.
  const double budget = radius * radius * (1.0 + 1e-12);
  const double h2 = cell_edge * cell_edge;
  const long long lim1 = dim >= 2 ? reach_ : 0;
  const long long lim2 = dim >= 3 ? reach_ : 0;
  for (long long k2 = -lim2; k2 <= lim2; ++k2)
    for (long long k1 = -lim1; k1 <= lim1; ++k1)
      for (long long k0 = -reach_; k0 <= reach_; ++k0) {
        const double s = static_cast<double>(k0 * k0) * h2 + static_cast<double>(k1 * k1) * h2 +
                         static_cast<double>(k2 * k2) * h2;
        if (s <= budget) offsets_.push_back({k0, k1, k2});
      }
  long long max_reach = 0;
  for (const auto& o : offsets_) max_reach = std::max(max_reach, std::llabs(o[0]));
  reach_ = max_reach;
}

}  // namespace epislfv
