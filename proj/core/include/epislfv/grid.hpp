#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "epislfv/event_stream.hpp"
#include "epislfv/geometry.hpp"

namespace epislfv {

using CellCoords = std::array<long long, kMaxDim>;

/// Regular grid of cubic cells of edge h covering a Region. Cell (i, j, ..)
/// spans [i h, (i+1) h) x ... and is represented by its centre.
class Grid {
 public:
  Grid(const Region& region, double cell_edge);

  int dimension() const noexcept { return region_.dimension; }
  const Region& region() const noexcept { return region_; }
  double cell_edge() const noexcept { return cell_edge_; }
  double cell_volume() const noexcept { return cell_volume_; }
  std::size_t cell_count() const noexcept { return cell_count_; }
  long long cells_along(int axis) const noexcept { return counts_[static_cast<std::size_t>(axis)]; }
  /// Index step per unit move along each axis (first axis fastest).
  long long stride(int axis) const noexcept { return strides_[static_cast<std::size_t>(axis)]; }

  /// Unwrapped integer coordinates floor(x / h); may lie outside the grid.
  CellCoords coords_of(const Point& p) const noexcept;
  /// Index of the cell containing p (wrapped on the torus, clamped at the
  /// closed upper face of a truncated box). p must lie in the region.
  std::size_t index_of(const Point& p) const;
  /// Index of in-range coordinates after torus wrapping; -1 when outside a
  /// truncated box.
  long long index_of_coords(CellCoords c) const noexcept;
  CellCoords coords_of_index(std::size_t index) const noexcept;
  Point cell_center(std::size_t index) const noexcept;

  std::vector<std::size_t> rasterize(const Shape& shape) const;

 private:
  Region region_;
  double cell_edge_;
  double cell_volume_;
  double inv_edge_;
  CellCoords counts_{1, 1, 1};
  CellCoords strides_{1, 1, 1};
  std::size_t cell_count_ = 1;
};

/// Integer offsets of the cells covered by an event of radius r centred in
/// a cell: all k with |k| h <= r.
class Stencil {
 public:
  Stencil(double radius, double cell_edge, int dim);

  const std::vector<CellCoords>& offsets() const noexcept { return offsets_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  long long reach() const noexcept { return reach_; }

 private:
  std::vector<CellCoords> offsets_;
  long long reach_ = 0;
};

}  // namespace epislfv
