#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <variant>
#include <vector>

#include "epislfv/rng.hpp"

namespace epislfv {

/// Simulations are implemented for d = 1, 2, 3. Pure R0 calculus accepts any d.
inline constexpr int kMaxDim = 3;

/// A point of R^d with d <= kMaxDim; unused coordinates stay zero.
struct Point {
  std::array<double, kMaxDim> x{};

  Point() = default;
  Point(std::initializer_list<double> coords) {
    if (coords.size() > static_cast<std::size_t>(kMaxDim))
      throw std::invalid_argument("Point: too many coordinates");
    std::size_t i = 0;
    for (double c : coords) x[i++] = c;
  }

  double& operator[](std::size_t i) { return x[i]; }
  double operator[](std::size_t i) const { return x[i]; }
  bool operator==(const Point&) const = default;
};

inline void require_sim_dimension(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("simulation dimension must be 1, 2 or 3");
}

inline double squared_norm(const Point& p, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += p[i] * p[i];
  return s;
}

inline double euclidean_distance_sq(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double dx = a[i] - b[i];
    s += dx * dx;
  }
  return s;
}

/// Minimal-image displacement on a torus with side lengths `sides`.
inline double wrap_delta(double dx, double side) {
  return dx - side * std::nearbyint(dx / side);
}

inline double wrap_coordinate(double x, double side) {
  if (x >= 0.0 && x < side) return x;
  if (x < 0.0 && x >= -side) {
    const double w = x + side;
    return w < side ? w : 0.0;
  }
  if (x >= side && x < 2.0 * side) return x - side;
  double w = std::fmod(x, side);
  if (w < 0.0) w += side;
  if (w >= side) w = 0.0;
  return w;
}

/// Uniform point in the centred ball B(0, r), by rejection from the cube.
inline Point sample_ball_offset(Rng& rng, int dim, double r) {
  Point p;
  if (dim == 1) {
    p[0] = rng.uniform(-r, r);
    return p;
  }
  for (;;) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      p[i] = rng.uniform(-1.0, 1.0);
      s += p[i] * p[i];
    }
    if (s <= 1.0) break;
  }
  for (int i = 0; i < dim; ++i) p[i] *= r;
  return p;
}

/// Shapes used for initial-condition masks and observation windows.
/// Membership is tested on points (cell centres when rasterized).
struct WholeSpace {};
struct BallShape {
  Point center;
  double radius = 0.0;
};
/// Half-space {x : <x, normal> >= offset}.
struct HalfSpaceShape {
  Point normal;
  double offset = 0.0;
};
/// Axis-aligned box [lo, hi).
struct BoxShape {
  Point lo;
  Point hi;
};

using Shape = std::variant<WholeSpace, BallShape, HalfSpaceShape, BoxShape>;

/// Membership in `shape`. When `torus_sides` is non-null, ball distances use
/// the minimal-image metric.
bool shape_contains(const Shape& shape, const Point& p, int dim,
                    const std::array<double, kMaxDim>* torus_sides = nullptr);

/// True when the shape has bounded support.
bool shape_is_bounded(const Shape& shape);

}  // namespace epislfv
