#include "epislfv/geometry.hpp"

namespace epislfv {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

bool shape_contains(const Shape& shape, const Point& p, int dim,
                    const std::array<double, kMaxDim>* torus_sides) {
  return std::visit(
      Overloaded{
          [](const WholeSpace&) { return true; },
          [&](const BallShape& b) {
            double s = 0.0;
            for (int i = 0; i < dim; ++i) {
              double dx = p[i] - b.center[i];
              if (torus_sides) dx = wrap_delta(dx, (*torus_sides)[i]);
              s += dx * dx;
            }
            return s <= b.radius * b.radius;
          },
          [&](const HalfSpaceShape& h) {
            double s = 0.0;
            for (int i = 0; i < dim; ++i) s += p[i] * h.normal[i];
            return s >= h.offset;
          },
          [&](const BoxShape& b) {
            for (int i = 0; i < dim; ++i)
              if (!(p[i] >= b.lo[i] && p[i] < b.hi[i])) return false;
            return true;
          },
      },
      shape);
}

bool shape_is_bounded(const Shape& shape) {
  return std::holds_alternative<BallShape>(shape) || std::holds_alternative<BoxShape>(shape);
}

}  // namespace epislfv
