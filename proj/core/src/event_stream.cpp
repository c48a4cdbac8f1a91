#include "epislfv/event_stream.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace epislfv {

Region::Region(std::vector<double> lengths, BoundaryMode mode) : boundary(mode) {
  dimension = static_cast<int>(lengths.size());
  require_sim_dimension(dimension);
  for (int i = 0; i < dimension; ++i) sides[i] = lengths[i];
  validate();
}

void Region::validate() const {
  require_sim_dimension(dimension);
  for (int i = 0; i < dimension; ++i)
    if (!(sides[i] > 0.0) || !std::isfinite(sides[i]))
      throw std::invalid_argument("Region: side lengths must be positive");
}

double Region::volume() const noexcept {
  double v = 1.0;
  for (int i = 0; i < dimension; ++i) v *= sides[i];
  return v;
}

bool Region::contains(const Point& p) const noexcept {
  for (int i = 0; i < dimension; ++i)
    if (!(p[i] >= 0.0 && p[i] <= sides[i])) return false;
  return true;
}

double Region::distance_sq(const Point& a, const Point& b) const noexcept {
  double s = 0.0;
  for (int i = 0; i < dimension; ++i) {
    double dx = a[i] - b[i];
    if (is_torus()) dx = wrap_delta(dx, sides[i]);
    s += dx * dx;
  }
  return s;
}

Point Region::center() const noexcept {
  Point c;
  for (int i = 0; i < dimension; ++i) c[i] = 0.5 * sides[i];
  return c;
}

namespace {

double center_volume(const Region& region, double radius) {
  if (region.is_torus() || !region.dilated_centers) return region.volume();
  double v = 1.0;
  for (int i = 0; i < region.dimension; ++i) v *= region.sides[i] + 2.0 * radius;
  return v;
}

}  // namespace

double total_event_rate(const EventLaw& law, const Region& region) {
  if (law.dimension != region.dimension)
    throw std::invalid_argument("total_event_rate: law and region dimensions differ");
  double total = 0.0;
  for (const auto& atom : law.atoms) total += atom.rate * center_volume(region, atom.radius);
  return total;
}

EventStream::EventStream(const EventLaw& law, const Region& region, Rng rng, double start_time)
    : law_(law), region_(region), rng_(rng), time_(start_time) {
  law_.validate();
  region_.validate();
  if (law_.dimension != region_.dimension)
    throw std::invalid_argument("EventStream: law and region dimensions differ");
  total_rate_ = total_event_rate(law_, region_);
  double acc = 0.0;
  for (const auto& atom : law_.atoms) {
    acc += atom.rate * center_volume(region_, atom.radius);
    cumulative_.push_back(acc);
  }
  for (auto& c : cumulative_) c /= acc;
  if (!cumulative_.empty()) cumulative_.back() = 1.0;
}

bool EventStream::sample_parent_truncated(const Point& z, double r, Point& p) {
  const int d = region_.dimension;
  // Distance from z to the box decides whether B(z, r) meets it at all.
  double gap = 0.0;
  Point lo;
  Point hi;
  for (int i = 0; i < d; ++i) {
    const double below = std::max(0.0, -z[i]);
    const double above = std::max(0.0, z[i] - region_.sides[i]);
    gap += below * below + above * above;
    lo[i] = std::max(0.0, z[i] - r);
    hi[i] = std::min(region_.sides[i], z[i] + r);
  }
  if (gap > r * r) return false;
  // Rejection from the clipped bounding box of the ball.
  const double r2 = r * r;
  for (;;) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      p[i] = rng_.uniform(lo[i], hi[i]);
      const double dx = p[i] - z[i];
      s += dx * dx;
    }
    if (s <= r2) return true;
  }
}

AugmentedEvent EventStream::next() {
  if (cumulative_.empty() || total_rate_ <= 0.0) {
    AugmentedEvent never;
    never.t = std::numeric_limits<double>::infinity();
    time_ = never.t;
    return never;
  }
  const int d = region_.dimension;
  for (;;) {
    time_ += rng_.exponential(total_rate_);
    AugmentedEvent ev;
    ev.t = time_;
    int k = 0;
    if (cumulative_.size() > 1) {
      const double pick = rng_.uniform();
      k = static_cast<int>(std::upper_bound(cumulative_.begin(), cumulative_.end(), pick) -
                           cumulative_.begin());
      k = std::min<int>(k, static_cast<int>(cumulative_.size()) - 1);
    }
    const auto& atom = law_.atoms[static_cast<std::size_t>(k)];
    ev.atom_index = k;
    ev.r = atom.radius;
    ev.u = atom.impact;
    const bool dilate = !region_.is_torus() && region_.dilated_centers;
    for (int i = 0; i < d; ++i) {
      const double margin = dilate ? atom.radius : 0.0;
      ev.z[i] = rng_.uniform(-margin, region_.sides[i] + margin);
    }
    if (region_.is_torus()) {
      const Point off = sample_ball_offset(rng_, d, atom.radius);
      for (int i = 0; i < d; ++i) ev.p[i] = wrap_coordinate(ev.z[i] + off[i], region_.sides[i]);
    } else if (!sample_parent_truncated(ev.z, atom.radius, ev.p)) {
      continue;
    }
    ev.a = rng_.uniform_open();
    return ev;
  }
}

void write_event_log_header(std::ostream& os, int dim) {
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  os << "t";
  for (int i = 0; i < dim; ++i) os << ",z" << kAxes[i];
  os << ",r,u";
  for (int i = 0; i < dim; ++i) os << ",p" << kAxes[i];
  os << ",a\n";
}

void write_event_log_row(std::ostream& os, const AugmentedEvent& ev, int dim) {
  const auto old_precision = os.precision(17);
  os << ev.t;
  for (int i = 0; i < dim; ++i) os << ',' << ev.z[i];
  os << ',' << ev.r << ',' << ev.u;
  for (int i = 0; i < dim; ++i) os << ',' << ev.p[i];
  os << ',' << ev.a << '\n';
  os.precision(old_precision);
}

}  // namespace epislfv
