#pragma once

#include <iosfwd>
#include <vector>

#include "epislfv/event_law.hpp"
#include "epislfv/geometry.hpp"
#include "epislfv/rng.hpp"

namespace epislfv {

enum class BoundaryMode { kTorus, kTruncated };

/// Axis-aligned box [0, L_1] x ... x [0, L_d].
///
/// In torus mode opposite faces are identified. In truncated mode events
/// only act on the part of their ball inside the box, and parents are drawn
/// in B(z, r) intersected with the box.
struct Region {
  int dimension = 2;
  std::array<double, kMaxDim> sides{};
  BoundaryMode boundary = BoundaryMode::kTorus;
  /// Truncated mode only: draw centres in the box dilated by each atom's
  /// radius (default) or in the box itself.
  bool dilated_centers = true;

  Region() = default;
  Region(std::vector<double> lengths, BoundaryMode mode = BoundaryMode::kTorus);

  void validate() const;
  double volume() const noexcept;
  bool is_torus() const noexcept { return boundary == BoundaryMode::kTorus; }
  const std::array<double, kMaxDim>* torus_sides() const noexcept {
    return is_torus() ? &sides : nullptr;
  }
  bool contains(const Point& p) const noexcept;
  /// Squared distance in the region metric (minimal image on the torus).
  double distance_sq(const Point& a, const Point& b) const noexcept;
  Point center() const noexcept;
};

/// One point (t, z, r, u, p, a) of the augmented Poisson process.
struct AugmentedEvent {
  double t = 0.0;
  Point z;
  double r = 0.0;
  double u = 0.0;
  Point p;
  double a = 0.0;
  int atom_index = 0;
};

/// Total intensity of event centres seen by the region.
double total_event_rate(const EventLaw& law, const Region& region);

/// Seeded generator of the augmented Poisson process restricted to a region.
///
/// Inter-arrival times are Exp(total rate); marks are chosen proportionally
/// to their (dilation-adjusted) rates. In truncated mode an event whose ball
/// misses the box entirely has no parent location and is skipped.
class EventStream {
 public:
  EventStream(const EventLaw& law, const Region& region, Rng rng, double start_time = 0.0);

  AugmentedEvent next();
  double rate() const noexcept { return total_rate_; }
  double time() const noexcept { return time_; }
  int dimension() const noexcept { return region_.dimension; }
  const Region& region() const noexcept { return region_; }

 private:
  bool sample_parent_truncated(const Point& z, double r, Point& p);

  EventLaw law_;
  Region region_;
  Rng rng_;
  double time_ = 0.0;
  double total_rate_ = 0.0;
  std::vector<double> cumulative_;  // per atom, normalised to 1
};

/// Header line and rows for the event-log CSV dump (17 significant digits).
void write_event_log_header(std::ostream& os, int dim);
void write_event_log_row(std::ostream& os, const AugmentedEvent& ev, int dim);

}  // namespace epislfv
