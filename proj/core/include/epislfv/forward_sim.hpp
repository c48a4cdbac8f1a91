#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "epislfv/event_law.hpp"
#include "epislfv/event_stream.hpp"
#include "epislfv/geometry.hpp"
#include "epislfv/grid.hpp"
#include "epislfv/rng.hpp"

namespace epislfv {

/// omega + (1 - omega)(1 - exp(-gamma dt)): healthy density after recovering
/// for dt with no event.
double relax_value(double omega, double gamma, double dt);

/// Healthy density omega on a grid, stored as infected density 1 - omega.
///
/// Between events every cell relaxes with the same factor exp(-gamma dt),
/// so the field keeps one shared decay factor and per-cell scaled values;
/// relaxing a cell costs nothing until it is read. In eager mode every call
/// to relax() folds the factor back into every cell.
class DensityField {
 public:
  DensityField(const Grid& grid, double gamma, std::vector<double> infected, double start_time = 0.0);

  const Grid& grid() const noexcept { return grid_; }
  double gamma() const noexcept { return gamma_; }
  double time() const noexcept { return clock_; }
  std::size_t size() const noexcept { return scaled_.size(); }

  double infected(std::size_t cell) const noexcept { return std::min(1.0, scaled_[cell] * decay_); }
  double healthy(std::size_t cell) const noexcept { return 1.0 - infected(cell); }
  /// Time of the last event that modified the cell (or the start time).
  double last_update(std::size_t cell) const noexcept { return last_update_[cell]; }

  /// Advance the clock; every cell relaxes to the target time.
  void relax(double target_time);
  /// omega <- (1 - u) omega on one cell at the current clock. Returns the
  /// infected-density increment.
  double infect(std::size_t cell, double u);
  /// infect() on every listed cell; returns the summed increment.
  double infect_all(const std::vector<std::size_t>& cells, double u);

  /// h^d * sum over cells of (1 - omega), summed afresh.
  double infected_mass() const;
  double infected_mass(const std::vector<std::size_t>& cells) const;
  /// O(1) running total, exact up to accumulated rounding.
  double running_mass() const noexcept { return mass_scaled_ * decay_ * grid_.cell_volume(); }

  std::vector<double> infected_values() const;
  /// True when every cell has 0 <= omega <= 1.
  bool within_bounds() const;

  void set_eager(bool eager) noexcept { eager_ = eager; }
  /// Fold the shared decay factor into the cells.
  void rebase();

 private:
  Grid grid_;
  double gamma_;
  double clock_;
  double ref_time_;
  double decay_ = 1.0;
  double mass_scaled_ = 0.0;
  bool eager_ = false;
  std::vector<double> scaled_;
  std::vector<double> last_update_;
};

/// Initial infected density 1 - omega0.
struct InitialCondition {
  enum class Kind { kEndemic, kPandemic, kEpidemic, kCustom };

  Kind kind = Kind::kEpidemic;
  double level = 1.0;
  Shape mask = WholeSpace{};
  std::vector<double> custom;  // per-cell infected density

  static InitialCondition endemic(double epsilon);
  static InitialCondition pandemic(const Point& normal, double offset, double epsilon);
  static InitialCondition epidemic(const Shape& mask, double level);
  static InitialCondition from_cells(std::vector<double> infected);

  void validate() const;
  bool finite_mass() const noexcept { return kind == Kind::kEpidemic || kind == Kind::kCustom; }
  std::vector<double> rasterize(const Grid& grid) const;
  /// Pointwise value; not available for custom fields.
  double infected_at(const Point& x, const Region& region) const;
};

struct Probe {
  std::string id;
  Shape window = WholeSpace{};
  std::vector<double> times;
};

struct ForwardConfig {
  EventLaw law;
  double gamma = 1.0;
  Region region;
  double cell_edge = 1.0;
  InitialCondition init;
  double horizon = 1.0;
  std::vector<Probe> probes;
  std::vector<double> snapshot_times;
  bool eager = false;
  /// Check 0 <= omega <= 1 on every touched cell after every event.
  bool debug_checks = false;

  void validate() const;
};

struct ProbeSample {
  double t = 0.0;
  std::size_t probe = 0;
  double infected_mass = 0.0;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> infected;
};

struct ForwardTrajectory {
  std::vector<ProbeSample> samples;
  std::vector<Snapshot> snapshots;
  std::size_t events = 0;
  std::size_t infections = 0;
  double final_mass = 0.0;
};

struct EventOutcome {
  AugmentedEvent event;
  std::size_t parent_cell = 0;
  bool parent_infected = false;
  double mass_added = 0.0;
};

/// The quenched forward process on a grid driven by one event stream.
class ForwardSimulator {
 public:
  ForwardSimulator(const ForwardConfig& config, SeedSpec seed);
  ForwardSimulator(const ForwardConfig& config, std::vector<double> infected, SeedSpec seed);

  const AugmentedEvent& peek() const noexcept { return pending_; }
  /// Apply the pending event and draw the next one.
  EventOutcome step();
  /// Apply every event with time <= t, then relax the field to t.
  void advance_to(double t);

  const DensityField& field() const noexcept { return field_; }
  const Grid& grid() const noexcept { return grid_; }
  const ForwardConfig& config() const noexcept { return config_; }
  /// Cells covered by the event (region metric, wrapped on the torus).
  void covered_cells(const AugmentedEvent& ev, std::vector<std::size_t>& out) const;
  std::size_t events() const noexcept { return events_; }
  std::size_t infections() const noexcept { return infections_; }

 private:
  ForwardConfig config_;
  Grid grid_;
  DensityField field_;
  std::vector<Stencil> stencils_;
  std::vector<std::vector<long long>> linear_offsets_;  // per atom, for cells away from the boundary
  EventStream stream_;
  AugmentedEvent pending_;
  std::vector<std::size_t> scratch_;
  std::size_t events_ = 0;
  std::size_t infections_ = 0;
};

/// Cells of each probe window; an empty list with whole = true means all.
struct ProbeCells {
  bool whole = false;
  std::vector<std::size_t> cells;
};
std::vector<ProbeCells> rasterize_probes(const Grid& grid, const std::vector<Probe>& probes);

ForwardTrajectory run_forward(const ForwardConfig& config, SeedSpec seed);
ForwardTrajectory run_forward(const ForwardConfig& config, std::vector<double> infected, SeedSpec seed);

struct OrderViolation {
  double t = 0.0;
  std::size_t cell = 0;
};

struct PairedRun {
  ForwardTrajectory low;
  ForwardTrajectory high;
  std::size_t violations = 0;
  std::size_t checks = 0;
  std::optional<OrderViolation> first_violation;
};

/// Two fields driven by the same stream. `infected_more` must dominate
/// `infected_less` cellwise (i.e. the healthy densities are ordered); any
/// cell where the order flips is counted.
PairedRun run_paired_monotone(const ForwardConfig& config, std::vector<double> infected_more,
                              std::vector<double> infected_less, SeedSpec seed);

}  // namespace epislfv
