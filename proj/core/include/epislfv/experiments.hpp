#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "epislfv/ancestral_sim.hpp"
#include "epislfv/event_law.hpp"
#include "epislfv/forward_sim.hpp"
#include "epislfv/json_io.hpp"

namespace epislfv {

const char* version();

/// manifest.json: {command, config, seed, version}.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const Json& config,
                    std::uint64_t seed);

void write_trajectory_header(std::ostream& os);
void write_trajectory_rows(std::ostream& os, std::size_t replicate, const ForwardTrajectory& traj,
                           const std::vector<Probe>& probes);

void write_dual_header(std::ostream& os, int dim);
void write_dual_row(std::ostream& os, std::size_t replicate, const DualEvent& ev, int dim);

/// Plain-text matrix of 1 - omega, one grid row per line (first axis varies
/// fastest along a line). 3-d grids are written as stacked slices.
void write_snapshot_matrix(std::ostream& os, const Grid& grid, const std::vector<double>& infected);

struct SnapshotRecipe {
  double side = 600.0;
  double cell_edge = 1.0;
  double gamma = 20.0;
  EventLaw law{2, {{0.05, 100.0, 0.1}}};
  double init_radius = 200.0;
  double t = 0.02;
  BoundaryMode boundary = BoundaryMode::kTorus;

  /// Square box with the initial ball at its centre. Throws when the box
  /// does not hold the ball with a margin of the largest event radius.
  ForwardConfig config() const;
};

Snapshot run_snapshot(const SnapshotRecipe& recipe, SeedSpec seed);

struct SweepRecipe {
  double side = 200.0;
  double cell_edge = 1.0;
  double gamma = 1.0;
  double radius = 4.0;
  double rate = 1.0;
  double init_radius = 50.0;
  double init_level = 0.9;
  double horizon = 100.0;
  std::size_t replicates = 100;
  std::uint64_t master_seed = 2024;
  BoundaryMode boundary = BoundaryMode::kTorus;
  /// One sweep point per entry: label x and impact u.
  std::vector<double> labels;
  std::vector<double> impacts;

  /// x = 0..8, u = 0.03 + 0.0003 x.
  static SweepRecipe literal();
  /// u = R0 / (covered-cell count) for grid R0 in {0.5, 0.8, 1, 1.2, 1.5, 2};
  /// x is the target grid R0.
  static SweepRecipe extended();

  ForwardConfig config_for(double impact) const;
};

struct SweepRow {
  double x = 0.0;
  double u = 0.0;
  double r0_grid = 0.0;
  double median = 0.0;
  double p05 = 0.0;
  double p95 = 0.0;
  double mean = 0.0;
  std::vector<double> proportions;  // per replicate
};

/// Infected proportion (total infected mass / box volume) at the horizon for
/// every replicate of every sweep point. Replicate i of every point uses the
/// stream (master_seed, i).
std::vector<SweepRow> run_threshold_sweep(const SweepRecipe& recipe, unsigned threads = 1);
/// Proportion at the horizon with the event law removed, by simulation.
double sweep_baseline(const SweepRecipe& recipe);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_sweep_replicates_csv(std::ostream& os, const std::vector<SweepRow>& rows);

Json to_json(const SweepRecipe& recipe);

}  // namespace epislfv
