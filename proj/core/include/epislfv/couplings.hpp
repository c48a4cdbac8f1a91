#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epislfv/event_law.hpp"
#include "epislfv/forward_sim.hpp"
#include "epislfv/geometry.hpp"
#include "epislfv/json_io.hpp"
#include "epislfv/rng.hpp"

namespace epislfv {

using SiteCoords = std::array<long long, kMaxDim>;

/// Nearest-neighbour contact process on the lattice of cubes of edge
/// R / sqrt(d + 3), restricted to the sites with |i_k| <= window (the rest
/// is absorbing).
struct ContactSetup {
  int dimension = 2;
  double gamma = 1.0;
  double radius = 1.0;
  /// Infection rate along each face-adjacent pair.
  double infection_rate = 0.0;
  long long window = 20;

  double cube_edge() const;
  void validate() const;
};

/// Rate at which the dual coupling infects a vacant neighbour of an occupied
/// cube: C(d) R^d sum a_i u_i. Requires a single-radius law.
double contact_infection_rate(const EventLaw& law);
ContactSetup contact_setup(const EventLaw& law, double gamma, long long window);

/// Cube containing x: round(x / edge) componentwise.
SiteCoords cube_of(const Point& x, double edge, int dim);
/// True when x lies strictly inside its cube (not on a shared face).
bool in_cube_interior(const Point& x, double edge, int dim);

struct ContactTrajectory {
  std::vector<std::pair<double, std::size_t>> occupied;  // (t, count) after each change
  bool survived = false;
  std::size_t events = 0;
};

/// Graphical construction: each site carries its own stream of recovery
/// marks and infection arrows, keyed by (seed, site). Marks do not depend on
/// the window, so a larger window dominates a smaller one path by path.
ContactTrajectory run_contact(const ContactSetup& setup, double horizon, SeedSpec seed);

struct ViolationReport {
  std::size_t runs = 0;
  std::size_t violations = 0;
  std::size_t checks = 0;
  std::optional<double> first_t;
  std::string first_where;

  void merge(const ViolationReport& other);
};
Json to_json(const ViolationReport& report);

/// Joint run of the continuous dual and the contact process with shared
/// death clocks. A violation is an occupied site whose cube interior holds
/// no dual atom, or more occupied sites than atoms.
ViolationReport run_coupled_contact_dual(const EventLaw& law, double gamma, double horizon, SeedSpec seed,
                                         long long window = 50);

struct JumpTrajectory {
  std::vector<double> times;   // requested sample times
  std::vector<double> values;  // X at those times
  std::size_t jumps = 0;
};

/// Jump volume per atom: continuum V_r, or covered-cell volume when
/// cell_edge > 0.
std::vector<double> jump_sizes(const EventLaw& law, double cell_edge = 0.0);

/// Markov jump process: at state x, atom i fires at rate x a_i and adds
/// u_i V_i.
JumpTrajectory run_sjp(double x0, const EventLaw& law, const std::vector<double>& sample_times, SeedSpec seed,
                       double cell_edge = 0.0);

/// Forward run coupled with a jump process started at the initial mass:
/// every successful forward event adds u V_grid to X, and extra jumps are
/// proposed at rate X sum a and kept with probability (X - mass) / X. A
/// violation is a time at which the forward mass exceeds X.
ViolationReport run_coupled_sjp_forward(const ForwardConfig& config, SeedSpec seed);

}  // namespace epislfv
