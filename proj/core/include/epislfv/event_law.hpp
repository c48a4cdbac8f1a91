#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace epislfv {

/// One atom a * delta_r(dr) delta_u(du) of the event measure.
struct EventAtom {
  double rate = 0.0;    ///< events per unit volume per unit time
  double radius = 0.0;  ///< spatial units
  double impact = 0.0;  ///< fraction of the healthy density converted, in (0, 1]

  bool operator==(const EventAtom&) const = default;
};

/// Finite atomic event measure together with the space dimension.
///
/// Both moment conditions (sum of a*u*r^d and of a*r^d finite) hold
/// automatically for a finite atom list; `validate` only enforces the
/// per-atom ranges.
struct EventLaw {
  int dimension = 2;
  std::vector<EventAtom> atoms;
  /// Set by rescale_impact when atoms with beta*u > 1 were dropped.
  bool truncated = false;

  EventLaw() = default;
  EventLaw(int d, std::vector<EventAtom> a) : dimension(d), atoms(std::move(a)) { validate(); }

  void validate() const;
  bool empty() const noexcept { return atoms.empty(); }
  double total_rate() const noexcept;

  /// sum a_i u_i r_i^d
  double impact_moment() const noexcept;
  /// sum a_i r_i^d
  double radius_moment() const noexcept;

  bool operator==(const EventLaw& o) const {
    return dimension == o.dimension && atoms == o.atoms;
  }
};

/// Volume of a d-dimensional ball of radius r.
double ball_volume(double r, int d);

/// Number of points k in Z^d with |k| * cell_edge <= r (closed ball). This is
/// the covered-cell count of an event of radius r on a grid of that edge.
long long grid_ball_count(double r, double cell_edge, int d);

/// sum a_i u_i V_{r_i}: the isolated-particle birth rate of the dual.
double infection_moment(const EventLaw& law);
/// Same with V_r replaced by the grid volume count * h^d.
double infection_moment_grid(const EventLaw& law, double cell_edge);

double r0(double gamma, const EventLaw& law);
double r0_grid(double gamma, const EventLaw& law, double cell_edge);

EventLaw rescale_time(const EventLaw& law, double a);
double rescale_gamma(double gamma, double a);
EventLaw rescale_space(const EventLaw& law, double b);
/// Impact rescaling: (a, r, u) -> (a/beta, r, beta*u); atoms leaving the
/// support (beta*u > 1) are dropped and the result is flagged `truncated`.
EventLaw rescale_impact(const EventLaw& law, double beta);

/// (sum a u V_r - gamma) / (sum a u). Negative when R0 < 1.
double c_epidemic(double gamma, const EventLaw& law);
/// Grid version of c_epidemic, with V_r replaced by the covered-cell volume.
double c_epidemic_grid(double gamma, const EventLaw& law, double cell_edge);

/// Cube-lattice constant Gamma(d/2+1) / (pi^{d/2} (d+3)^d).
double contact_constant(int d);
/// lambda_c / contact_constant(d); lambda_c is supplied by the caller.
double r0_max(int d, double lambda_c);

std::string to_json_string(const EventLaw& law);
EventLaw event_law_from_json_string(std::string_view text);

}  // namespace epislfv
