#include "epislfv/event_law.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "epislfv/json_io.hpp"

namespace epislfv {

void EventLaw::validate() const {
  if (dimension < 1) throw std::invalid_argument("EventLaw: dimension must be >= 1");
  for (const auto& atom : atoms) {
    if (!(atom.rate > 0.0) || !std::isfinite(atom.rate))
      throw std::invalid_argument("EventLaw: atom rate must be positive and finite");
    if (!(atom.radius > 0.0) || !std::isfinite(atom.radius))
      throw std::invalid_argument("EventLaw: atom radius must be positive and finite");
    if (!(atom.impact > 0.0) || atom.impact > 1.0)
      throw std::invalid_argument("EventLaw: atom impact must lie in (0, 1]");
  }
}

double EventLaw::total_rate() const noexcept {
  double s = 0.0;
  for (const auto& atom : atoms) s += atom.rate;
  return s;
}

double EventLaw::impact_moment() const noexcept {
  double s = 0.0;
  for (const auto& atom : atoms) s += atom.rate * atom.impact * std::pow(atom.radius, dimension);
  return s;
}

double EventLaw::radius_moment() const noexcept {
  double s = 0.0;
  for (const auto& atom : atoms) s += atom.rate * std::pow(atom.radius, dimension);
  return s;
}

double ball_volume(double r, int d) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_volume: radius must be positive");
  if (d < 1) throw std::invalid_argument("ball_volume: dimension must be >= 1");
  const double half = 0.5 * d;
  return std::pow(std::numbers::pi, half) * std::pow(r, d) / std::tgamma(half + 1.0);
}

namespace {

long long count_recursive(int remaining_dims, double budget, double h2, long long limit) {
  if (remaining_dims == 0) return 1;
  long long total = 0;
  for (long long k = -limit; k <= limit; ++k) {
    const double used = static_cast<double>(k * k) * h2;
    if (used <= budget) total += count_recursive(remaining_dims - 1, budget - used, h2, limit);
  }
  return total;
}

}  // namespace

long long grid_ball_count(double r, double cell_edge, int d) {
  if (!(r > 0.0)) throw std::invalid_argument("grid_ball_count: radius must be positive");
  if (!(cell_edge > 0.0)) throw std::invalid_argument("grid_ball_count: cell edge must be positive");
  if (d < 1) throw std::invalid_argument("grid_ball_count: dimension must be >= 1");
  // Points exactly on the sphere count as covered; the relative slack absorbs
  // rounding in k^2 h^2 for non-integer edges.
  const double budget = r * r * (1.0 + 1e-12);
  const auto limit = static_cast<long long>(std::floor(r / cell_edge)) + 1;
  return count_recursive(d, budget, cell_edge * cell_edge, limit);
}

double infection_moment(const EventLaw& law) {
  double s = 0.0;
  for (const auto& atom : law.atoms) s += atom.rate * atom.impact * ball_volume(atom.radius, law.dimension);
  return s;
}

double infection_moment_grid(const EventLaw& law, double cell_edge) {
  if (!(cell_edge > 0.0)) throw std::invalid_argument("cell edge must be positive");
  const double cell_volume = std::pow(cell_edge, law.dimension);
  double s = 0.0;
  for (const auto& atom : law.atoms) {
    const auto count = grid_ball_count(atom.radius, cell_edge, law.dimension);
    s += atom.rate * atom.impact * static_cast<double>(count) * cell_volume;
  }
  return s;
}

double r0(double gamma, const EventLaw& law) {
  if (!(gamma > 0.0)) throw std::invalid_argument("r0: gamma must be positive");
  return infection_moment(law) / gamma;
}

double r0_grid(double gamma, const EventLaw& law, double cell_edge) {
  if (!(gamma > 0.0)) throw std::invalid_argument("r0_grid: gamma must be positive");
  return infection_moment_grid(law, cell_edge) / gamma;
}

EventLaw rescale_time(const EventLaw& law, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("rescale_time: factor must be positive");
  EventLaw out = law;
  for (auto& atom : out.atoms) atom.rate *= a;
  return out;
}

double rescale_gamma(double gamma, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("rescale_gamma: factor must be positive");
  return gamma * a;
}

EventLaw rescale_space(const EventLaw& law, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("rescale_space: factor must be positive");
  EventLaw out = law;
  const double volume_factor = std::pow(b, law.dimension);
  for (auto& atom : out.atoms) {
    atom.rate *= volume_factor;
    atom.radius /= b;
  }
  return out;
}

EventLaw rescale_impact(const EventLaw& law, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("rescale_impact: factor must be positive");
  EventLaw out;
  out.dimension = law.dimension;
  out.truncated = law.truncated;
  for (const auto& atom : law.atoms) {
    const double impact = beta * atom.impact;
    if (impact > 1.0) {
      out.truncated = true;
      continue;
    }
    out.atoms.push_back({atom.rate / beta, atom.radius, impact});
  }
  return out;
}

double c_epidemic(double gamma, const EventLaw& law) {
  if (!(gamma > 0.0)) throw std::invalid_argument("c_epidemic: gamma must be positive");
  if (law.empty()) throw std::invalid_argument("c_epidemic: law must be nonempty");
  double impact_rate = 0.0;
  for (const auto& atom : law.atoms) impact_rate += atom.rate * atom.impact;
  return (infection_moment(law) - gamma) / impact_rate;
}

double c_epidemic_grid(double gamma, const EventLaw& law, double cell_edge) {
  if (!(gamma > 0.0)) throw std::invalid_argument("c_epidemic_grid: gamma must be positive");
  if (law.empty()) throw std::invalid_argument("c_epidemic_grid: law must be nonempty");
  double impact_rate = 0.0;
  for (const auto& atom : law.atoms) impact_rate += atom.rate * atom.impact;
  return (infection_moment_grid(law, cell_edge) - gamma) / impact_rate;
}

double contact_constant(int d) {
  if (d < 1) throw std::invalid_argument("contact_constant: dimension must be >= 1");
  const double half = 0.5 * d;
  return std::tgamma(half + 1.0) / (std::pow(std::numbers::pi, half) * std::pow(d + 3.0, d));
}

double r0_max(int d, double lambda_c) {
  if (!(lambda_c > 0.0)) throw std::invalid_argument("r0_max: lambda_c must be positive");
  return lambda_c / contact_constant(d);
}

std::string to_json_string(const EventLaw& law) { return to_json(law).dump(); }

EventLaw event_law_from_json_string(std::string_view text) {
  return event_law_from_json(nlohmann::json::parse(text));
}

}  // namespace epislfv
