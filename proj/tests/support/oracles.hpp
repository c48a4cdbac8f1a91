#pragma once

// Reference values computed independently of the library.

#include <cmath>
#include <cstddef>
#include <numbers>

namespace oracle {

inline double disc_area(double r) { return std::numbers::pi * r * r; }
inline double sphere_volume(double r) { return 4.0 / 3.0 * std::numbers::pi * r * r * r; }

/// Integer points k in Z^d with |k|^2 <= radius_sq, by enumeration.
inline long long lattice_points(long long radius_sq, int d) {
  long long reach = 0;
  while ((reach + 1) * (reach + 1) <= radius_sq) ++reach;
  long long count = 0;
  for (long long i = -reach; i <= reach; ++i) {
    if (d == 1) {
      count += i * i <= radius_sq;
      continue;
    }
    for (long long j = -reach; j <= reach; ++j) {
      if (d == 2) {
        count += i * i + j * j <= radius_sq;
        continue;
      }
      for (long long k = -reach; k <= reach; ++k) count += i * i + j * j + k * k <= radius_sq;
    }
  }
  return count;
}

/// Measure of B(0, r) intersected with B(delta e_1, r).
inline double lens_volume(double r, double delta, int d) {
  if (delta >= 2.0 * r) return 0.0;
  if (d == 1) return 2.0 * r - delta;
  // d = 2: two circular segments
  return 2.0 * r * r * std::acos(delta / (2.0 * r)) - 0.5 * delta * std::sqrt(4.0 * r * r - delta * delta);
}

/// Birth intensity of two dual atoms at distance delta under a single atom
/// (a, r, u): centres covering one atom give a birth with probability u,
/// centres covering both with probability 1 - (1 - u)^2.
inline double two_atom_birth_rate(double a, double r, double u, double delta, int d) {
  const double ball = d == 1 ? 2.0 * r : disc_area(r);
  const double lens = lens_volume(r, delta, d);
  return a * (2.0 * (ball - lens) * u + lens * (1.0 - (1.0 - u) * (1.0 - u)));
}

/// Upper chi-square quantile by the Wilson-Hilferty approximation.
inline double chi_square_upper(double df, double z) {
  const double c = 2.0 / (9.0 * df);
  const double q = 1.0 - c + z * std::sqrt(c);
  return df * q * q * q;
}

inline bool within(double estimate, double se, double truth, double sigmas = 3.0) {
  return std::abs(estimate - truth) <= sigmas * se;
}

}  // namespace oracle
