#pragma once

// Closed-form Hertzian sphere-on-half-space relations and their MDR
// (method of dimensionality reduction) line-load / surface-profile form.

#include <cmath>
#include <numbers>

#include "tacmod/core/error.hpp"
#include "tacmod/core/types.hpp"

namespace tacmod::hertz {

/// F = 4/3 E* sqrt(R) delta^(3/2); delta is the approach at one contact.
inline double force(double approach_m, double aggregate_pa, double radius_m) {
  require(approach_m >= 0.0, ErrorKind::InvalidValue, "approach must be non-negative");
  return 4.0 / 3.0 * aggregate_pa * std::sqrt(radius_m) * std::pow(approach_m, 1.5);
}

/// Inverse of `force`.
inline double approach_for_force(double force_n, double aggregate_pa, double radius_m) {
  require(force_n >= 0.0, ErrorKind::InvalidValue, "force must be non-negative");
  return std::pow(3.0 * force_n / (4.0 * aggregate_pa * std::sqrt(radius_m)), 2.0 / 3.0);
}

/// a = sqrt(R delta).
inline double contact_radius(double approach_m, double radius_m) { return std::sqrt(radius_m * approach_m); }

/// p0 = 3F / (2 pi a^2).
inline double peak_pressure(double force_n, double contact_radius_m) {
  return 3.0 * force_n / (2.0 * std::numbers::pi * contact_radius_m * contact_radius_m);
}

/// p(r) = p0 sqrt(1 - r^2/a^2) inside the contact, 0 outside.
inline double pressure_field(double r_m, double p0_pa, double contact_radius_m) {
  require(r_m >= 0.0, ErrorKind::InvalidValue, "radius must be non-negative");
  if (r_m >= contact_radius_m) return 0.0;
  const double s = r_m / contact_radius_m;
  return p0_pa * std::sqrt(1.0 - s * s);
}

/// MDR line load q(x) = 2 int_x^inf r p(r) / sqrt(r^2 - x^2) dr, which for the
/// Hertz pressure closes to pi p0 (a^2 - x^2) / (2a).
inline double mdr_line_load(double x_m, double p0_pa, double contact_radius_m) {
  require(x_m >= 0.0, ErrorKind::InvalidValue, "coordinate must be non-negative");
  if (x_m >= contact_radius_m) return 0.0;
  return std::numbers::pi * p0_pa * (contact_radius_m * contact_radius_m - x_m * x_m) / (2.0 * contact_radius_m);
}

/// Gel surface displacement u(x) = (1 - nu_s^2)/E_s q(x).
inline double surface_profile(double x_m, const SensorSpec& sensor, double p0_pa, double contact_radius_m) {
  return sensor.compliance() * mdr_line_load(x_m, p0_pa, contact_radius_m);
}

/// Peak gel depth in closed form:
/// d = 2 (1 - nu_s^2)/E_s (3 E*^2 F / (32 R^2))^(1/3) a.
/// The factor 2 is the doubled half-line integral of the line load at x = 0.
inline double peak_depth(double force_n, double aggregate_pa, double radius_m, double contact_radius_m,
                         const SensorSpec& sensor) {
  return 2.0 * sensor.compliance() *
         std::cbrt(3.0 * aggregate_pa * aggregate_pa * force_n / (32.0 * radius_m * radius_m)) * contact_radius_m;
}

}  // namespace tacmod::hertz
