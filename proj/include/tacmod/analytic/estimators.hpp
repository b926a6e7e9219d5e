#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacmod/contact/features.hpp"
#include "tacmod/core/error.hpp"
#include "tacmod/core/fit.hpp"
#include "tacmod/core/io.hpp"
#include "tacmod/core/types.hpp"

namespace tacmod {

inline constexpr double kMinModulusPa = 1.0;
inline constexpr double kMaxModulusPa = 1e13;

struct MaterialAssumptions {
  double poisson_obj = 0.4;
  SensorSpec sensor{};

  double object_factor() const { return 1.0 - poisson_obj * poisson_obj; }

  void validate() const {
    require(poisson_obj > 0.0 && poisson_obj < 0.5, ErrorKind::InvariantViolation,
            "object Poisson ratio must lie in (0, 0.5)");
    sensor.validate();
  }
};

/// Affine correction applied to log10 of an estimate: log10(E) * scale + offset.
struct Calibration {
  double scale = 1.0;
  double offset = 0.0;

  double apply(double log10_value) const { return log10_value * scale + offset; }
  bool is_identity() const { return scale == 1.0 && offset == 0.0; }

  nlohmann::json to_json() const { return {{"scale", scale}, {"offset", offset}}; }

  static Calibration from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("scale") && j.contains("offset") && j["scale"].is_number() &&
                j["offset"].is_number(),
            ErrorKind::InvalidValue, "calibration must be {\"scale\": number, \"offset\": number}");
    return Calibration{j["scale"].get<double>(), j["offset"].get<double>()};
  }

  static Calibration load(const std::filesystem::path& path) {
    try {
      return from_json(nlohmann::json::parse(io::read_text(path)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::InvalidValue, std::string("calibration file is not valid JSON: ") + e.what());
    }
  }
};

/// Least-squares map from predicted to true log10 modulus on a calibration split.
inline Calibration fit_calibration(std::span<const double> predicted_log10, std::span<const double> truth_log10) {
  const LinearFit fit = fit_affine(predicted_log10, truth_log10);
  return Calibration{fit.slope, fit.intercept};
}

namespace detail {

inline ModulusEstimate bracketed(double value_pa, EstimateMethod method, FitDiagnostics diag,
                                 const Calibration& calibration = {}) {
  if (!(value_pa >= kMinModulusPa) || !(value_pa <= kMaxModulusPa)) {
    diag.clamped = true;
    value_pa = std::isnan(value_pa) ? kMaxModulusPa : std::clamp(value_pa, kMinModulusPa, kMaxModulusPa);
  }
  double log_value = std::log10(value_pa);
  if (!calibration.is_identity()) {
    log_value = std::clamp(calibration.apply(log_value), std::log10(kMinModulusPa), std::log10(kMaxModulusPa));
  }
  return ModulusEstimate::from_log10(log_value, method, diag);
}

}  // namespace detail

/// E* = ((1 - nu_s^2) / E_s + (1 - nu_o^2) / E_o)^-1.
inline double aggregate_modulus(double object_modulus_pa, const MaterialAssumptions& m) {
  require(object_modulus_pa > 0.0, ErrorKind::InvalidValue, "object modulus must be positive");
  return 1.0 / (m.sensor.compliance() + m.object_factor() / object_modulus_pa);
}

/// Inverse of aggregate_modulus. Fails when E* is at or above the rigid-object
/// limit E_s / (1 - nu_s^2).
inline double invert_aggregate(double aggregate_pa, const MaterialAssumptions& m) {
  require(aggregate_pa > 0.0, ErrorKind::InvalidValue, "aggregate modulus must be positive");
  const double object_compliance = 1.0 / aggregate_pa - m.sensor.compliance();
  require(object_compliance > 0.0, ErrorKind::RigidLimitExceeded,
          "aggregate modulus " + std::to_string(aggregate_pa) + " Pa exceeds the rigid-object limit");
  return m.object_factor() / object_compliance;
}

/// Simple elasticity: sigma = E eps fitted through the origin on magnitudes,
/// so the compressive sign of eps does not matter.
inline ModulusEstimate fit_elastic(std::span<const double> stress_pa, std::span<const double> strain) {
  std::vector<double> s(stress_pa.size());
  std::vector<double> e(strain.size());
  std::transform(stress_pa.begin(), stress_pa.end(), s.begin(), [](double v) { return std::abs(v); });
  std::transform(strain.begin(), strain.end(), e.begin(), [](double v) { return std::abs(v); });
  const LinearFit fit = fit_through_origin(e, s);
  require(fit.slope > 0.0, ErrorKind::DegenerateFit, "stress does not grow with strain");
  return detail::bracketed(fit.slope, EstimateMethod::elastic, FitDiagnostics{fit.residual_norm, fit.n_points});
}

inline ModulusEstimate fit_elastic(const ContactFeatureSeries& features) {
  const StressStrain ss = stress_strain(features.force_n, features.area_m2, features.width_m, features.max_depth_m);
  return fit_elastic(ss.stress_pa, ss.strain);
}

struct HertzOptions {
  Calibration calibration{};
};

/// One point of the Hertz/MDR depth relation d = k x with k = E*^(2/3).
inline double mdr_regressor(double force_n, double radius_m, double contact_radius_m, const SensorSpec& sensor) {
  return 2.0 * sensor.compliance() * std::cbrt(3.0 * force_n / (32.0 * radius_m * radius_m)) * contact_radius_m;
}

/// Fitted aggregate modulus E* from the depth relation, before inversion.
inline LinearFit fit_mdr_slope(const ContactFeatureSeries& f, const SensorSpec& sensor) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = f.contact_radius_m[i];
    const double r = f.apparent_radius_m[i];
    const double force = f.force_n[i];
    const double d = f.max_depth_m[i];
    if (a > 0.0 && r > 0.0 && std::isfinite(r) && force > 0.0 && d > 0.0) {
      x.push_back(mdr_regressor(force, r, a, sensor));
      y.push_back(d);
    }
  }
  if (x.size() < 2) {
    bool any_radius = std::any_of(f.apparent_radius_m.begin(), f.apparent_radius_m.end(),
                                  [](double r) { return std::isfinite(r) && r > 0.0; });
    require(any_radius, ErrorKind::DegenerateGeometry, "no usable apparent radius in the loading window");
    fail(ErrorKind::DegenerateFit, "fewer than two frames with positive depth, radius and force");
  }
  const LinearFit fit = fit_through_origin(x, y);
  require(fit.slope > 0.0, ErrorKind::DegenerateFit, "depth does not grow with the regressor");
  return fit;
}

/// Hertzian estimate via the method of dimensionality reduction.
inline ModulusEstimate fit_hertz_mdr(const ContactFeatureSeries& features, const MaterialAssumptions& assumptions,
                                     const HertzOptions& options = {}) {
  assumptions.validate();
  const LinearFit fit = fit_mdr_slope(features, assumptions.sensor);
  const double aggregate = std::pow(fit.slope, 1.5);
  FitDiagnostics diag{fit.residual_norm, fit.n_points};
  double value = kMaxModulusPa;
  try {
    value = invert_aggregate(aggregate, assumptions);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RigidLimitExceeded) throw;
    diag.rigid_limit = true;
  }
  return detail::bracketed(value, EstimateMethod::hertz, diag, options.calibration);
}

struct HookeFit {
  double stiffness_n_per_m = 0.0;
  double pseudo_modulus_pa = 0.0;
  LinearFit force_fit;
};

/// Force/width-only baseline: stiffness from F against closure, plus the
/// elastic estimate with the whole sensor as contact area and no depth.
inline HookeFit fit_hooke_baseline(const GraspSequence& seq, const ContactOptions& options = {}) {
  const std::size_t t0 = detect_first_contact(seq, options.contact_force_n);
  const IndexRange window = clip_loading_window(seq, t0, options.monotone_tolerance);
  std::vector<double> closure;
  std::vector<double> force;
  std::vector<double> width;
  for (std::size_t i = window.first; i <= window.last; ++i) {
    closure.push_back(seq.width_m()[window.first] - seq.width_m()[i]);
    force.push_back(seq.force_n()[i]);
    width.push_back(seq.width_m()[i]);
  }
  HookeFit out;
  out.force_fit = fit_affine(closure, force);
  out.stiffness_n_per_m = out.force_fit.slope;

  const std::vector<double> zero_depth(width.size(), 0.0);
  const std::vector<double> area(width.size(), seq.sensor().area_m2());
  const StressStrain ss = stress_strain(force, area, width, zero_depth);
  out.pseudo_modulus_pa = fit_elastic(ss.stress_pa, ss.strain).value_pa;
  return out;
}

}  // namespace tacmod
