#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "tacmod/core/error.hpp"

namespace tacmod {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;
  std::size_t n_points = 0;
};

/// argmin_k sum (y - k x)^2.
inline LinearFit fit_through_origin(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::LengthMismatch, "fit inputs differ in length");
  require(x.size() >= 2, ErrorKind::DegenerateFit, "need at least two points");
  double xx = 0.0;
  double xy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += x[i] * x[i];
    xy += x[i] * y[i];
  }
  require(xx > 0.0 && std::isfinite(xx), ErrorKind::DegenerateFit, "regressor is identically zero");
  LinearFit fit;
  fit.slope = xy / xx;
  fit.n_points = x.size();
  double rr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.slope * x[i];
    rr += r * r;
  }
  fit.residual_norm = std::sqrt(rr);
  return fit;
}

/// Ordinary least squares y = slope x + intercept.
inline LinearFit fit_affine(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::LengthMismatch, "fit inputs differ in length");
  require(x.size() >= 2, ErrorKind::DegenerateFit, "need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0 && std::isfinite(sxx), ErrorKind::DegenerateFit, "regressor is constant");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.n_points = x.size();
  double rr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.slope * x[i] - fit.intercept;
    rr += r * r;
  }
  fit.residual_norm = std::sqrt(rr);
  return fit;
}

}  // namespace tacmod
