#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tacmod/analytic/estimators.hpp"
#include "tacmod/contact/features.hpp"
#include "tacmod/core/error.hpp"
#include "tacmod/core/rng.hpp"
#include "tacmod/core/types.hpp"
#include "tacmod/learn/model.hpp"

namespace tacmod::learn {

/// Frame indices spread evenly over the window, starting `shift` frames in.
/// Index k is first + round(shift + k (len - 1 - shift) / (n - 1)), with
/// halves rounded to even.
inline std::vector<std::size_t> sample_frames(const IndexRange& window, std::size_t n, std::size_t shift = 0) {
  require(n >= 1, ErrorKind::InvalidValue, "need at least one frame");
  const std::size_t len = window.size();
  require(len >= n && shift + n <= len, ErrorKind::WindowTooShort,
          "window of " + std::to_string(len) + " frames cannot supply " + std::to_string(n) + " frames at shift " +
              std::to_string(shift));
  std::vector<std::size_t> idx;
  if (n == 1) return {window.first + shift};
  const double span = static_cast<double>(len - 1 - shift);
  for (std::size_t k = 0; k < n; ++k) {
    const double pos = static_cast<double>(shift) + static_cast<double>(k) * span / static_cast<double>(n - 1);
    idx.push_back(window.first + static_cast<std::size_t>(std::nearbyint(pos)));
  }
  return idx;
}

namespace detail {

/// Row-stochastic weights mapping `n_src` cells onto `n_dst` equal bins by overlap.
inline std::vector<std::vector<std::pair<std::size_t, double>>> bin_weights(std::size_t n_src, std::size_t n_dst) {
  std::vector<std::vector<std::pair<std::size_t, double>>> w(n_dst);
  const double ratio = static_cast<double>(n_src) / static_cast<double>(n_dst);
  for (std::size_t d = 0; d < n_dst; ++d) {
    const double lo = static_cast<double>(d) * ratio;
    const double hi = static_cast<double>(d + 1) * ratio;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(n_src, static_cast<std::size_t>(std::ceil(hi)));
    for (std::size_t s = first; s < last; ++s) {
      const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
      if (overlap > 0.0) w[d].emplace_back(s, overlap / ratio);
    }
  }
  return w;
}

}  // namespace detail

/// Area-weighted resampling of a depth frame onto the model grid, divided by
/// the depth scale.
inline Image resample_frame(const TactileFrame& frame, const ModelConfig& c) {
  const auto wy = detail::bin_weights(frame.rows(), c.grid_rows);
  const auto wx = detail::bin_weights(frame.cols(), c.grid_cols);
  std::vector<double> tmp(frame.rows() * c.grid_cols, 0.0);
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    for (std::size_t gc = 0; gc < c.grid_cols; ++gc) {
      double s = 0.0;
      for (const auto& [col, w] : wx[gc]) s += w * static_cast<double>(frame.at(r, col));
      tmp[r * c.grid_cols + gc] = s;
    }
  }
  Image img{c.grid_rows, c.grid_cols, std::vector<double>(c.grid_rows * c.grid_cols, 0.0)};
  for (std::size_t gr = 0; gr < c.grid_rows; ++gr) {
    for (std::size_t gc = 0; gc < c.grid_cols; ++gc) {
      double s = 0.0;
      for (const auto& [row, w] : wy[gr]) s += w * tmp[row * c.grid_cols + gc];
      img.data[gr * c.grid_cols + gc] = s / c.depth_scale_mm;
    }
  }
  return img;
}

/// Mirrors every frame of the sample with one of the four flip combinations.
inline ModelInput augment(const ModelInput& in, Rng& rng) {
  const auto choice = rng.below(4);
  const bool h = (choice & 1u) != 0;
  const bool v = (choice & 2u) != 0;
  ModelInput out = in;
  for (auto& f : out.frames) f = f.flipped(h, v);
  return out;
}

/// Analytic log10 estimates for one grasp; a failing estimator yields nullopt.
struct AnalyticInputs {
  std::optional<double> elastic;
  std::optional<double> hertz;
};

inline std::optional<double> clamp_to_labels(const std::optional<double>& v, const ModelConfig& c) {
  if (!v) return v;
  return std::clamp(*v, c.label_min, c.label_max);
}

inline AnalyticInputs analytic_inputs(const ContactFeatureSeries& features, const MaterialAssumptions& assumptions) {
  AnalyticInputs a;
  try {
    a.elastic = fit_elastic(features).log10_value;
  } catch (const Error&) {
  }
  try {
    a.hertz = fit_hertz_mdr(features, assumptions).log10_value;
  } catch (const Error&) {
  }
  return a;
}

/// Model input for one frame selection of a grasp.
inline ModelInput make_model_input(const GraspSequence& seq, const ContactFeatureSeries& features,
                                   const AnalyticInputs& analytic, const ModelConfig& c, std::size_t shift = 0) {
  ModelInput in;
  for (std::size_t i : sample_frames(features.window, c.n_frames, shift)) {
    in.frames.push_back(resample_frame(seq.frames()[i], c));
  }
  in.force_peak_n = seq.force_n()[features.window.last];
  in.width_at_contact_m = seq.width_m()[features.window.first];
  in.analytic_elastic = clamp_to_labels(analytic.elastic, c);
  in.analytic_hertz = clamp_to_labels(analytic.hertz, c);
  in.flags = c.flags;
  return in;
}

struct SampleOptions {
  std::size_t shifts = 1;  // training samples per grasp, one per start offset
  ContactOptions contact{};
  MaterialAssumptions assumptions{};
};

/// Labelled samples of one grasp, one per usable shift. Needs a label.
inline std::vector<Sample> make_samples(const GraspSequence& seq, const ModelConfig& c, const SampleOptions& opt) {
  require(seq.label_pa().has_value(), ErrorKind::InvalidValue, "training grasps need a modulus label");
  MaterialAssumptions assumptions = opt.assumptions;
  assumptions.sensor = seq.sensor();
  const ContactFeatureSeries features = extract_contact_features(seq, opt.contact);
  const AnalyticInputs analytic = analytic_inputs(features, assumptions);
  const double label = std::clamp(std::log10(*seq.label_pa()), c.label_min, c.label_max);
  std::vector<Sample> out;
  for (std::size_t s = 0; s < std::max<std::size_t>(1, opt.shifts); ++s) {
    if (s + c.n_frames > features.window.size()) break;
    out.push_back(Sample{make_model_input(seq, features, analytic, c, s), label, seq.metadata_or("object", "")});
  }
  require(!out.empty(), ErrorKind::WindowTooShort, "loading window too short for the model");
  return out;
}

}  // namespace tacmod::learn
