#pragma once

// Multi-tower hybrid regressor. Each frame goes through the same small
// convolutional tower; tower features plus optional force/width scalars feed
// decoder 1, whose output is fused with the analytic estimates in decoder 2.
// Everything runs in double precision with hand-written reverse passes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tacmod/core/error.hpp"
#include "tacmod/core/rng.hpp"

namespace tacmod::learn {

inline const double kLabelMinLog10 = std::log10(5e3);
inline const double kLabelMaxLog10 = std::log10(2.5e11);

/// Which scalar inputs reach the model.
struct FeatureFlags {
  bool force_width = true;
  bool analytic = true;

  friend bool operator==(const FeatureFlags&, const FeatureFlags&) = default;
};

struct ModelConfig {
  std::size_t n_frames = 3;
  std::size_t grid_rows = 24;
  std::size_t grid_cols = 32;
  std::array<std::size_t, 3> channels{8, 16, 32};
  std::array<std::size_t, 2> decoder1{64, 32};
  std::size_t decoder2_hidden = 16;
  double depth_scale_mm = 2.0;
  double force_scale_n = 30.0;
  double width_scale_m = 0.1;
  double label_min = kLabelMinLog10;
  double label_max = kLabelMaxLog10;
  FeatureFlags flags{};

  void validate() const {
    require(n_frames >= 1, ErrorKind::InvariantViolation, "n_frames must be at least 1");
    require(grid_rows >= 1 && grid_cols >= 1, ErrorKind::InvariantViolation, "model grid must be non-empty");
    for (std::size_t c : channels) require(c >= 1, ErrorKind::InvariantViolation, "channel counts must be positive");
    require(decoder1[0] >= 1 && decoder1[1] >= 1 && decoder2_hidden >= 1, ErrorKind::InvariantViolation,
            "decoder widths must be positive");
    require(depth_scale_mm > 0.0 && force_scale_n > 0.0 && width_scale_m > 0.0, ErrorKind::InvariantViolation,
            "input scales must be positive");
    require(std::isfinite(label_min) && std::isfinite(label_max) && label_min < label_max,
            ErrorKind::InvariantViolation, "label_min must be below label_max");
  }

  std::size_t scalar_count() const { return flags.force_width ? 2 : 0; }
  std::size_t analytic_count() const { return flags.analytic ? 2 : 0; }
  std::size_t decoder1_input() const { return n_frames * channels[2] + scalar_count(); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Output size of a 3x3, stride-2, pad-1 convolution along one axis.
inline std::size_t conv_out(std::size_t n) { return (n - 1) / 2 + 1; }

inline double normalize_label(double log10_value, const ModelConfig& c) {
  return (log10_value - c.label_min) / (c.label_max - c.label_min);
}

inline double denormalize_label(double y, const ModelConfig& c) { return c.label_min + y * (c.label_max - c.label_min); }

/// A depth image already resampled to the model grid and scaled.
struct Image {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  Image flipped(bool horizontal, bool vertical) const {
    Image out = *this;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        out.data[r * cols + c] = data[(vertical ? rows - 1 - r : r) * cols + (horizontal ? cols - 1 - c : c)];
      }
    }
    return out;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

struct ModelInput {
  std::vector<Image> frames;
  double force_peak_n = 0.0;
  double width_at_contact_m = 0.0;
  // log10 Pa, clamped to the label range; nullopt when the estimator failed.
  std::optional<double> analytic_elastic;
  std::optional<double> analytic_hertz;
  FeatureFlags flags{};

  friend bool operator==(const ModelInput&, const ModelInput&) = default;
};

struct Sample {
  ModelInput input;
  double label_log10 = 0.0;
  std::string object;  // grouping key for object-level splits
};

/// Named parameter tensor, row-major.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t size() const { return data.size(); }
};

// Fixed tensor order: conv1..3 (w, b), dec1 layers (w, b), dec2 layers (w, b).
enum ParamIndex : std::size_t {
  kConv1W, kConv1B, kConv2W, kConv2B, kConv3W, kConv3B,
  kDec1aW, kDec1aB, kDec1bW, kDec1bB,
  kDec2aW, kDec2aB, kDec2bW, kDec2bB,
  kParamCount
};

inline constexpr std::array<const char*, kParamCount> kLayerOfParam{
    "conv1", "conv1", "conv2", "conv2", "conv3", "conv3", "decoder1.0",
    "decoder1.0", "decoder1.1", "decoder1.1", "decoder2.0", "decoder2.0", "decoder2.1", "decoder2.1"};

struct ModelParameters {
  ModelConfig config;
  std::vector<Tensor> tensors;

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
  }

  void validate() const {
    config.validate();
    require(tensors.size() == kParamCount, ErrorKind::InvariantViolation, "unexpected tensor count");
    for (const auto& t : tensors) {
      for (double v : t.data) require(std::isfinite(v), ErrorKind::InvariantViolation, "weight " + t.name + " is not finite");
    }
  }
};

inline std::vector<std::vector<std::size_t>> parameter_shapes(const ModelConfig& c) {
  const auto& ch = c.channels;
  const std::size_t d2_in = c.decoder1[1] + c.analytic_count();
  return {{ch[0], 1, 3, 3},       {ch[0]},       {ch[1], ch[0], 3, 3}, {ch[1]},
          {ch[2], ch[1], 3, 3},   {ch[2]},       {c.decoder1[0], c.decoder1_input()},
          {c.decoder1[0]},        {c.decoder1[1], c.decoder1[0]},      {c.decoder1[1]},
          {c.decoder2_hidden, d2_in}, {c.decoder2_hidden}, {1, c.decoder2_hidden}, {1}};
}

inline const std::array<const char*, kParamCount> kParamNames{
    "conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias", "conv3.weight", "conv3.bias", "decoder1.0.weight",
    "decoder1.0.bias", "decoder1.1.weight", "decoder1.1.bias", "decoder2.0.weight", "decoder2.0.bias",
    "decoder2.1.weight", "decoder2.1.bias"};

/// Parameters with every entry zero.
inline ModelParameters zero_parameters(const ModelConfig& config) {
  config.validate();
  ModelParameters p{config, {}};
  const auto shapes = parameter_shapes(config);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    std::size_t n = 1;
    for (std::size_t s : shapes[i]) n *= s;
    p.tensors.push_back(Tensor{kParamNames[i], shapes[i], std::vector<double>(n, 0.0)});
  }
  return p;
}

/// Glorot-uniform weights, zero biases.
inline ModelParameters init_parameters(const ModelConfig& config, std::uint64_t seed) {
  ModelParameters p = zero_parameters(config);
  Rng rng(seed, 11);
  for (std::size_t i = 0; i < kParamCount; i += 2) {
    Tensor& w = p.tensors[i];
    std::size_t fan_in = 1;
    for (std::size_t k = 1; k < w.shape.size(); ++k) fan_in *= w.shape[k];
    const std::size_t receptive = w.shape.size() == 4 ? 9 : 1;
    const std::size_t fan_out = w.shape[0] * receptive;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data) v = rng.uniform(-limit, limit);
  }
  return p;
}

using Gradients = std::vector<std::vector<double>>;

inline Gradients zero_gradients(const ModelParameters& p) {
  Gradients g;
  g.reserve(p.tensors.size());
  for (const auto& t : p.tensors) g.emplace_back(t.size(), 0.0);
  return g;
}

namespace detail {

struct Volume {
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> v;

  double& at(std::size_t ci, std::size_t y, std::size_t x) { return v[(ci * h + y) * w + x]; }
  double at(std::size_t ci, std::size_t y, std::size_t x) const { return v[(ci * h + y) * w + x]; }
};

/// 3x3 / stride 2 / pad 1 convolution followed by tanh.
inline Volume conv_tanh(const Volume& in, const Tensor& weight, const Tensor& bias) {
  const std::size_t co = weight.shape[0];
  Volume out{co, conv_out(in.h), conv_out(in.w), {}};
  out.v.assign(co * out.h * out.w, 0.0);
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t y = 0; y < out.h; ++y) {
      for (std::size_t x = 0; x < out.w; ++x) {
        double s = bias.data[o];
        for (std::size_t i = 0; i < in.c; ++i) {
          const double* k = &weight.data[(o * in.c + i) * 9];
          for (std::size_t ky = 0; ky < 3; ++ky) {
            const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(2 * y + ky) - 1;
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(in.h)) continue;
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(2 * x + kx) - 1;
              if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(in.w)) continue;
              s += k[ky * 3 + kx] * in.at(i, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
            }
          }
        }
        out.at(o, y, x) = std::tanh(s);
      }
    }
  }
  return out;
}

/// Backward of conv_tanh. `grad_out` is w.r.t. the tanh output; returns the
/// gradient w.r.t. the input when `need_input` is set.
inline Volume conv_tanh_backward(const Volume& in, const Volume& out, const Volume& grad_out, const Tensor& weight,
                                 std::vector<double>& grad_w, std::vector<double>& grad_b, bool need_input) {
  Volume grad_in{in.c, in.h, in.w, {}};
  if (need_input) grad_in.v.assign(in.v.size(), 0.0);
  for (std::size_t o = 0; o < out.c; ++o) {
    for (std::size_t y = 0; y < out.h; ++y) {
      for (std::size_t x = 0; x < out.w; ++x) {
        const double t = out.at(o, y, x);
        const double g = grad_out.at(o, y, x) * (1.0 - t * t);
        grad_b[o] += g;
        for (std::size_t i = 0; i < in.c; ++i) {
          const std::size_t kbase = (o * in.c + i) * 9;
          for (std::size_t ky = 0; ky < 3; ++ky) {
            const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(2 * y + ky) - 1;
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(in.h)) continue;
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(2 * x + kx) - 1;
              if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(in.w)) continue;
              const auto uy = static_cast<std::size_t>(sy);
              const auto ux = static_cast<std::size_t>(sx);
              grad_w[kbase + ky * 3 + kx] += g * in.at(i, uy, ux);
              if (need_input) grad_in.at(i, uy, ux) += g * weight.data[kbase + ky * 3 + kx];
            }
          }
        }
      }
    }
  }
  return grad_in;
}

/// y = W x + b, optionally followed by tanh.
inline std::vector<double> dense(const std::vector<double>& x, const Tensor& w, const Tensor& b, bool activate) {
  const std::size_t n_out = w.shape[0];
  const std::size_t n_in = w.shape[1];
  std::vector<double> y(n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    double s = b.data[o];
    const double* row = &w.data[o * n_in];
    for (std::size_t i = 0; i < n_in; ++i) s += row[i] * x[i];
    y[o] = activate ? std::tanh(s) : s;
  }
  return y;
}

/// Backward of dense; `grad_pre` is w.r.t. the pre-activation.
inline std::vector<double> dense_backward(const std::vector<double>& x, const std::vector<double>& grad_pre,
                                          const Tensor& w, std::vector<double>& grad_w, std::vector<double>& grad_b) {
  const std::size_t n_out = w.shape[0];
  const std::size_t n_in = w.shape[1];
  std::vector<double> grad_x(n_in, 0.0);
  for (std::size_t o = 0; o < n_out; ++o) {
    const double g = grad_pre[o];
    grad_b[o] += g;
    for (std::size_t i = 0; i < n_in; ++i) {
      grad_w[o * n_in + i] += g * x[i];
      grad_x[i] += g * w.data[o * n_in + i];
    }
  }
  return grad_x;
}

inline std::vector<double> tanh_backward(const std::vector<double>& y, const std::vector<double>& grad_y) {
  std::vector<double> g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = grad_y[i] * (1.0 - y[i] * y[i]);
  return g;
}

template <typename Range>
void check_finite(const Range& values, std::size_t layer, const char* name) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      fail(ErrorKind::NumericalFault,
           "non-finite activation in layer " + std::to_string(layer) + " (" + name + ")");
    }
  }
}

struct TowerCache {
  Volume input;
  std::array<Volume, 3> act;
};

/// Everything the reverse pass needs from one forward pass.
struct ForwardCache {
  std::vector<TowerCache> towers;
  std::vector<double> fused;  // decoder-1 input
  std::vector<double> h1;
  std::vector<double> h2;
  std::vector<double> d2_in;
  std::vector<double> h3;
  double z = 0.0;
  double y = 0.0;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Normalized analytic estimate, 0.5 (mid-range) when unavailable.
inline double analytic_feature(const std::optional<double>& v, const ModelConfig& c) {
  if (!v) return 0.5;
  return std::clamp(normalize_label(*v, c), 0.0, 1.0);
}

inline ForwardCache forward_cached(const ModelInput& in, const ModelParameters& p) {
  const ModelConfig& c = p.config;
  require(in.frames.size() == c.n_frames, ErrorKind::InvalidValue,
          "model expects " + std::to_string(c.n_frames) + " frames, got " + std::to_string(in.frames.size()));
  require(in.flags == c.flags, ErrorKind::InvalidValue, "input feature flags differ from the model's");
  const auto& t = p.tensors;
  ForwardCache cache;
  cache.towers.resize(c.n_frames);
  for (std::size_t f = 0; f < c.n_frames; ++f) {
    const Image& img = in.frames[f];
    require(img.rows == c.grid_rows && img.cols == c.grid_cols && img.data.size() == img.rows * img.cols,
            ErrorKind::InvalidValue, "frame does not match the model grid");
    TowerCache& tc = cache.towers[f];
    tc.input = Volume{1, img.rows, img.cols, img.data};
    const Volume* prev = &tc.input;
    for (std::size_t l = 0; l < 3; ++l) {
      tc.act[l] = conv_tanh(*prev, t[2 * l], t[2 * l + 1]);
      check_finite(tc.act[l].v, l, kLayerOfParam[2 * l]);
      prev = &tc.act[l];
    }
    const Volume& last = tc.act[2];
    const double area = static_cast<double>(last.h * last.w);
    for (std::size_t ch = 0; ch < last.c; ++ch) {
      double s = 0.0;
      for (std::size_t k = 0; k < last.h * last.w; ++k) s += last.v[ch * last.h * last.w + k];
      cache.fused.push_back(s / area);
    }
  }
  if (c.flags.force_width) {
    cache.fused.push_back(in.force_peak_n / c.force_scale_n);
    cache.fused.push_back(in.width_at_contact_m / c.width_scale_m);
  }
  check_finite(cache.fused, 3, "decoder1.0 input");
  cache.h1 = dense(cache.fused, t[kDec1aW], t[kDec1aB], true);
  check_finite(cache.h1, 3, "decoder1.0");
  cache.h2 = dense(cache.h1, t[kDec1bW], t[kDec1bB], true);
  check_finite(cache.h2, 4, "decoder1.1");
  cache.d2_in = cache.h2;
  if (c.flags.analytic) {
    cache.d2_in.push_back(analytic_feature(in.analytic_elastic, c));
    cache.d2_in.push_back(analytic_feature(in.analytic_hertz, c));
  }
  cache.h3 = dense(cache.d2_in, t[kDec2aW], t[kDec2aB], true);
  check_finite(cache.h3, 5, "decoder2.0");
  cache.z = dense(cache.h3, t[kDec2bW], t[kDec2bB], false)[0];
  cache.y = sigmoid(cache.z);
  check_finite(std::array<double, 2>{cache.z, cache.y}, 6, "decoder2.1");
  return cache;
}

/// Accumulates d(scale * (y - target)^2) into `grads`.
inline void backward(const ForwardCache& cache, const ModelParameters& p, double target, double scale,
                     Gradients& grads) {
  const ModelConfig& c = p.config;
  const auto& t = p.tensors;
  const double dz = scale * 2.0 * (cache.y - target) * cache.y * (1.0 - cache.y);
  const std::vector<double> g_h3 = dense_backward(cache.h3, {dz}, t[kDec2bW], grads[kDec2bW], grads[kDec2bB]);
  const std::vector<double> g_d2 =
      dense_backward(cache.d2_in, tanh_backward(cache.h3, g_h3), t[kDec2aW], grads[kDec2aW], grads[kDec2aB]);
  const std::vector<double> g_h2(g_d2.begin(), g_d2.begin() + static_cast<std::ptrdiff_t>(cache.h2.size()));
  const std::vector<double> g_h1 =
      dense_backward(cache.h1, tanh_backward(cache.h2, g_h2), t[kDec1bW], grads[kDec1bW], grads[kDec1bB]);
  const std::vector<double> g_fused =
      dense_backward(cache.fused, tanh_backward(cache.h1, g_h1), t[kDec1aW], grads[kDec1aW], grads[kDec1aB]);

  const std::size_t feat = c.channels[2];
  for (std::size_t f = 0; f < cache.towers.size(); ++f) {
    const TowerCache& tc = cache.towers[f];
    const Volume& last = tc.act[2];
    const std::size_t hw = last.h * last.w;
    Volume g{last.c, last.h, last.w, std::vector<double>(last.v.size())};
    for (std::size_t ch = 0; ch < last.c; ++ch) {
      const double gv = g_fused[f * feat + ch] / static_cast<double>(hw);
      for (std::size_t k = 0; k < hw; ++k) g.v[ch * hw + k] = gv;
    }
    for (std::size_t l = 3; l-- > 0;) {
      const Volume& input = l == 0 ? tc.input : tc.act[l - 1];
      g = conv_tanh_backward(input, tc.act[l], g, t[2 * l], grads[2 * l], grads[2 * l + 1], l > 0);
    }
  }
}

}  // namespace detail

/// Maps the sigmoid output to log10 Pa, kept strictly inside the label range.
inline double output_log10(double y, const ModelConfig& c) {
  const double v = denormalize_label(y, c);
  const double lo = std::nextafter(c.label_min, c.label_max);
  const double hi = std::nextafter(c.label_max, c.label_min);
  return std::clamp(v, lo, hi);
}

/// Predicted log10 modulus (Pa).
inline double forward(const ModelInput& in, const ModelParameters& p) {
  return output_log10(detail::forward_cached(in, p).y, p.config);
}

/// Mean squared error on the normalized scale.
inline double loss(double prediction_log10, double label_log10, const ModelConfig& c) {
  const double d = normalize_label(prediction_log10, c) - normalize_label(label_log10, c);
  return d * d;
}

inline double batch_loss(const std::vector<double>& predictions, const std::vector<double>& labels,
                         const ModelConfig& c) {
  require(predictions.size() == labels.size() && !predictions.empty(), ErrorKind::LengthMismatch,
          "batch loss needs equally sized, non-empty inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) s += loss(predictions[i], labels[i], c);
  return s / static_cast<double>(predictions.size());
}

struct GradientResult {
  double loss = 0.0;
  Gradients grads;
};

/// Exact gradient of the mean batch loss. Samples are accumulated in index
/// order so the result does not depend on scheduling.
inline GradientResult gradient(const ModelParameters& p, const std::vector<const Sample*>& batch) {
  require(!batch.empty(), ErrorKind::EmptySplit, "gradient of an empty batch");
  GradientResult r{0.0, zero_gradients(p)};
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const Sample* s : batch) {
    const detail::ForwardCache cache = detail::forward_cached(s->input, p);
    const double target = normalize_label(s->label_log10, p.config);
    const double d = cache.y - target;
    r.loss += d * d * scale;
    detail::backward(cache, p, target, scale, r.grads);
  }
  return r;
}

inline GradientResult gradient(const ModelParameters& p, const std::vector<Sample>& batch) {
  std::vector<const Sample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  return gradient(p, ptrs);
}

/// Mean batch loss through the same path as `gradient`, for finite differences.
inline double mean_loss(const ModelParameters& p, const std::vector<Sample>& batch) {
  require(!batch.empty(), ErrorKind::EmptySplit, "loss of an empty batch");
  double s = 0.0;
  for (const auto& b : batch) {
    const double d = detail::forward_cached(b.input, p).y - normalize_label(b.label_log10, p.config);
    s += d * d;
  }
  return s / static_cast<double>(batch.size());
}

}  // namespace tacmod::learn
