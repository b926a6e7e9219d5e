#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tacmod/core/error.hpp"
#include "tacmod/core/rng.hpp"
#include "tacmod/learn/dataset.hpp"
#include "tacmod/learn/model.hpp"

namespace tacmod::learn {

struct TrainConfig {
  std::size_t epochs = 80;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool augmentation = true;

  void validate() const {
    require(epochs >= 1, ErrorKind::InvariantViolation, "epochs must be at least 1");
    require(batch_size >= 1, ErrorKind::InvariantViolation, "batch size must be at least 1");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorKind::InvariantViolation,
            "learning rate must be positive");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::InvariantViolation, "momentum must lie in [0, 1)");
  }
};

struct EpochStats {
  double train_loss = 0.0;
  std::optional<double> eval_loss;
};

struct TrainResult {
  ModelParameters params;
  std::vector<EpochStats> history;
};

/// Partition by object so no object lands on both sides. Objects are
/// shuffled with `seed`; `eval_fraction` of them (at least one) go to eval.
inline std::pair<std::vector<Sample>, std::vector<Sample>> split_by_object(const std::vector<Sample>& samples,
                                                                           double eval_fraction, std::uint64_t seed) {
  std::set<std::string> names;
  for (const auto& s : samples) names.insert(s.object);
  std::vector<std::string> objects(names.begin(), names.end());
  require(objects.size() >= 2, ErrorKind::EmptySplit, "need at least two objects to split");
  Rng rng(seed, 13);
  rng.shuffle(std::span<std::string>(objects));
  auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(objects.size())));
  n_eval = std::clamp<std::size_t>(n_eval, 1, objects.size() - 1);
  const std::set<std::string> eval_objects(objects.begin(), objects.begin() + static_cast<std::ptrdiff_t>(n_eval));
  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  for (const auto& s : samples) (eval_objects.count(s.object) ? out.second : out.first).push_back(s);
  return out;
}

inline double evaluate_loss(const ModelParameters& p, const std::vector<Sample>& samples) {
  return mean_loss(p, samples);
}

/// Mini-batch SGD with momentum on the mean squared normalized error.
/// `on_epoch` is called after every epoch (for progress output).
inline TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& eval_set,
                         const ModelConfig& model, const TrainConfig& cfg,
                         const std::function<void(std::size_t, const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  model.validate();
  require(!train_set.empty(), ErrorKind::EmptySplit, "training split is empty");
  for (const auto& s : train_set) {
    require(s.input.flags == model.flags, ErrorKind::InvalidValue, "training sample flags differ from model flags");
  }
  std::set<std::string> train_objects;
  for (const auto& s : train_set) train_objects.insert(s.object);
  for (const auto& s : eval_set) {
    require(!train_objects.count(s.object) || s.object.empty(), ErrorKind::InvalidValue,
            "object " + s.object + " appears in both training and evaluation splits");
  }

  TrainResult result{init_parameters(model, cfg.seed), {}};
  ModelParameters& p = result.params;
  Gradients velocity = zero_gradients(p);
  Rng order_rng(cfg.seed, 21);
  Rng flip_rng(cfg.seed, 22);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<Sample> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        Sample s = train_set[order[i]];
        if (cfg.augmentation) s.input = augment(s.input, flip_rng);
        batch.push_back(std::move(s));
      }
      const GradientResult g = gradient(p, batch);
      epoch_loss += g.loss * static_cast<double>(batch.size());
      for (std::size_t t = 0; t < p.tensors.size(); ++t) {
        auto& w = p.tensors[t].data;
        auto& v = velocity[t];
        for (std::size_t k = 0; k < w.size(); ++k) {
          v[k] = cfg.momentum * v[k] - cfg.learning_rate * g.grads[t][k];
          w[k] += v[k];
        }
      }
    }
    EpochStats stats{epoch_loss / static_cast<double>(train_set.size()), std::nullopt};
    if (!eval_set.empty()) stats.eval_loss = evaluate_loss(p, eval_set);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(epoch, stats);
  }
  return result;
}

}  // namespace tacmod::learn
