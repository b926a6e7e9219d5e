#pragma once

// Synthetic benchmark: simulated sphere grasps over a log-uniform modulus
// range, object-disjoint train/test splits, hybrid and analytics-free models.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tacmod/core/rng.hpp"
#include "tacmod/core/types.hpp"
#include "tacmod/learn/dataset.hpp"
#include "tacmod/learn/train.hpp"
#include "tacmod/pipeline/pipeline.hpp"
#include "tacmod/sim/simulate.hpp"

namespace tacmod {

struct DatasetConfig {
  std::size_t objects = 20;
  std::size_t grasps_per_object = 2;
  double modulus_min_pa = 1e4;
  double modulus_max_pa = 1e10;
  double radius_min_m = 0.01;
  double radius_max_m = 0.03;
  double poisson = 0.4;
  double min_peak_force_n = 1.5;  // objects that cannot reach this on the sensor are redrawn
  double peak_force_jitter = 0.3;  // per-grasp peak force drawn from [1 - jitter, 1] of the feasible peak
  SimConfig sim{};
  SensorSpec sensor{};
  std::uint64_t seed = 0;
  std::string name_prefix = "obj";

  void validate() const {
    require(objects >= 1 && grasps_per_object >= 1, ErrorKind::InvalidValue, "need at least one object and grasp");
    require(modulus_min_pa > 0.0 && modulus_min_pa <= modulus_max_pa, ErrorKind::InvalidValue, "bad modulus range");
    require(radius_min_m > 0.0 && radius_min_m <= radius_max_m, ErrorKind::InvalidValue, "bad radius range");
    require(peak_force_jitter >= 0.0 && peak_force_jitter < 1.0, ErrorKind::InvalidValue,
            "peak force jitter must lie in [0, 1)");
  }
};

/// Coarse material class from the modulus, used for report breakdowns.
inline std::string material_band(double modulus_pa) {
  if (modulus_pa < 1e5) return "foam";
  if (modulus_pa < 1e7) return "rubber";
  if (modulus_pa < 1e9) return "polymer";
  return "rigid";
}

inline std::vector<SimObject> make_objects(const DatasetConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, 31);
  std::vector<SimObject> out;
  const double lo = std::log10(cfg.modulus_min_pa);
  const double hi = std::log10(cfg.modulus_max_pa);
  std::size_t attempts = 0;
  while (out.size() < cfg.objects) {
    require(++attempts < 1000 * cfg.objects, ErrorKind::InvalidValue,
            "modulus/radius ranges cannot reach the minimum peak force on this sensor");
    SimObject o;
    o.youngs_modulus_pa = std::pow(10.0, rng.uniform(lo, hi));
    o.radius_m = rng.uniform(cfg.radius_min_m, cfg.radius_max_m);
    o.poisson = cfg.poisson;
    if (peak_force_that_fits(o, cfg.sensor, 0.9, cfg.sim.peak_force_n) < cfg.min_peak_force_n) continue;
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04zu", cfg.name_prefix.c_str(), out.size());
    o.name = name;
    o.material = material_band(o.youngs_modulus_pa);
    out.push_back(o);
  }
  return out;
}

/// Simulates every grasp of every object in order and hands each to `visit`
/// without keeping it; grasp ids are "<object>_g<k>".
inline void for_each_grasp(const std::vector<SimObject>& objects, const DatasetConfig& cfg,
                           const std::function<void(GraspSequence&&)>& visit) {
  Rng rng(cfg.seed, 32);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SimObject& o = objects[i];
    const double peak = peak_force_that_fits(o, cfg.sensor, 0.9, cfg.sim.peak_force_n);
    for (std::size_t g = 0; g < cfg.grasps_per_object; ++g) {
      SimConfig sim = cfg.sim;
      sim.peak_force_n = peak * (1.0 - cfg.peak_force_jitter * rng.uniform());
      sim.seed = cfg.seed * 1000003u + i * 131u + g;
      Metadata meta{{"grasp", o.name + "_g" + std::to_string(g)}};
      visit(simulate_grasp(o, sim, cfg.sensor, nullptr, std::move(meta)));
    }
  }
}

inline std::vector<GraspSequence> simulate_dataset(const std::vector<SimObject>& objects, const DatasetConfig& cfg) {
  std::vector<GraspSequence> out;
  for_each_grasp(objects, cfg, [&out](GraspSequence&& g) { out.push_back(std::move(g)); });
  return out;
}

/// Training samples of one grasp appended to `out`; returns false when the
/// grasp yields none.
inline bool append_samples(const GraspSequence& g, const learn::ModelConfig& model, const learn::SampleOptions& opt,
                           std::vector<learn::Sample>& out) {
  try {
    auto s = learn::make_samples(g, model, opt);
    out.insert(out.end(), s.begin(), s.end());
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// Training samples of all grasps whose features can be extracted; the rest
/// are counted in `skipped`.
inline std::vector<learn::Sample> build_samples(const std::vector<GraspSequence>& grasps,
                                                const learn::ModelConfig& model, const learn::SampleOptions& opt,
                                                std::size_t* skipped = nullptr) {
  std::vector<learn::Sample> out;
  std::size_t bad = 0;
  for (const auto& g : grasps) bad += append_samples(g, model, opt, out) ? 0 : 1;
  if (skipped) *skipped = bad;
  return out;
}

struct BenchmarkConfig {
  DatasetConfig train_data{};
  DatasetConfig test_data{};
  learn::ModelConfig model{};
  learn::TrainConfig train{};
  learn::SampleOptions samples{};

  BenchmarkConfig() {
    train_data.objects = 240;
    train_data.grasps_per_object = 3;
    train_data.seed = 1;
    train_data.name_prefix = "train";
    test_data.objects = 100;
    test_data.grasps_per_object = 2;
    test_data.seed = 2;
    test_data.name_prefix = "test";
    train.epochs = 40;
    train.batch_size = 16;
    train.learning_rate = 0.02;
    samples.shifts = 1;
  }
};

struct BenchmarkResult {
  EvaluationReport report;
  double train_seconds = 0.0;
  std::vector<learn::EpochStats> hybrid_history;
  std::vector<learn::EpochStats> learned_history;

  double accuracy(const std::string& method) const { return report.overall.methods.at(method).accuracy; }
};

/// Trains a hybrid and an analytics-free model on the training objects and
/// evaluates every method on the unseen test objects.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg,
                                     const std::function<void(const std::string&)>& log = {}) {
  auto say = [&log](const std::string& s) {
    if (log) log(s);
  };
  const auto train_objects = make_objects(cfg.train_data);
  const auto test_objects = make_objects(cfg.test_data);
  std::set<std::pair<double, double>> seen;
  for (const auto& o : train_objects) seen.insert({o.youngs_modulus_pa, o.radius_m});
  for (const auto& o : test_objects) {
    require(!seen.count({o.youngs_modulus_pa, o.radius_m}), ErrorKind::InvalidValue,
            "test object duplicates a training object");
  }
  learn::ModelConfig hybrid_cfg = cfg.model;
  hybrid_cfg.flags.analytic = true;
  learn::ModelConfig learned_cfg = cfg.model;
  learned_cfg.flags.analytic = false;

  say("simulating training grasps");
  std::vector<learn::Sample> hybrid_samples;
  std::vector<learn::Sample> learned_samples;
  for_each_grasp(train_objects, cfg.train_data, [&](GraspSequence&& g) {
    append_samples(g, hybrid_cfg, cfg.samples, hybrid_samples);
    append_samples(g, learned_cfg, cfg.samples, learned_samples);
  });

  BenchmarkResult result;
  const auto t0 = std::chrono::steady_clock::now();
  say("training hybrid model on " + std::to_string(hybrid_samples.size()) + " samples");
  auto hybrid = learn::train(hybrid_samples, {}, hybrid_cfg, cfg.train);
  say("training analytics-free model on " + std::to_string(learned_samples.size()) + " samples");
  auto learned = learn::train(learned_samples, {}, learned_cfg, cfg.train);
  result.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.hybrid_history = hybrid.history;
  result.learned_history = learned.history;

  say("evaluating on unseen objects");
  const std::vector<const learn::ModelParameters*> models{&hybrid.params, &learned.params};
  std::vector<PredictionRow> rows;
  std::size_t index = 0;
  for_each_grasp(test_objects, cfg.test_data, [&](GraspSequence&& g) {
    rows.push_back(evaluate_grasp(g, index++, models));
  });
  result.report = build_report(std::move(rows));
  return result;
}

}  // namespace tacmod
