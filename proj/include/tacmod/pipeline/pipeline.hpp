#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tacmod/analytic/estimators.hpp"
#include "tacmod/contact/features.hpp"
#include "tacmod/core/error.hpp"
#include "tacmod/core/types.hpp"
#include "tacmod/learn/checkpoint.hpp"
#include "tacmod/learn/dataset.hpp"
#include "tacmod/learn/model.hpp"
#include "tacmod/pipeline/metrics.hpp"

namespace tacmod {

struct PipelineOptions {
  ContactOptions contact{};
  double poisson_obj = 0.4;
  Calibration calibration{};
};

/// Every estimate for one grasp. Missing entries are listed in `unavailable`
/// with the reason.
struct PipelineResult {
  std::optional<ModulusEstimate> elastic;
  std::optional<ModulusEstimate> hertz;
  std::optional<double> hooke_pa;
  std::optional<ModulusEstimate> learned;
  std::optional<ModulusEstimate> hybrid;
  std::map<std::string, std::string> unavailable;
  ContactFeatureSeries features;

  std::map<std::string, std::optional<double>> predictions_pa() const {
    auto v = [](const std::optional<ModulusEstimate>& e) {
      return e ? std::optional<double>(e->value_pa) : std::nullopt;
    };
    return {{"elastic", v(elastic)}, {"hertz", v(hertz)}, {"hooke", hooke_pa}, {"learned", v(learned)},
            {"hybrid", v(hybrid)}};
  }
};

/// Contact features, then the analytic estimators, then one learned estimate
/// per checkpoint. Feature extraction failures (no contact, non-monotonic
/// loading, too short a window) abort; individual estimators degrade.
inline PipelineResult run_pipeline(const GraspSequence& seq, const std::vector<const learn::ModelParameters*>& models,
                                   const PipelineOptions& options = {}) {
  PipelineResult r;
  r.features = extract_contact_features(seq, options.contact);
  const MaterialAssumptions assumptions{options.poisson_obj, seq.sensor()};

  try {
    r.elastic = fit_elastic(r.features);
  } catch (const Error& e) {
    r.unavailable["elastic"] = e.what();
  }
  try {
    r.hertz = fit_hertz_mdr(r.features, assumptions, HertzOptions{options.calibration});
  } catch (const Error& e) {
    r.unavailable["hertz"] = e.what();
  }
  try {
    r.hooke_pa = fit_hooke_baseline(seq, options.contact).pseudo_modulus_pa;
  } catch (const Error& e) {
    r.unavailable["hooke"] = e.what();
  }

  // The models were trained on uncalibrated analytic inputs.
  const learn::AnalyticInputs analytic = learn::analytic_inputs(r.features, assumptions);
  for (const auto* model : models) {
    const EstimateMethod method = learn::checkpoint_method(*model);
    const std::string name(to_string(method));
    try {
      const learn::ModelInput in = learn::make_model_input(seq, r.features, analytic, model->config);
      const ModulusEstimate est = ModulusEstimate::from_log10(learn::forward(in, *model), method);
      (method == EstimateMethod::hybrid ? r.hybrid : r.learned) = est;
    } catch (const Error& e) {
      r.unavailable[name] = e.what();
    }
  }
  if (!r.learned && !r.unavailable.count("learned")) r.unavailable["learned"] = "no checkpoint without analytic inputs";
  if (!r.hybrid && !r.unavailable.count("hybrid")) r.unavailable["hybrid"] = "no checkpoint with analytic inputs";
  return r;
}

/// Identifier used in report rows: metadata "grasp" if present, else the index.
inline std::string grasp_id(const GraspSequence& seq, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "grasp_%05zu", index);
  return seq.metadata_or("grasp", buf);
}

/// One report row. A grasp whose pipeline aborts gets every estimate unavailable.
inline PredictionRow evaluate_grasp(const GraspSequence& g, std::size_t index,
                                    const std::vector<const learn::ModelParameters*>& models,
                                    const PipelineOptions& options = {}) {
  require(g.label_pa().has_value(), ErrorKind::InvalidValue, "evaluation needs labelled grasps");
  PredictionRow row{grasp_id(g, index), g.metadata_or("object", ""), g.metadata_or("material", "unknown"),
                    g.metadata_or("shape", "unknown"), *g.label_pa(), {}};
  try {
    row.predictions_pa = run_pipeline(g, models, options).predictions_pa();
  } catch (const Error&) {
    for (const auto& m : kReportMethods) row.predictions_pa[m] = std::nullopt;
  }
  return row;
}

inline EvaluationReport evaluate_grasps(const std::vector<GraspSequence>& grasps,
                                        const std::vector<const learn::ModelParameters*>& models,
                                        const PipelineOptions& options = {}) {
  std::vector<PredictionRow> rows;
  for (std::size_t i = 0; i < grasps.size(); ++i) rows.push_back(evaluate_grasp(grasps[i], i, models, options));
  return build_report(std::move(rows));
}

}  // namespace tacmod
