#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tacmod/core/error.hpp"
#include "tacmod/hardness/shore.hpp"

namespace tacmod {

/// |log10(pred) - log10(truth)|.
inline double log10_error(double pred_pa, double truth_pa) {
  require(pred_pa > 0.0 && truth_pa > 0.0 && std::isfinite(pred_pa) && std::isfinite(truth_pa),
          ErrorKind::InvalidValue, "log10 error needs positive moduli");
  return std::abs(std::log10(pred_pa) - std::log10(truth_pa));
}

/// Fraction of (prediction, truth) pairs whose log10 error is strictly below 1.
inline double order_of_magnitude_accuracy(std::span<const std::pair<double, double>> pairs) {
  require(!pairs.empty(), ErrorKind::InvalidValue, "accuracy of an empty set");
  std::size_t hits = 0;
  for (const auto& [pred, truth] : pairs) hits += log10_error(pred, truth) < 1.0 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

/// RMSE in Shore 00 units after converting predictions to Shore 00.
inline double shore_rmse(std::span<const double> pred_pa, std::span<const double> truth_shore00) {
  require(pred_pa.size() == truth_shore00.size(), ErrorKind::LengthMismatch,
          "prediction and truth lists differ in length");
  require(!pred_pa.empty(), ErrorKind::InvalidValue, "RMSE of an empty set");
  double s = 0.0;
  for (std::size_t i = 0; i < pred_pa.size(); ++i) {
    const double d = shore::modulus_to_shore00(pred_pa[i]).value - truth_shore00[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(pred_pa.size()));
}

/// Report columns, in output order.
inline const std::array<std::string, 5> kReportMethods{"elastic", "hertz", "hooke", "learned", "hybrid"};

struct PredictionRow {
  std::string grasp;
  std::string object;
  std::string material;
  std::string shape;
  double truth_pa = 0.0;
  std::map<std::string, std::optional<double>> predictions_pa;
};

struct MethodStats {
  std::size_t available = 0;
  std::size_t unavailable = 0;
  double mean_log10_error = 0.0;
  double accuracy = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j{{"available", available}, {"unavailable", unavailable}};
    if (available > 0) {
      j["mean_log10_error"] = mean_log10_error;
      j["order_of_magnitude_accuracy"] = accuracy;
    } else {
      j["mean_log10_error"] = nullptr;
      j["order_of_magnitude_accuracy"] = nullptr;
    }
    return j;
  }
};

struct GroupStats {
  std::size_t count = 0;
  std::map<std::string, MethodStats> methods;
};

/// Sums that merge associatively, so rows can be folded in any order.
struct MethodAccumulator {
  std::size_t available = 0;
  std::size_t unavailable = 0;
  std::size_t hits = 0;
  std::vector<double> errors;

  void add(const std::optional<double>& pred, double truth) {
    if (!pred) {
      ++unavailable;
      return;
    }
    const double e = log10_error(*pred, truth);
    ++available;
    hits += e < 1.0 ? 1 : 0;
    errors.push_back(e);
  }

  MethodStats finish() const {
    MethodStats s{available, unavailable, 0.0, 0.0};
    if (available == 0) return s;
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());  // summation order independent of row order
    double sum = 0.0;
    for (double e : sorted) sum += e;
    s.mean_log10_error = sum / static_cast<double>(available);
    s.accuracy = static_cast<double>(hits) / static_cast<double>(available);
    return s;
  }
};

inline GroupStats summarize(const std::vector<const PredictionRow*>& rows) {
  GroupStats g;
  g.count = rows.size();
  for (const auto& m : kReportMethods) {
    MethodAccumulator acc;
    for (const PredictionRow* r : rows) {
      auto it = r->predictions_pa.find(m);
      acc.add(it == r->predictions_pa.end() ? std::nullopt : it->second, r->truth_pa);
    }
    g.methods[m] = acc.finish();
  }
  return g;
}

struct EvaluationReport {
  GroupStats overall;
  std::map<std::string, GroupStats> by_material;
  std::map<std::string, GroupStats> by_shape;
  std::vector<PredictionRow> rows;  // sorted by grasp id

  nlohmann::json to_json() const {
    auto group_json = [](const GroupStats& g) {
      nlohmann::json methods = nlohmann::json::object();
      for (const auto& [name, s] : g.methods) methods[name] = s.to_json();
      return nlohmann::json{{"count", g.count}, {"methods", methods}};
    };
    nlohmann::json j;
    j["total"] = overall.count;
    j["overall"] = group_json(overall);
    j["by_material"] = nlohmann::json::object();
    for (const auto& [k, g] : by_material) j["by_material"][k] = group_json(g);
    j["by_shape"] = nlohmann::json::object();
    for (const auto& [k, g] : by_shape) j["by_shape"][k] = group_json(g);
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json p{{"grasp", r.grasp},
                       {"object", r.object},
                       {"material", r.material},
                       {"shape", r.shape},
                       {"truth_pa", r.truth_pa}};
      for (const auto& m : kReportMethods) {
        auto it = r.predictions_pa.find(m);
        p[m + "_pa"] = it != r.predictions_pa.end() && it->second ? nlohmann::json(*it->second) : nlohmann::json();
      }
      preds.push_back(p);
    }
    j["predictions"] = preds;
    return j;
  }

  /// One row per grasp; unavailable estimates are empty cells.
  std::string to_csv() const {
    std::ostringstream out;
    out << "grasp,object,material,shape,truth_pa";
    for (const auto& m : kReportMethods) out << ',' << m << "_pa";
    out << '\n';
    char buf[64];
    auto num = [&buf](double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    for (const auto& r : rows) {
      out << r.grasp << ',' << r.object << ',' << r.material << ',' << r.shape << ',' << num(r.truth_pa);
      for (const auto& m : kReportMethods) {
        out << ',';
        auto it = r.predictions_pa.find(m);
        if (it != r.predictions_pa.end() && it->second) out << num(*it->second);
      }
      out << '\n';
    }
    return out.str();
  }
};

inline EvaluationReport build_report(std::vector<PredictionRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const PredictionRow& a, const PredictionRow& b) { return a.grasp < b.grasp; });
  EvaluationReport rep;
  rep.rows = std::move(rows);
  std::vector<const PredictionRow*> all;
  std::map<std::string, std::vector<const PredictionRow*>> mats;
  std::map<std::string, std::vector<const PredictionRow*>> shapes;
  for (const auto& r : rep.rows) {
    all.push_back(&r);
    mats[r.material].push_back(&r);
    shapes[r.shape].push_back(&r);
  }
  rep.overall = summarize(all);
  for (const auto& [k, v] : mats) rep.by_material[k] = summarize(v);
  for (const auto& [k, v] : shapes) rep.by_shape[k] = summarize(v);
  return rep;
}

}  // namespace tacmod
