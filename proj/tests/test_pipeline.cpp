#include <gtest/gtest.h>

#include <filesystem>

#include "tacmod/pipeline/benchmark.hpp"
#include "tacmod/pipeline/external.hpp"
#include "tacmod/pipeline/metrics.hpp"
#include "tacmod/pipeline/pipeline.hpp"

using namespace tacmod;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no tacmod::Error thrown";
  return ErrorKind::InvariantViolation;
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tacmod_pipe_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

GraspSequence sim(double e, std::uint64_t seed, const std::string& object) {
  SimObject o;
  o.youngs_modulus_pa = e;
  o.name = object;
  SimConfig c;
  c.seed = seed;
  const SensorSpec s;
  c.peak_force_n = peak_force_that_fits(o, s);
  return simulate_grasp(o, c, s, nullptr, {{"grasp", object + "_g0"}});
}

}  // namespace

TEST(Metrics, Log10Error) {
  EXPECT_EQ(log10_error(3e5, 3e5), 0.0);
  EXPECT_NEAR(log10_error(1e6, 1e5), 1.0, 1e-15);
  EXPECT_NEAR(log10_error(5e5, 1e5), 0.69897, 1e-5);
  EXPECT_THROW(log10_error(0.0, 1.0), Error);
}

TEST(Metrics, OrderOfMagnitudeAccuracy) {
  const std::vector<std::pair<double, double>> exact{{1e5, 1e5}, {2e7, 2e7}};
  EXPECT_EQ(order_of_magnitude_accuracy(exact), 1.0);
  const std::vector<std::pair<double, double>> boundary{{1e6, 1e5}};
  EXPECT_EQ(order_of_magnitude_accuracy(boundary), 0.0);
  // errors 0.3, 0.99, 1.5, 2.0, 0.0 -> 3 of 5 strictly below 1
  const std::vector<std::pair<double, double>> mixed{{std::pow(10.0, 5.3), 1e5},
                                                     {std::pow(10.0, 4.01), 1e5},
                                                     {std::pow(10.0, 6.5), 1e5},
                                                     {1e3, 1e5},
                                                     {1e5, 1e5}};
  EXPECT_DOUBLE_EQ(order_of_magnitude_accuracy(mixed), 0.6);
}

TEST(Metrics, ShoreRmseHandCase) {
  // Predictions placed exactly at Shore 00 = 40, 55, 70 through the composed
  // map; truths 42, 55, 66 -> errors -2, 0, 4 -> sqrt((4 + 0 + 16) / 3).
  std::vector<double> pred;
  for (double s : {40.0, 55.0, 70.0}) pred.push_back(shore::shore00_to_modulus(s).value);
  const std::vector<double> truth{42.0, 55.0, 66.0};
  EXPECT_NEAR(shore_rmse(pred, truth), std::sqrt(20.0 / 3.0), 2e-3);
}

TEST(Metrics, ShoreRmseIdentityAndOffset) {
  std::vector<double> pred;
  std::vector<double> same;
  std::vector<double> shifted;
  for (double s : {20.0, 35.0, 60.0, 80.0}) {
    pred.push_back(shore::shore00_to_modulus(s).value);
    same.push_back(s);
    shifted.push_back(s + 5.0);
  }
  EXPECT_NEAR(shore_rmse(pred, same), 0.0, 1e-3);
  EXPECT_NEAR(shore_rmse(pred, shifted), 5.0, 1e-3);
  EXPECT_EQ(kind_of([&] { shore_rmse(pred, std::vector<double>{1.0}); }), ErrorKind::LengthMismatch);
}

TEST(Report, SummaryAndSerialization) {
  std::vector<PredictionRow> rows;
  rows.push_back({"b", "o2", "rubber", "sphere", 1e6, {{"elastic", 2e6}, {"hertz", std::nullopt}}});
  rows.push_back({"a", "o1", "foam", "sphere", 1e4, {{"elastic", 1e6}, {"hertz", 2e4}}});
  const EvaluationReport rep = build_report(rows);
  EXPECT_EQ(rep.rows[0].grasp, "a");
  EXPECT_EQ(rep.overall.count, 2u);
  const MethodStats& el = rep.overall.methods.at("elastic");
  EXPECT_EQ(el.available, 2u);
  EXPECT_DOUBLE_EQ(el.accuracy, 0.5);
  EXPECT_NEAR(el.mean_log10_error, (2.0 + std::log10(2.0)) / 2.0, 1e-12);
  const MethodStats& he = rep.overall.methods.at("hertz");
  EXPECT_EQ(he.available, 1u);
  EXPECT_EQ(he.unavailable, 1u);
  EXPECT_EQ(rep.by_material.at("foam").count, 1u);

  const auto j = rep.to_json();
  EXPECT_EQ(j["total"], 2);
  EXPECT_TRUE(j["predictions"][1]["hertz_pa"].is_null());
  const std::string csv = rep.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "grasp,object,material,shape,truth_pa,elastic_pa,hertz_pa,hooke_pa,learned_pa,hybrid_pa");
  EXPECT_NE(csv.find("b,o2,rubber,sphere,1000000,2000000,,,,"), std::string::npos);
}

TEST(Pipeline, AnalyticOnlyWithoutCheckpoints) {
  const PipelineResult r = run_pipeline(sim(3e5, 1, "ball"), {});
  EXPECT_TRUE(r.elastic.has_value());
  EXPECT_TRUE(r.hertz.has_value());
  EXPECT_TRUE(r.hooke_pa.has_value());
  EXPECT_FALSE(r.learned.has_value());
  EXPECT_FALSE(r.hybrid.has_value());
  EXPECT_TRUE(r.unavailable.count("learned"));
}

TEST(Pipeline, NonMonotonicLoadingAborts) {
  const GraspSequence g = sim(3e5, 1, "ball");
  std::vector<double> force = g.force_n();
  const std::size_t mid = force.size() / 2;
  force[mid] = 0.5 * force[mid - 1];
  const GraspSequence bad(g.sensor(), g.frames(), force, g.width_m(), g.label_pa(), g.metadata());
  EXPECT_EQ(kind_of([&] { run_pipeline(bad, {}); }), ErrorKind::NonMonotonicLoading);
  const PredictionRow row = evaluate_grasp(bad, 0, {});
  for (const auto& m : kReportMethods) EXPECT_FALSE(row.predictions_pa.at(m).has_value());
}

TEST(Pipeline, ModelsAreRoutedByFlags) {
  learn::ModelConfig c;
  c.grid_rows = 6;
  c.grid_cols = 8;
  c.channels = {2, 2, 2};
  c.decoder1 = {4, 4};
  c.decoder2_hidden = 3;
  const auto hybrid = learn::init_parameters(c, 1);
  c.flags.analytic = false;
  const auto learned = learn::init_parameters(c, 1);
  const PipelineResult r = run_pipeline(sim(3e5, 1, "ball"), {&hybrid, &learned});
  EXPECT_TRUE(r.hybrid.has_value());
  EXPECT_TRUE(r.learned.has_value());
  EXPECT_EQ(r.hybrid->method, EstimateMethod::hybrid);
  EXPECT_TRUE(r.unavailable.empty());
}

TEST(Pipeline, HertzBeatsHookeOnSyntheticBatch) {
  DatasetConfig d;
  d.objects = 50;
  d.grasps_per_object = 2;
  d.seed = 9;
  const auto objects = make_objects(d);
  std::vector<PredictionRow> rows;
  std::size_t i = 0;
  for_each_grasp(objects, d, [&](GraspSequence&& g) { rows.push_back(evaluate_grasp(g, i++, {})); });
  const EvaluationReport rep = build_report(std::move(rows));
  EXPECT_EQ(rep.overall.count, 100u);
  EXPECT_GT(rep.overall.methods.at("hertz").accuracy, rep.overall.methods.at("hooke").accuracy);
}

TEST(Npy, EncodeParseRoundTrip) {
  const std::vector<float> data{1, 2, 3, 4, 5, 6};
  const auto a = npy::parse(npy::encode(2, 3, data));
  EXPECT_EQ(a.rows, 2u);
  EXPECT_EQ(a.cols, 3u);
  EXPECT_EQ(a.data, data);
}

TEST(Npy, FortranFloat64) {
  std::string header = "{'descr': '<f8', 'fortran_order': True, 'shape': (2, 3), }";
  header.append(64 - (10 + header.size() + 1) % 64, ' ');
  header.push_back('\n');
  io::Bytes b{0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0, static_cast<std::uint8_t>(header.size()), 0};
  b.insert(b.end(), header.begin(), header.end());
  // Column-major storage of [[1, 2, 3], [4, 5, 6]].
  for (double v : {1.0, 4.0, 2.0, 5.0, 3.0, 6.0}) {
    std::uint8_t raw[8];
    std::memcpy(raw, &v, 8);
    b.insert(b.end(), raw, raw + 8);
  }
  const auto a = npy::parse(b);
  EXPECT_EQ(a.data, (std::vector<float>{1, 2, 3, 4, 5, 6}));
  b.pop_back();
  EXPECT_EQ(kind_of([&] { npy::parse(b); }), ErrorKind::TruncatedPayload);
}

TEST(External, EmptyDirectoryHasZeroGrasps) {
  const fs::path root = fresh_dir("empty");
  EXPECT_EQ(kind_of([&] { ingest_external_dataset(root); }), ErrorKind::ZeroGrasps);
  EXPECT_EQ(kind_of([&] { ingest_external_dataset(root / "missing"); }), ErrorKind::PathMissing);
  fs::remove_all(root);
}

TEST(External, ExporterRoundTrip) {
  const fs::path root = fresh_dir("roundtrip");
  std::vector<GraspSequence> grasps{sim(3e5, 1, "alpha"), sim(2e7, 2, "beta"), sim(2e7, 3, "beta")};
  export_external_dataset(grasps, root);
  const IngestResult r = ingest_external_dataset(root);
  EXPECT_EQ(r.attempted, 3u);
  EXPECT_EQ(r.skipped, 0u);
  EXPECT_DOUBLE_EQ(r.parse_rate(), 1.0);
  ASSERT_EQ(r.grasps.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const GraspSequence& a = grasps[i];
    const GraspSequence& b = r.grasps[i];
    EXPECT_EQ(b.frames(), a.frames());
    EXPECT_EQ(b.force_n(), a.force_n());
    EXPECT_EQ(b.width_m(), a.width_m());
    EXPECT_EQ(b.label_pa(), a.label_pa());
    EXPECT_EQ(b.sensor(), a.sensor());
    EXPECT_EQ(b.metadata().at("object"), a.metadata().at("object"));
  }
  fs::remove_all(root);
}

TEST(External, LabelOutsideRangeIsSkipped) {
  const fs::path root = fresh_dir("labels");
  std::vector<GraspSequence> grasps{sim(3e5, 1, "ok")};
  const GraspSequence& g = grasps[0];
  Metadata meta = g.metadata();
  meta["object"] = "too_soft";
  grasps.emplace_back(g.sensor(), g.frames(), g.force_n(), g.width_m(), 1e3, meta);
  export_external_dataset(grasps, root);
  const IngestResult r = ingest_external_dataset(root);
  EXPECT_EQ(r.grasps.size(), 1u);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_DOUBLE_EQ(r.parse_rate(), 0.5);
  EXPECT_FALSE(r.warnings.empty());
  fs::remove_all(root);
}

TEST(Benchmark, ObjectsAreReproducibleAndDisjoint) {
  DatasetConfig a;
  a.objects = 30;
  a.seed = 1;
  DatasetConfig b = a;
  b.seed = 2;
  const auto oa = make_objects(a);
  const auto ob = make_objects(b);
  const auto oa2 = make_objects(a);
  for (std::size_t i = 0; i < oa.size(); ++i) {
    EXPECT_EQ(oa[i].youngs_modulus_pa, oa2[i].youngs_modulus_pa);
    EXPECT_GE(peak_force_that_fits(oa[i], a.sensor, 0.9, a.sim.peak_force_n), a.min_peak_force_n);
    for (const auto& o : ob) EXPECT_NE(o.youngs_modulus_pa, oa[i].youngs_modulus_pa);
  }
  EXPECT_EQ(material_band(5e4), "foam");
  EXPECT_EQ(material_band(5e6), "rubber");
  EXPECT_EQ(material_band(5e8), "polymer");
  EXPECT_EQ(material_band(5e9), "rigid");
}
