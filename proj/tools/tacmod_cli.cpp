// Command-line front end: simulate, estimate, train, evaluate, convert, ingest, export.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tacmod/tacmod.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tacmod;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
};

std::vector<fs::path> record_paths(const fs::path& dir) {
  auto paths = list_grasp_records(dir);
  require(!paths.empty(), ErrorKind::ZeroGrasps, "no grasp records under " + dir.string());
  return paths;
}

std::vector<GraspSequence> load_records(const fs::path& dir) {
  std::vector<GraspSequence> out;
  for (const auto& p : list_grasp_records(dir)) out.push_back(read_grasp_record(p));
  require(!out.empty(), ErrorKind::ZeroGrasps, "no grasp records under " + dir.string());
  return out;
}

std::vector<learn::ModelParameters> load_models(const std::vector<std::string>& paths) {
  std::vector<learn::ModelParameters> out;
  for (const auto& p : paths) out.push_back(learn::load_checkpoint(p));
  return out;
}

std::vector<const learn::ModelParameters*> pointers(const std::vector<learn::ModelParameters>& models) {
  std::vector<const learn::ModelParameters*> out;
  for (const auto& m : models) out.push_back(&m);
  return out;
}

json estimate_json(const std::optional<ModulusEstimate>& e) {
  if (!e) return nullptr;
  return {{"value_pa", e->value_pa},
          {"log10_pa", e->log10_value},
          {"clamped", e->diagnostics.clamped},
          {"rigid_limit", e->diagnostics.rigid_limit}};
}

std::string flags_text(const shore::Conversion& c) {
  std::string s;
  if (c.clamped) s += " clamped";
  if (c.near_singularity) s += " near-singularity";
  return s.empty() ? " none" : s;
}

/// Splices values from the --config JSON in front of the real arguments so
/// explicit flags (parsed later, last one wins) take precedence.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") path = args[i + 1];
  }
  for (const auto& a : args) {
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  }
  if (path.empty()) return args;
  json cfg;
  try {
    cfg = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidValue, std::string("config file is not valid JSON: ") + e.what());
  }
  require(cfg.is_object(), ErrorKind::InvalidValue, "config file must hold a JSON object");
  auto emit = [](std::vector<std::string>& out, const std::string& key, const json& v) {
    const std::string flag = "--" + key;
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back(flag);
    } else if (v.is_array()) {
      for (const auto& item : v) {
        out.push_back(flag);
        out.push_back(item.is_string() ? item.get<std::string>() : item.dump());
      }
    } else {
      out.push_back(flag);
      out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
  };
  static const std::set<std::string> commands{"simulate", "estimate", "train", "evaluate", "convert", "ingest",
                                              "export"};
  std::vector<std::string> out{args[0]};
  for (const auto& [k, v] : cfg.items()) {
    if (!commands.count(k)) emit(out, k, v);
  }
  std::size_t i = 1;
  for (; i < args.size(); ++i) {
    out.push_back(args[i]);
    if (commands.count(args[i])) {
      if (cfg.contains(args[i])) {
        require(cfg[args[i]].is_object(), ErrorKind::InvalidValue, "config section " + args[i] + " must be an object");
        for (const auto& [k, v] : cfg[args[i]].items()) emit(out, k, v);
      }
      ++i;
      break;
    }
  }
  for (; i < args.size(); ++i) out.push_back(args[i]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Young's modulus estimation from tactile grasps", "tacmod"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Default seed for subcommands");
  app.add_option("--config", g.config, "JSON file with default flag values");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Write simulated sphere grasps as grasp records");
  std::optional<double> sim_modulus;
  std::optional<double> sim_radius;
  std::optional<std::uint64_t> sim_seed;
  DatasetConfig ds;
  std::string sim_out;
  bool sim_zip = false;
  sim->add_option("--modulus-pa", sim_modulus, "Young's modulus of every object (overrides the range)");
  sim->add_option("--modulus-min-pa", ds.modulus_min_pa, "Lower end of the log-uniform modulus range");
  sim->add_option("--modulus-max-pa", ds.modulus_max_pa, "Upper end of the log-uniform modulus range");
  sim->add_option("--radius-m", sim_radius, "Sphere radius of every object (overrides the range)");
  sim->add_option("--radius-min-m", ds.radius_min_m);
  sim->add_option("--radius-max-m", ds.radius_max_m);
  sim->add_option("--count", ds.objects, "Number of objects");
  sim->add_option("--grasps-per-object", ds.grasps_per_object);
  sim->add_option("--noise-depth-mm", ds.sim.depth_noise_std_mm);
  sim->add_option("--noise-force-n", ds.sim.force_noise_std_n);
  sim->add_option("--peak-force-n", ds.sim.peak_force_n, "Upper bound on the grasp force");
  sim->add_option("--poisson", ds.poisson);
  sim->add_option("--seed", sim_seed);
  sim->add_option("--prefix", ds.name_prefix, "Object name prefix");
  sim->add_flag("--zip", sim_zip, "Write .zip records instead of directories");
  sim->add_option("--out", sim_out, "Output directory")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Run every estimator on one grasp record");
  std::string est_record;
  std::vector<std::string> est_checkpoints;
  std::string est_calibration;
  PipelineOptions est_opts;
  est->add_option("--record", est_record)->required();
  est->add_option("--checkpoint", est_checkpoints, "Model checkpoint; repeat for hybrid and learned")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  est->add_option("--calibration", est_calibration, "JSON {scale, offset} applied to the Hertz estimate");
  est->add_option("--poisson", est_opts.poisson_obj);
  est->add_option("--mask-threshold-mm", est_opts.contact.mask_threshold_mm);

  // train
  auto* tr = app.add_subcommand("train", "Train a model on a directory of grasp records");
  std::string tr_data;
  std::string tr_out;
  std::string tr_history;
  std::string tr_ablation = "none";
  std::optional<std::uint64_t> tr_seed;
  double tr_eval_fraction = 0.0;
  learn::TrainConfig tcfg;
  learn::SampleOptions sopt;
  tr->add_option("--data", tr_data)->required();
  tr->add_option("--out", tr_out, "Checkpoint path")->required();
  tr->add_option("--epochs", tcfg.epochs);
  tr->add_option("--batch-size", tcfg.batch_size);
  tr->add_option("--lr", tcfg.learning_rate);
  tr->add_option("--momentum", tcfg.momentum);
  tr->add_option("--seed", tr_seed);
  tr->add_option("--shifts", sopt.shifts, "Training samples per grasp (start offsets)");
  tr->add_option("--ablation", tr_ablation, "Disable inputs")
      ->check(CLI::IsMember({"none", "no-analytic", "no-force-width", "no-analytic-no-force-width"}));
  tr->add_option("--eval-fraction", tr_eval_fraction, "Fraction of objects held out for the eval loss");
  tr->add_option("--history", tr_history, "Write per-epoch losses as JSON");
  bool tr_no_aug = false;
  tr->add_flag("--no-augmentation", tr_no_aug);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate all estimators on labelled grasp records");
  std::string ev_data;
  std::vector<std::string> ev_checkpoints;
  std::string ev_json;
  std::string ev_csv;
  std::string ev_calibration;
  PipelineOptions ev_opts;
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--checkpoint", ev_checkpoints)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  ev->add_option("--out-json", ev_json);
  ev->add_option("--out-csv", ev_csv);
  ev->add_option("--calibration", ev_calibration);
  ev->add_option("--poisson", ev_opts.poisson_obj);

  // convert
  auto* cv = app.add_subcommand("convert", "Convert between Shore A, Shore 00 and Pa");
  std::string cv_from;
  std::string cv_to;
  double cv_value = 0.0;
  const std::vector<std::string> units{"shore-a", "shore-00", "pa"};
  cv->add_option("--from", cv_from)->required()->check(CLI::IsMember(units));
  cv->add_option("--to", cv_to)->required()->check(CLI::IsMember(units));
  cv->add_option("--value", cv_value)->required();

  // ingest / export
  auto* in = app.add_subcommand("ingest", "Convert an external dataset into grasp records");
  std::string in_dir;
  std::string in_out;
  in->add_option("--in", in_dir)->required();
  in->add_option("--out", in_out, "Record output directory (omit to only validate)");
  auto* ex = app.add_subcommand("export", "Write grasp records in the external dataset layout");
  std::string ex_data;
  std::string ex_out;
  ex->add_option("--data", ex_data)->required();
  ex->add_option("--out", ex_out)->required();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = apply_config(args);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    if (sim->parsed()) {
      ds.seed = sim_seed ? *sim_seed : g.seed;
      if (sim_modulus) ds.modulus_min_pa = ds.modulus_max_pa = *sim_modulus;
      if (sim_radius) ds.radius_min_m = ds.radius_max_m = *sim_radius;
      const auto objects = make_objects(ds);
      fs::create_directories(sim_out);
      std::size_t written = 0;
      for_each_grasp(objects, ds, [&](GraspSequence&& g) {
        const std::string id = grasp_id(g, written++);
        write_grasp_record(g, fs::path(sim_out) / (sim_zip ? id + ".zip" : id));
      });
      std::cout << "wrote " << written << " grasps of " << objects.size() << " objects to " << sim_out << '\n';
    } else if (est->parsed()) {
      if (!est_calibration.empty()) est_opts.calibration = Calibration::load(est_calibration);
      const GraspSequence seq = read_grasp_record(est_record);
      const auto models = load_models(est_checkpoints);
      const PipelineResult r = run_pipeline(seq, pointers(models), est_opts);
      json out{{"elastic", estimate_json(r.elastic)},
               {"hertz", estimate_json(r.hertz)},
               {"learned", estimate_json(r.learned)},
               {"hybrid", estimate_json(r.hybrid)},
               {"hooke_pa", r.hooke_pa ? json(*r.hooke_pa) : json()},
               {"unavailable", r.unavailable}};
      if (seq.label_pa()) out["label_pa"] = *seq.label_pa();
      std::cout << out.dump(2) << '\n';
    } else if (tr->parsed()) {
      tcfg.seed = tr_seed ? *tr_seed : g.seed;
      tcfg.augmentation = !tr_no_aug;
      learn::ModelConfig mcfg;
      mcfg.flags.analytic = tr_ablation == "none" || tr_ablation == "no-force-width";
      mcfg.flags.force_width = tr_ablation == "none" || tr_ablation == "no-analytic";
      std::size_t skipped = 0;
      std::vector<learn::Sample> samples;
      for (const auto& p : record_paths(tr_data)) {
        if (!append_samples(read_grasp_record(p), mcfg, sopt, samples)) ++skipped;
      }
      std::vector<learn::Sample> train_set = samples;
      std::vector<learn::Sample> eval_set;
      if (tr_eval_fraction > 0.0) std::tie(train_set, eval_set) = learn::split_by_object(samples, tr_eval_fraction, tcfg.seed);
      std::cout << "samples: " << train_set.size() << " train, " << eval_set.size() << " eval, " << skipped
                << " grasps skipped\n";
      const auto result = learn::train(train_set, eval_set, mcfg, tcfg, [](std::size_t e, const learn::EpochStats& s) {
        std::printf("epoch %zu train_loss %.6g", e + 1, s.train_loss);
        if (s.eval_loss) std::printf(" eval_loss %.6g", *s.eval_loss);
        std::printf("\n");
      });
      learn::save_checkpoint(result.params, tr_out);
      if (!tr_history.empty()) {
        json h = json::array();
        for (const auto& s : result.history) {
          h.push_back({{"train_loss", s.train_loss}, {"eval_loss", s.eval_loss ? json(*s.eval_loss) : json()}});
        }
        io::write_text(tr_history, h.dump(2) + "\n");
      }
      std::cout << "saved " << to_string(learn::checkpoint_method(result.params)) << " checkpoint to " << tr_out << '\n';
    } else if (ev->parsed()) {
      if (!ev_calibration.empty()) ev_opts.calibration = Calibration::load(ev_calibration);
      const auto models = load_models(ev_checkpoints);
      std::vector<PredictionRow> rows;
      const auto paths = record_paths(ev_data);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        rows.push_back(evaluate_grasp(read_grasp_record(paths[i]), i, pointers(models), ev_opts));
      }
      const EvaluationReport rep = build_report(std::move(rows));
      const std::string text = rep.to_json().dump(2) + "\n";
      if (!ev_json.empty()) {
        io::write_text(ev_json, text);
      } else {
        std::cout << text;
      }
      if (!ev_csv.empty()) io::write_text(ev_csv, rep.to_csv());
      if (!ev_json.empty()) {
        for (const auto& m : kReportMethods) {
          const auto& s = rep.overall.methods.at(m);
          if (s.available > 0) {
            std::printf("%-8s accuracy %.3f  mean log10 error %.3f  (%zu grasps)\n", m.c_str(), s.accuracy,
                        s.mean_log10_error, s.available);
          }
        }
      }
    } else if (cv->parsed()) {
      double pa = 0.0;
      shore::Conversion first{};
      if (cv_from == "pa") {
        pa = cv_value;
      } else if (cv_from == "shore-a") {
        first = shore::shore_a_to_modulus(cv_value);
        pa = first.value;
      } else {
        first = shore::shore00_to_modulus(cv_value);
        pa = first.value;
      }
      shore::Conversion result{pa, first.clamped, first.near_singularity};
      if (cv_to == "shore-a") {
        const auto c = shore::modulus_to_shore_a(pa);
        result = {c.value, c.clamped || first.clamped, c.near_singularity || first.near_singularity};
      } else if (cv_to == "shore-00") {
        const auto c = shore::modulus_to_shore00(pa);
        result = {c.value, c.clamped || first.clamped, first.near_singularity};
      }
      std::printf("%.10g %s\nflags:%s\n", result.value, cv_to.c_str(), flags_text(result).c_str());
    } else if (in->parsed()) {
      const IngestResult r = ingest_external_dataset(in_dir);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      if (!in_out.empty()) {
        fs::create_directories(in_out);
        for (std::size_t i = 0; i < r.grasps.size(); ++i) {
          write_grasp_record(r.grasps[i], fs::path(in_out) / grasp_id(r.grasps[i], i));
        }
      }
      std::printf("parsed %zu of %zu grasps (%.1f%%), %zu skipped\n", r.grasps.size(), r.attempted,
                  100.0 * r.parse_rate(), r.skipped);
    } else if (ex->parsed()) {
      const auto grasps = load_records(ex_data);
      export_external_dataset(grasps, ex_out);
      std::printf("exported %zu grasps to %s\n", grasps.size(), ex_out.c_str());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
