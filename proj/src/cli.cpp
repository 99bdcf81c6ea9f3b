#include "skate/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skate/config.hpp"
#include "skate/scenarios.hpp"
#include "skate/trajectory.hpp"

namespace skate {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kRadToDeg = 57.29577951308232;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string design;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config (JSON)");
  cmd->add_option("--out", args.out_dir, "Output directory override");
  cmd->add_option("--seed", args.seed, "Master seed override")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  cfg.validate();
  return cfg;
}

// Comma-separated wheel angles in degrees; the count selects the coupling
// mode (1 -> coupled1d, 2 -> symmetric2d, 4 -> full4d).
std::pair<CouplingMode, Eigen::VectorXd> parse_design_degrees(
    const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      values.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("--design: cannot parse angle '" + cell + "'");
    }
  }
  CouplingMode mode;
  switch (values.size()) {
    case 1: mode = CouplingMode::Coupled1D; break;
    case 2: mode = CouplingMode::Symmetric2D; break;
    case 4: mode = CouplingMode::Full4D; break;
    default:
      throw std::invalid_argument(
          "--design: expected 1, 2, or 4 comma-separated degrees, got " +
          std::to_string(values.size()));
  }
  Eigen::VectorXd reduced(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    reduced[static_cast<Eigen::Index>(i)] = values[i] * kDegToRad;
  }
  return {mode, reduced};
}

DesignVector design_from_arg(const std::string& text, CouplingMode* mode_out) {
  const auto [mode, reduced] = parse_design_degrees(text);
  if (mode_out) *mode_out = mode;
  return expand_design(reduced, mode);
}

json design_to_json(const DesignVector& design, CouplingMode mode) {
  json j;
  j["mode"] = to_string(mode);
  const Eigen::Vector4d deg = design.angles() * kRadToDeg;
  j["angles_deg"] = std::vector<double>(deg.data(), deg.data() + 4);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_training_log_csv(const fs::path& path, const TrainingLog& log) {
  std::string text =
      "update,mean_reward,surrogate,value_loss,kl,entropy,"
      "lin_track,yaw_track,action_rate,effort,leg_extension,workspace\n";
  char buf[512];
  for (std::size_t i = 0; i < log.updates.size(); ++i) {
    const UpdateStats& u = log.updates[i];
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g\n",
                  i, u.mean_reward, u.surrogate, u.value_loss, u.kl, u.entropy,
                  u.mean_terms.lin_track, u.mean_terms.yaw_track,
                  u.mean_terms.action_rate, u.mean_terms.effort,
                  u.mean_terms.leg_extension, u.mean_terms.workspace);
    text += buf;
  }
  write_text(path, text);
}

json scenario_to_json(const ScenarioResult& result,
                      const std::vector<std::string>& trajectory_files) {
  json j;
  j["name"] = result.name;
  j["median"] = result.median;
  j["summary"] = result.summary;
  j["flagged"] = result.flagged;
  j["seeds"] = result.seeds;
  j["trajectory_files"] = trajectory_files;
  return j;
}

std::vector<std::string> write_scenario_trajectories(
    const fs::path& dir, const std::string& stem, const ScenarioResult& res) {
  std::vector<std::string> files;
  for (std::size_t k = 0; k < res.trajectories.size(); ++k) {
    char name[128];
    std::snprintf(name, sizeof(name), "%s_trial%03zu.csv", stem.c_str(), k);
    write_trajectory_csv((dir / name).string(), res.trajectories[k]);
    files.emplace_back(name);
  }
  return files;
}

int cmd_train(const CommonArgs& args) {
  ExperimentConfig cfg = resolve_config(args);
  CouplingMode mode = cfg.bo.mode;
  DesignVector design;
  if (!args.design.empty()) {
    design = design_from_arg(args.design, &mode);
  } else {
    design = expand_design(Eigen::VectorXd::Constant(1, 30.0 * kDegToRad),
                           CouplingMode::Coupled1D);
    mode = CouplingMode::Coupled1D;
  }

  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  save_config((out / "config.json").string(), cfg);
  write_text(out / "design.json", design_to_json(design, mode).dump(2) + "\n");

  const TrainResult result = train_policy(design, cfg.train_setup(), cfg.seed);
  save_checkpoint((out / "policy.ckpt").string(), result.params,
                  kObservationFingerprint);
  write_training_log_csv(out / "training_log.csv", result.log);

  json summary;
  summary["J"] = result.j;
  summary["failed"] = result.failed;
  summary["env_steps"] = result.log.env_steps;
  summary["divergences"] = result.log.divergences;
  summary["window_j"] = result.log.window_j;
  write_text(out / "train_summary.json", summary.dump(2) + "\n");

  std::cout << "train: J=" << result.j << (result.failed ? " (failed)" : "")
            << " checkpoint=" << (out / "policy.ckpt").string() << "\n";
  return result.failed ? 2 : 0;
}

int cmd_codesign(const CommonArgs& args, bool resume) {
  ExperimentConfig cfg = resolve_config(args);
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  save_config((out / "config.json").string(), cfg);

  const TrainSetup setup = cfg.train_setup();
  const Evaluator evaluate = [&](const DesignVector& design,
                                 std::uint64_t seed, int iteration) {
    const TrainResult r = train_policy(design, setup, seed);
    char name[64];
    std::snprintf(name, sizeof(name), "ckpt_%04d.bin", iteration);
    save_checkpoint((out / name).string(), r.params, kObservationFingerprint);
    return InnerEval{r.j, r.failed, name};
  };

  const CodesignResult result =
      run_codesign(cfg.bo, cfg.seed, evaluate,
                   (out / "codesign.jsonl").string(), resume);

  const EvalRecord& best = result.best();
  json summary;
  summary["iteration"] = best.iteration;
  summary["phase"] = best.phase;
  summary["J"] = best.j;
  summary["mode"] = to_string(cfg.bo.mode);
  summary["u"] = std::vector<double>(best.u.data(), best.u.data() + best.u.size());
  const Eigen::VectorXd reduced_deg = best.reduced * kRadToDeg;
  summary["reduced_deg"] = std::vector<double>(
      reduced_deg.data(), reduced_deg.data() + reduced_deg.size());
  const Eigen::Vector4d deg = best.design.angles() * kRadToDeg;
  summary["angles_deg"] = std::vector<double>(deg.data(), deg.data() + 4);
  summary["checkpoint"] = best.checkpoint;
  write_text(out / "best.json", summary.dump(2) + "\n");

  std::cout << "codesign: best J=" << best.j << " at iteration "
            << best.iteration << " angles_deg=[" << deg.transpose() << "]\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& checkpoint,
              double speed, int n_angles) {
  ExperimentConfig cfg = resolve_config(args);
  if (args.design.empty()) {
    throw std::invalid_argument("sweep-direction requires --design");
  }
  CouplingMode mode;
  const DesignVector design = design_from_arg(args.design, &mode);
  const PolicyParams params =
      load_checkpoint(checkpoint, kObservationFingerprint);

  const std::vector<SweepRow> rows =
      directional_cot_sweep(policy_controller(params), design, cfg.sim,
                            cfg.metric, speed, n_angles, cfg.seed);

  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  const std::string table = sweep_table(rows);
  write_text(out / "sweep.txt", table);
  std::cout << table;
  return 0;
}

int cmd_scenario_hockey(const CommonArgs& args, const std::string& base_ckpt,
                        const std::string& world_ckpt, double speed,
                        int trials) {
  ExperimentConfig cfg = resolve_config(args);
  if (args.design.empty()) {
    throw std::invalid_argument("scenario hockey-stop requires --design");
  }
  const DesignVector design = design_from_arg(args.design, nullptr);
  if (base_ckpt.empty() && world_ckpt.empty()) {
    throw std::invalid_argument(
        "scenario hockey-stop requires --base-checkpoint and/or "
        "--world-checkpoint");
  }
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);

  json report;
  double base_median = std::nan(""), world_median = std::nan("");
  if (!base_ckpt.empty()) {
    const PolicyParams p = load_checkpoint(base_ckpt, kObservationFingerprint);
    const ScenarioResult res =
        scenario_hockey_stop(policy_controller(p), FrameMode::BaseFrame,
                             design, cfg.sim, speed, trials, cfg.seed);
    const auto files = write_scenario_trajectories(out, "hockey_base", res);
    report["base"] = scenario_to_json(res, files);
    base_median = res.median;
    std::cout << "hockey-stop base: median " << res.median << " s\n";
  }
  if (!world_ckpt.empty()) {
    const PolicyParams p = load_checkpoint(world_ckpt, kObservationFingerprint);
    const ScenarioResult res =
        scenario_hockey_stop(policy_controller(p), FrameMode::WorldFrame,
                             design, cfg.sim, speed, trials, cfg.seed);
    const auto files = write_scenario_trajectories(out, "hockey_world", res);
    report["world"] = scenario_to_json(res, files);
    world_median = res.median;
    std::cout << "hockey-stop world: median " << res.median << " s\n";
  }
  if (!base_ckpt.empty() && !world_ckpt.empty() && base_median > 0.0) {
    report["ratio_world_over_base"] = world_median / base_median;
    std::cout << "hockey-stop ratio world/base: " << world_median / base_median
              << "\n";
  }
  write_text(out / "scenario_hockey_stop.json", report.dump(2) + "\n");
  return 0;
}

int cmd_scenario_align(const CommonArgs& args, const std::string& checkpoint,
                       int trials) {
  ExperimentConfig cfg = resolve_config(args);
  if (args.design.empty()) {
    throw std::invalid_argument("scenario self-align requires --design");
  }
  const DesignVector design = design_from_arg(args.design, nullptr);
  if (checkpoint.empty()) {
    throw std::invalid_argument("scenario self-align requires --checkpoint");
  }
  const PolicyParams p = load_checkpoint(checkpoint, kObservationFingerprint);
  const ScenarioResult res = scenario_self_align(
      policy_controller(p), design, cfg.sim, trials, cfg.seed);

  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  const auto files = write_scenario_trajectories(out, "self_align", res);
  write_text(out / "scenario_self_align.json",
             scenario_to_json(res, files).dump(2) + "\n");
  std::cout << "self-align: median angle " << res.median << " rad\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  if (!fs::exists(dir)) {
    throw std::runtime_error("report: missing run directory '" + dir + "'");
  }
  const fs::path run(dir);
  std::string summary;
  char buf[256];

  const fs::path log_path = run / "codesign.jsonl";
  std::string convergence = "iteration,phase,J,best_so_far\n";
  int evals = 0;
  if (fs::exists(log_path)) {
    std::ifstream in(log_path);
    std::string line;
    double best = std::numeric_limits<double>::infinity();
    int best_it = -1;
    std::string best_phase;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const std::exception& e) {
        throw std::runtime_error("report: corrupt codesign log at line " +
                                 std::to_string(line_no) + ": " + e.what());
      }
      const int it = j.at("iteration").get<int>();
      const double jv = j.at("J").get<double>();
      const std::string phase = j.at("phase").get<std::string>();
      if (jv < best) {
        best = jv;
        best_it = it;
        best_phase = phase;
      }
      std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g\n", it, phase.c_str(),
                    jv, best);
      convergence += buf;
      ++evals;
    }
    std::snprintf(buf, sizeof(buf), "evaluations %d\n", evals);
    summary += buf;
    if (best_it >= 0) {
      std::snprintf(buf, sizeof(buf), "best J %.10g at iteration %d (%s)\n",
                    best, best_it, best_phase.c_str());
      summary += buf;
    }
  } else {
    summary += "no codesign log\n";
  }

  for (const char* scenario :
       {"scenario_hockey_stop.json", "scenario_self_align.json"}) {
    const fs::path p = run / scenario;
    if (!fs::exists(p)) continue;
    std::ifstream in(p);
    json j;
    in >> j;
    if (j.contains("base")) {
      std::snprintf(buf, sizeof(buf), "hockey-stop base median %.10g s\n",
                    j["base"]["median"].is_null()
                        ? std::nan("")
                        : j["base"]["median"].get<double>());
      summary += buf;
    }
    if (j.contains("world")) {
      std::snprintf(buf, sizeof(buf), "hockey-stop world median %.10g s\n",
                    j["world"]["median"].is_null()
                        ? std::nan("")
                        : j["world"]["median"].get<double>());
      summary += buf;
    }
    if (j.contains("ratio_world_over_base")) {
      std::snprintf(buf, sizeof(buf), "hockey-stop ratio world/base %.10g\n",
                    j["ratio_world_over_base"].get<double>());
      summary += buf;
    }
    if (j.contains("name") && j["name"] == "self-align") {
      std::snprintf(buf, sizeof(buf), "self-align median angle %.10g rad\n",
                    j["median"].is_null() ? std::nan("")
                                          : j["median"].get<double>());
      summary += buf;
    }
  }

  const fs::path report_dir = run / "report";
  fs::create_directories(report_dir);
  write_text(report_dir / "convergence.csv", convergence);
  write_text(report_dir / "summary.txt", summary);
  std::cout << summary;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Co-design of passive-wheel yaw angles and a skating policy"};
  app.require_subcommand(1);

  CommonArgs train_args, codesign_args, sweep_args, scen_args;
  bool resume = false;
  std::string sweep_checkpoint;
  double sweep_speed = 1.5;
  int sweep_angles = 24;
  std::string scen_name, scen_checkpoint, scen_base, scen_world;
  double scen_speed = 2.0;
  int scen_trials = 8;
  std::string report_dir;

  CLI::App* train = app.add_subcommand("train", "Train a policy for one design");
  add_common(train, train_args);
  train->add_option("--design", train_args.design,
                    "Wheel angles in degrees (1, 2, or 4 values)");

  CLI::App* codesign =
      app.add_subcommand("codesign", "Run the bilevel design optimization");
  add_common(codesign, codesign_args);
  codesign->add_flag("--resume", resume, "Continue an interrupted run");

  CLI::App* sweep = app.add_subcommand(
      "sweep-direction", "Directional steady-state CoT sweep");
  add_common(sweep, sweep_args);
  sweep->add_option("--design", sweep_args.design, "Wheel angles in degrees")
      ->required();
  sweep->add_option("--checkpoint", sweep_checkpoint, "Policy checkpoint")
      ->required();
  sweep->add_option("--speed", sweep_speed, "Command speed (m/s)");
  sweep->add_option("--angles", sweep_angles, "Number of directions");

  CLI::App* scen = app.add_subcommand("scenario", "Behavior evaluations");
  scen->add_option("name", scen_name, "hockey-stop or self-align")
      ->required()
      ->check(CLI::IsMember({"hockey-stop", "self-align"}));
  add_common(scen, scen_args);
  scen->add_option("--design", scen_args.design, "Wheel angles in degrees");
  scen->add_option("--checkpoint", scen_checkpoint,
                   "Policy checkpoint (self-align)");
  scen->add_option("--base-checkpoint", scen_base,
                   "BaseFrame policy checkpoint (hockey-stop)");
  scen->add_option("--world-checkpoint", scen_world,
                   "WorldFrame policy checkpoint (hockey-stop)");
  scen->add_option("--speed", scen_speed, "Initial speed (m/s, hockey-stop)");
  scen->add_option("--trials", scen_trials, "Number of trials");

  CLI::App* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("dir", report_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(train)) return cmd_train(train_args);
    if (app.got_subcommand(codesign)) return cmd_codesign(codesign_args, resume);
    if (app.got_subcommand(sweep)) {
      return cmd_sweep(sweep_args, sweep_checkpoint, sweep_speed, sweep_angles);
    }
    if (app.got_subcommand(scen)) {
      if (scen_name == "hockey-stop") {
        return cmd_scenario_hockey(scen_args, scen_base, scen_world, scen_speed,
                                   scen_trials);
      }
      return cmd_scenario_align(scen_args, scen_checkpoint, scen_trials);
    }
    if (app.got_subcommand(report)) return cmd_report(report_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace skate
