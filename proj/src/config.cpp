#include "skate/config.hpp"

#include <fstream>
#include <functional>
#include <stdexcept>

namespace skate {
namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& section, const std::string& key) {
  throw std::invalid_argument("config section '" + section +
                              "': unknown key '" + key + "'");
}

// Walks one section object, dispatching each key to a setter; wraps type
// errors with the offending section and key.
void walk(const json& j, const std::string& section,
          const std::function<bool(const std::string&, const json&)>& set) {
  if (!j.is_object()) {
    throw std::invalid_argument("config section '" + section +
                                "' must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    try {
      if (!set(key, value)) bad_key(section, key);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config section '" + section + "', key '" +
                                  key + "': " + e.what());
    }
  }
}

void parse_sim(const json& j, SimParams& sim) {
  walk(j, "sim", [&](const std::string& key, const json& v) {
    if (key == "mass") sim.mass = v.get<double>();
    else if (key == "inertia_z") sim.inertia_z = v.get<double>();
    else if (key == "hip_half_length") sim.hip_half_length = v.get<double>();
    else if (key == "hip_half_width") sim.hip_half_width = v.get<double>();
    else if (key == "mu_lat") sim.mu_lat = v.get<double>();
    else if (key == "mu_roll") sim.mu_roll = v.get<double>();
    else if (key == "slip_vel_eps") sim.slip_vel_eps = v.get<double>();
    else if (key == "leg_radius") sim.leg_radius = v.get<double>();
    else if (key == "leg_speed_max") sim.leg_speed_max = v.get<double>();
    else if (key == "stance_floor") sim.stance_floor = v.get<double>();
    else if (key == "torque_lever") sim.torque_lever = v.get<double>();
    else if (key == "leg_effort_coeff") sim.leg_effort_coeff = v.get<double>();
    else if (key == "gravity") sim.gravity = v.get<double>();
    else if (key == "dt") sim.dt = v.get<double>();
    else if (key == "substeps") sim.substeps = v.get<int>();
    else return false;
    return true;
  });
}

void parse_reset(const json& j, ResetConfig& reset) {
  walk(j, "task.reset", [&](const std::string& key, const json& v) {
    if (key == "heading_range") reset.heading_range = v.get<double>();
    else if (key == "lin_vel_range") reset.lin_vel_range = v.get<double>();
    else if (key == "yaw_rate_range") reset.yaw_rate_range = v.get<double>();
    else if (key == "leg_offset_range") reset.leg_offset_range = v.get<double>();
    else return false;
    return true;
  });
}

void parse_task(const json& j, TaskConfig& task) {
  walk(j, "task", [&](const std::string& key, const json& v) {
    if (key == "frame") task.frame = frame_mode_from_string(v.get<std::string>());
    else if (key == "dir_min") task.dir_min = v.get<double>();
    else if (key == "dir_max") task.dir_max = v.get<double>();
    else if (key == "speed_min") task.speed_min = v.get<double>();
    else if (key == "speed_max") task.speed_max = v.get<double>();
    else if (key == "yaw_min") task.yaw_min = v.get<double>();
    else if (key == "yaw_max") task.yaw_max = v.get<double>();
    else if (key == "resample_period") task.resample_period = v.get<int>();
    else if (key == "episode_steps") task.episode_steps = v.get<int>();
    else if (key == "divergence_speed") task.divergence_speed = v.get<double>();
    else if (key == "divergence_reward") task.divergence_reward = v.get<double>();
    else if (key == "reset") parse_reset(v, task.reset);
    else return false;
    return true;
  });
}

void parse_rewards(const json& j, RewardWeights& rw) {
  walk(j, "rewards", [&](const std::string& key, const json& v) {
    if (key == "sigma") rw.sigma = v.get<double>();
    else if (key == "e0") rw.e0 = v.get<double>();
    else if (key == "e1") rw.e1 = v.get<double>();
    else if (key == "w_lin_track") rw.w_lin_track = v.get<double>();
    else if (key == "w_yaw_track") rw.w_yaw_track = v.get<double>();
    else if (key == "w_action_rate") rw.w_action_rate = v.get<double>();
    else if (key == "w_effort") rw.w_effort = v.get<double>();
    else if (key == "w_leg_extension") rw.w_leg_extension = v.get<double>();
    else if (key == "w_workspace") rw.w_workspace = v.get<double>();
    else return false;
    return true;
  });
}

void parse_metric(const json& j, MetricConfig& m) {
  walk(j, "metric", [&](const std::string& key, const json& v) {
    if (key == "v_floor") m.v_floor = v.get<double>();
    else if (key == "lambda_fail") m.lambda_fail = v.get<double>();
    else if (key == "window_steps") m.window_steps = v.get<int>();
    else return false;
    return true;
  });
}

void parse_ppo(const json& j, PpoConfig& p) {
  walk(j, "ppo", [&](const std::string& key, const json& v) {
    if (key == "gamma") p.gamma = v.get<double>();
    else if (key == "gae_lambda") p.gae_lambda = v.get<double>();
    else if (key == "clip_ratio") p.clip_ratio = v.get<double>();
    else if (key == "learning_rate") p.learning_rate = v.get<double>();
    else if (key == "horizon") p.horizon = v.get<int>();
    else if (key == "n_env") p.n_env = v.get<int>();
    else if (key == "epochs") p.epochs = v.get<int>();
    else if (key == "minibatches") p.minibatches = v.get<int>();
    else if (key == "entropy_coef") p.entropy_coef = v.get<double>();
    else if (key == "value_coef") p.value_coef = v.get<double>();
    else if (key == "max_grad_norm") p.max_grad_norm = v.get<double>();
    else if (key == "total_steps") p.total_steps = v.get<long long>();
    else if (key == "divergence_fail_fraction")
      p.divergence_fail_fraction = v.get<double>();
    else if (key == "sentinel_j") p.sentinel_j = v.get<double>();
    else return false;
    return true;
  });
}

void parse_fit(const json& j, GpFitOptions& f) {
  walk(j, "bo.fit", [&](const std::string& key, const json& v) {
    if (key == "n_starts") f.n_starts = v.get<int>();
    else if (key == "iterations") f.iterations = v.get<int>();
    else if (key == "learning_rate") f.learning_rate = v.get<double>();
    else if (key == "noise_floor") f.noise_floor = v.get<double>();
    else return false;
    return true;
  });
}

void parse_bo(const json& j, BoConfig& b) {
  walk(j, "bo", [&](const std::string& key, const json& v) {
    if (key == "mode") b.mode = coupling_mode_from_string(v.get<std::string>());
    else if (key == "budget") b.budget = v.get<int>();
    else if (key == "beta_start") b.beta_start = v.get<double>();
    else if (key == "beta_end") b.beta_end = v.get<double>();
    else if (key == "phase1_frac") b.phase1_frac = v.get<double>();
    else if (key == "phase2_frac") b.phase2_frac = v.get<double>();
    else if (key == "fit") parse_fit(v, b.fit);
    else return false;
    return true;
  });
}

}  // namespace

TrainSetup ExperimentConfig::train_setup() const {
  return TrainSetup{sim, task, rewards, metric, ppo};
}

void ExperimentConfig::validate() const {
  sim.validate();
  task.validate();
  rewards.validate();
  ppo.validate();
  bo.validate();
  if (metric.window_steps <= 0) {
    throw std::invalid_argument(
        "config section 'metric': window_steps must be positive");
  }
  if (metric.v_floor <= 0.0) {
    throw std::invalid_argument(
        "config section 'metric': v_floor must be positive");
  }
  if (metric.lambda_fail < 0.0) {
    throw std::invalid_argument(
        "config section 'metric': lambda_fail must be non-negative");
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  walk(j, "(top level)", [&](const std::string& key, const json& v) {
    if (key == "sim") parse_sim(v, c.sim);
    else if (key == "task") parse_task(v, c.task);
    else if (key == "rewards") parse_rewards(v, c.rewards);
    else if (key == "metric") parse_metric(v, c.metric);
    else if (key == "ppo") parse_ppo(v, c.ppo);
    else if (key == "bo") parse_bo(v, c.bo);
    else if (key == "out_dir") c.out_dir = v.get<std::string>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else return false;
    return true;
  });
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["sim"] = {{"mass", c.sim.mass},
              {"inertia_z", c.sim.inertia_z},
              {"hip_half_length", c.sim.hip_half_length},
              {"hip_half_width", c.sim.hip_half_width},
              {"mu_lat", c.sim.mu_lat},
              {"mu_roll", c.sim.mu_roll},
              {"slip_vel_eps", c.sim.slip_vel_eps},
              {"leg_radius", c.sim.leg_radius},
              {"leg_speed_max", c.sim.leg_speed_max},
              {"stance_floor", c.sim.stance_floor},
              {"torque_lever", c.sim.torque_lever},
              {"leg_effort_coeff", c.sim.leg_effort_coeff},
              {"gravity", c.sim.gravity},
              {"dt", c.sim.dt},
              {"substeps", c.sim.substeps}};
  j["task"] = {{"frame", to_string(c.task.frame)},
               {"dir_min", c.task.dir_min},
               {"dir_max", c.task.dir_max},
               {"speed_min", c.task.speed_min},
               {"speed_max", c.task.speed_max},
               {"yaw_min", c.task.yaw_min},
               {"yaw_max", c.task.yaw_max},
               {"resample_period", c.task.resample_period},
               {"episode_steps", c.task.episode_steps},
               {"divergence_speed", c.task.divergence_speed},
               {"divergence_reward", c.task.divergence_reward},
               {"reset",
                {{"heading_range", c.task.reset.heading_range},
                 {"lin_vel_range", c.task.reset.lin_vel_range},
                 {"yaw_rate_range", c.task.reset.yaw_rate_range},
                 {"leg_offset_range", c.task.reset.leg_offset_range}}}};
  j["rewards"] = {{"sigma", c.rewards.sigma},
                  {"e0", c.rewards.e0},
                  {"e1", c.rewards.e1},
                  {"w_lin_track", c.rewards.w_lin_track},
                  {"w_yaw_track", c.rewards.w_yaw_track},
                  {"w_action_rate", c.rewards.w_action_rate},
                  {"w_effort", c.rewards.w_effort},
                  {"w_leg_extension", c.rewards.w_leg_extension},
                  {"w_workspace", c.rewards.w_workspace}};
  j["metric"] = {{"v_floor", c.metric.v_floor},
                 {"lambda_fail", c.metric.lambda_fail},
                 {"window_steps", c.metric.window_steps}};
  j["ppo"] = {{"gamma", c.ppo.gamma},
              {"gae_lambda", c.ppo.gae_lambda},
              {"clip_ratio", c.ppo.clip_ratio},
              {"learning_rate", c.ppo.learning_rate},
              {"horizon", c.ppo.horizon},
              {"n_env", c.ppo.n_env},
              {"epochs", c.ppo.epochs},
              {"minibatches", c.ppo.minibatches},
              {"entropy_coef", c.ppo.entropy_coef},
              {"value_coef", c.ppo.value_coef},
              {"max_grad_norm", c.ppo.max_grad_norm},
              {"total_steps", c.ppo.total_steps},
              {"divergence_fail_fraction", c.ppo.divergence_fail_fraction},
              {"sentinel_j", c.ppo.sentinel_j}};
  j["bo"] = {{"mode", to_string(c.bo.mode)},
             {"budget", c.bo.budget},
             {"beta_start", c.bo.beta_start},
             {"beta_end", c.bo.beta_end},
             {"phase1_frac", c.bo.phase1_frac},
             {"phase2_frac", c.bo.phase2_frac},
             {"fit",
              {{"n_starts", c.bo.fit.n_starts},
               {"iterations", c.bo.fit.iterations},
               {"learning_rate", c.bo.fit.learning_rate},
               {"noise_floor", c.bo.fit.noise_floor}}}};
  j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " +
                                e.what());
  }
  return config_from_json(j);
}

void save_config(const std::string& path, const ExperimentConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << config_to_json(config).dump(2) << "\n";
}

}  // namespace skate
