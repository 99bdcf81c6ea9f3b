#include "skate/env.hpp"

#include <cmath>
#include <stdexcept>

namespace skate {

void TaskConfig::validate() const {
  if (dir_max < dir_min) throw std::invalid_argument("task: dir_max < dir_min");
  if (speed_min < 0.0 || speed_max < speed_min) {
    throw std::invalid_argument("task: bad speed range");
  }
  if (yaw_max < yaw_min) throw std::invalid_argument("task: yaw_max < yaw_min");
  if (resample_period <= 0) {
    throw std::invalid_argument("task: resample_period must be positive");
  }
  if (episode_steps <= 0) {
    throw std::invalid_argument("task: episode_steps must be positive");
  }
  if (divergence_speed <= 0.0) {
    throw std::invalid_argument("task: divergence_speed must be positive");
  }
}

Command sample_command(Rng& rng, const TaskConfig& task) {
  Command cmd;
  const double dir = rng.uniform(task.dir_min, task.dir_max);
  const double speed = rng.uniform(task.speed_min, task.speed_max);
  cmd.lin = Vec2{speed * std::cos(dir), speed * std::sin(dir)};
  cmd.yaw_rate = rng.uniform(task.yaw_min, task.yaw_max);
  cmd.frame = task.frame;
  return cmd;
}

VecEnv::VecEnv(const DesignVector& design, const SimParams& sim,
               const TaskConfig& task, const RewardWeights& rewards,
               const MetricConfig& metric, int n_env, std::uint64_t seed)
    : design_(design),
      sim_(sim),
      task_(task),
      rewards_(rewards),
      metric_(metric),
      n_env_(n_env) {
  if (n_env <= 0) throw std::invalid_argument("VecEnv: n_env must be positive");
  sim_.validate();
  task_.validate();
  rewards_.validate();
  obs_.resize(kObsDim, n_env_);
  states_.resize(static_cast<std::size_t>(n_env_));
  commands_.resize(static_cast<std::size_t>(n_env_));
  step_in_episode_.assign(static_cast<std::size_t>(n_env_), 0);
  episode_len_.assign(static_cast<std::size_t>(n_env_), task_.episode_steps);
  rngs_.reserve(static_cast<std::size_t>(n_env_));
  for (int i = 0; i < n_env_; ++i) {
    rngs_.emplace_back(Rng::derive(seed, static_cast<std::uint64_t>(i)));
  }
  for (int i = 0; i < n_env_; ++i) reset_env(i, true);
}

void VecEnv::reset_env(int i, bool stagger) {
  const auto k = static_cast<std::size_t>(i);
  Rng& rng = rngs_[k];
  states_[k] = reset_state(rng.next_u64(), task_.reset, sim_);
  commands_[k] = sample_command(rng, task_);
  step_in_episode_[k] = 0;
  episode_len_[k] = task_.episode_steps;
  if (stagger) {
    const int offset =
        static_cast<int>(rng.uniform01() * static_cast<double>(task_.episode_steps));
    episode_len_[k] = std::max(1, task_.episode_steps - offset);
  }
  obs_.col(i) = build_observation(states_[k], commands_[k]);
}

VecEnv::StepResult VecEnv::step(const Eigen::MatrixXd& actions) {
  if (actions.rows() != kActionDim || actions.cols() != n_env_) {
    throw std::invalid_argument("VecEnv::step: action batch shape mismatch");
  }
  StepResult res;
  res.reward.resize(n_env_);
  res.done.setZero(n_env_);
  res.cot.setZero(n_env_);
  res.fail.setZero(n_env_);
  RewardBreakdown sums;
  int n_ok = 0;

  for (int i = 0; i < n_env_; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Action a = actions.col(i);
    const Action prev = states_[k].prev_action;
    const StepOutcome out = skate::step(states_[k], a, design_, sim_);
    const bool diverged = !out.state.finite() ||
                          out.state.velocity_world().norm() > task_.divergence_speed;
    if (diverged) {
      res.reward[i] = task_.divergence_reward;
      res.fail[i] = 1.0;
      res.done[i] = 1.0;
      ++divergences_;
      reset_env(i, false);
    } else {
      states_[k] = out.state;
      const RewardBreakdown rb =
          step_reward(out, a, prev, commands_[k], rewards_, task_.frame);
      res.reward[i] = rb.total;
      res.cot[i] =
          instantaneous_cot(out.tau_sq, out.state, task_.frame, sim_, metric_.v_floor);
      res.fail[i] =
          velocity_error(out.state, commands_[k]) > rewards_.e1 ? 1.0 : 0.0;
      sums.lin_track += rb.lin_track;
      sums.yaw_track += rb.yaw_track;
      sums.action_rate += rb.action_rate;
      sums.effort += rb.effort;
      sums.leg_extension += rb.leg_extension;
      sums.workspace += rb.workspace;
      sums.total += rb.total;
      ++n_ok;

      ++step_in_episode_[k];
      if (step_in_episode_[k] >= episode_len_[k]) {
        res.done[i] = 1.0;
        reset_env(i, false);
      } else {
        if (step_in_episode_[k] % task_.resample_period == 0) {
          commands_[k] = sample_command(rngs_[k], task_);
        }
        obs_.col(i) = build_observation(states_[k], commands_[k]);
      }
    }
    ++cells_;
  }

  if (n_ok > 0) {
    const double inv = 1.0 / static_cast<double>(n_ok);
    res.mean_terms.lin_track = sums.lin_track * inv;
    res.mean_terms.yaw_track = sums.yaw_track * inv;
    res.mean_terms.action_rate = sums.action_rate * inv;
    res.mean_terms.effort = sums.effort * inv;
    res.mean_terms.leg_extension = sums.leg_extension * inv;
    res.mean_terms.workspace = sums.workspace * inv;
    res.mean_terms.total = sums.total * inv;
  }
  return res;
}

}  // namespace skate
