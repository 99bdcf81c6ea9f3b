#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "skate/design_space.hpp"
#include "skate/rewards.hpp"
#include "skate/rng.hpp"
#include "skate/sim.hpp"

namespace skate {

// Command distribution and episode plumbing for training environments.
// Commands are drawn as (direction, speed, yaw rate) from uniform ranges and
// resampled every resample_period steps within an episode.
struct TaskConfig {
  FrameMode frame = FrameMode::BaseFrame;
  double dir_min = 0.0;
  double dir_max = 6.283185307179586;
  double speed_min = 0.0;
  double speed_max = 2.0;
  double yaw_min = -1.0;
  double yaw_max = 1.0;
  int resample_period = 200;
  int episode_steps = 1000;
  double divergence_speed = 10.0;  // m/s, sustained beyond this aborts the env
  double divergence_reward = -10.0;
  ResetConfig reset;

  void validate() const;
};

Command sample_command(Rng& rng, const TaskConfig& task);

// Fixed-size batch of independent simulator instances sharing one design.
// Episodes reset asynchronously: each environment starts at a random phase of
// the episode clock so terminations stagger. All randomness derives from the
// constructor seed; stepping order is fixed by environment index.
class VecEnv {
 public:
  struct StepResult {
    Eigen::VectorXd reward;
    Eigen::VectorXd done;  // 1.0 where the episode ended (timeout or failure)
    Eigen::VectorXd cot;
    Eigen::VectorXd fail;  // 1.0 where tracking failed (v_err > e1) or diverged
    RewardBreakdown mean_terms;
  };

  VecEnv(const DesignVector& design, const SimParams& sim,
         const TaskConfig& task, const RewardWeights& rewards,
         const MetricConfig& metric, int n_env, std::uint64_t seed);

  int n_env() const { return n_env_; }
  // kObsDim x n_env, refreshed after every step.
  const Eigen::MatrixXd& observations() const { return obs_; }
  const SimState& state(int i) const { return states_[static_cast<std::size_t>(i)]; }
  const Command& command(int i) const { return commands_[static_cast<std::size_t>(i)]; }

  long long divergence_count() const { return divergences_; }
  long long total_cells() const { return cells_; }

  // actions: kActionDim x n_env, raw policy outputs.
  StepResult step(const Eigen::MatrixXd& actions);

 private:
  void reset_env(int i, bool stagger);

  DesignVector design_;
  SimParams sim_;
  TaskConfig task_;
  RewardWeights rewards_;
  MetricConfig metric_;
  int n_env_;
  Eigen::MatrixXd obs_;
  std::vector<SimState> states_;
  std::vector<Command> commands_;
  std::vector<int> step_in_episode_;
  std::vector<int> episode_len_;
  std::vector<Rng> rngs_;
  long long divergences_ = 0;
  long long cells_ = 0;
};

}  // namespace skate
