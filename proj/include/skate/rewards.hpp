#pragma once

#include <vector>

#include <Eigen/Core>

#include "skate/sim.hpp"

namespace skate {

inline constexpr int kObsDim = 26;

// Whether velocity commands (and the tracking rewards built on them) live in
// the robot's base frame or the world frame.
enum class FrameMode { BaseFrame, WorldFrame };

std::string to_string(FrameMode mode);
FrameMode frame_mode_from_string(const std::string& name);

struct Command {
  Vec2 lin = Vec2::Zero();   // m/s, in `frame`
  double yaw_rate = 0.0;     // rad/s, always base frame
  FrameMode frame = FrameMode::BaseFrame;
};

struct RewardWeights {
  double sigma = 0.25;  // tracking width of exp(-e^2 / sigma)
  double e0 = 0.3;      // m/s, error below which yaw tracking is unscaled
  double e1 = 1.0;      // m/s, error above which yaw tracking is off
  double w_lin_track = 1.0;
  double w_yaw_track = 0.5;
  double w_action_rate = -0.01;
  double w_effort = -2.0e-4;
  double w_leg_extension = -0.5;
  double w_workspace = -10.0;

  void validate() const;
};

// Commanded linear velocity as the policy observes it: base-frame commands
// pass through, world-frame commands are rotated into the base frame.
Vec2 command_observation(const Command& command, double heading);

// Priority multiplier for yaw-rate tracking under world-frame commands:
// 1 below e0, linear ramp to 0 on (e0, e1], 0 beyond e1.
double priority_factor(double v_err, double e0, double e1);

// exp(-e^2 / sigma)
double tracking_reward(double error, double sigma);

struct RewardBreakdown {
  double lin_track = 0.0;
  double yaw_track = 0.0;
  double action_rate = 0.0;
  double effort = 0.0;
  double leg_extension = 0.0;
  double workspace = 0.0;
  double total = 0.0;
};

// Weighted reward terms for one control step; `mode` must match the command's
// frame tag (throws std::invalid_argument otherwise). Velocities are read
// from outcome.state.
RewardBreakdown step_reward(const StepOutcome& outcome, const Action& action,
                            const Action& prev_action, const Command& command,
                            const RewardWeights& weights, FrameMode mode);

// Linear-velocity tracking error in the command's frame.
double velocity_error(const SimState& state, const Command& command);

// Observation layout (26): body velocity (2), yaw rate (1), commanded
// velocity in base frame (2), yaw-rate command (1), leg offsets (8),
// previous action (12).
Eigen::Matrix<double, kObsDim, 1> build_observation(const SimState& state,
                                                    const Command& command);
extern const char* const kObservationFingerprint;

// Instantaneous cost of transport: tau_sq / (m g max(|twist|, v_floor)).
// The twist is (v_x, v_y, yaw rate) with the linear part in the base frame
// for BaseFrame mode and the world frame for WorldFrame mode.
double instantaneous_cot(double tau_sq, const SimState& state, FrameMode mode,
                         const SimParams& params, double v_floor);

struct MetricConfig {
  double v_floor = 0.1;      // m/s twist floor in the CoT
  double lambda_fail = 10.0; // weight of the tracking-failure fraction
  int window_steps = 1000;   // metric aggregation window
};

// Rectangular per-cell metric buffer, one column per control step across all
// environments. Cells hold the instantaneous CoT and a tracking-failure flag.
class MetricBuffer {
 public:
  MetricBuffer(int n_env, int n_step);

  void append_step(const Eigen::VectorXd& cot, const Eigen::VectorXd& fail);
  bool complete() const { return filled_ == n_step_; }
  int n_env() const { return n_env_; }
  int filled_steps() const { return filled_; }

  const Eigen::MatrixXd& cot() const { return cot_; }
  const Eigen::MatrixXd& fail() const { return fail_; }

 private:
  int n_env_;
  int n_step_;
  int filled_;
  Eigen::MatrixXd cot_;   // n_env x n_step
  Eigen::MatrixXd fail_;  // n_env x n_step, 0/1
};

// Monte Carlo design metric: mean CoT over all cells plus
// lambda_fail * (failing-cell fraction). Reduction order is env-major for bit
// determinism. Throws std::runtime_error on an incomplete buffer.
double estimate_design_metric(const MetricBuffer& buffer, double lambda_fail);

}  // namespace skate
