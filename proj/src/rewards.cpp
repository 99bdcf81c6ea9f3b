#include "skate/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace skate {

const char* const kObservationFingerprint =
    "obs26[vB2,w1,cmdB2,wcmd1,p8,aprev12]|act12[FR,FL,RR,RL:vx,vy,logit]|v1";

std::string to_string(FrameMode mode) {
  return mode == FrameMode::BaseFrame ? "base" : "world";
}

FrameMode frame_mode_from_string(const std::string& name) {
  if (name == "base") return FrameMode::BaseFrame;
  if (name == "world") return FrameMode::WorldFrame;
  throw std::invalid_argument("unknown frame mode '" + name +
                              "' (expected base|world)");
}

void RewardWeights::validate() const {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("RewardWeights.sigma must be positive");
  }
  if (!(e0 >= 0.0) || !(e0 < e1)) {
    throw std::invalid_argument("RewardWeights: need 0 <= e0 < e1");
  }
}

Vec2 command_observation(const Command& command, double heading) {
  if (command.frame == FrameMode::BaseFrame) return command.lin;
  const double c = std::cos(heading), s = std::sin(heading);
  // Rotation by -heading.
  return {c * command.lin.x() + s * command.lin.y(),
          -s * command.lin.x() + c * command.lin.y()};
}

double priority_factor(double v_err, double e0, double e1) {
  if (v_err <= e0) return 1.0;
  if (v_err > e1) return 0.0;
  return (e1 - v_err) / (e1 - e0);
}

double tracking_reward(double error, double sigma) {
  return std::exp(-error * error / sigma);
}

double velocity_error(const SimState& state, const Command& command) {
  const Vec2 v = command.frame == FrameMode::BaseFrame ? state.velocity_body()
                                                       : state.velocity_world();
  return (v - command.lin).norm();
}

RewardBreakdown step_reward(const StepOutcome& outcome, const Action& action,
                            const Action& prev_action, const Command& command,
                            const RewardWeights& weights, FrameMode mode) {
  if (mode != command.frame) {
    throw std::invalid_argument(
        "step_reward: reward mode does not match the command frame tag");
  }
  const SimState& state = outcome.state;

  const double v_err = velocity_error(state, command);
  const double yaw_err = state.yaw_rate - command.yaw_rate;
  const double k = mode == FrameMode::WorldFrame
                       ? priority_factor(v_err, weights.e0, weights.e1)
                       : 1.0;

  double leg_sq = 0.0;
  for (const auto& p : state.leg_offset) leg_sq += p.squaredNorm();

  RewardBreakdown r;
  r.lin_track = weights.w_lin_track * tracking_reward(v_err, weights.sigma);
  r.yaw_track =
      weights.w_yaw_track * k * tracking_reward(yaw_err, weights.sigma);
  r.action_rate = weights.w_action_rate * (action - prev_action).squaredNorm();
  r.effort = weights.w_effort * outcome.tau_sq;
  r.leg_extension = weights.w_leg_extension * leg_sq;
  r.workspace = weights.w_workspace * outcome.workspace_violation_sq;
  r.total = r.lin_track + r.yaw_track + r.action_rate + r.effort +
            r.leg_extension + r.workspace;
  return r;
}

Eigen::Matrix<double, kObsDim, 1> build_observation(const SimState& state,
                                                    const Command& command) {
  Eigen::Matrix<double, kObsDim, 1> obs;
  obs.segment<2>(0) = state.velocity_body();
  obs[2] = state.yaw_rate;
  obs.segment<2>(3) = command_observation(command, state.heading);
  obs[5] = command.yaw_rate;
  for (int i = 0; i < kNumLegs; ++i) {
    obs.segment<2>(6 + 2 * i) = state.leg_offset[static_cast<size_t>(i)];
  }
  obs.segment<kActionDim>(14) = state.prev_action;
  return obs;
}

double instantaneous_cot(double tau_sq, const SimState& state, FrameMode mode,
                         const SimParams& params, double v_floor) {
  const Vec2 v = mode == FrameMode::BaseFrame ? state.velocity_body()
                                              : state.velocity_world();
  const double twist_norm = std::sqrt(v.squaredNorm() +
                                      state.yaw_rate * state.yaw_rate);
  return tau_sq / (params.weight() * std::max(twist_norm, v_floor));
}

MetricBuffer::MetricBuffer(int n_env, int n_step)
    : n_env_(n_env),
      n_step_(n_step),
      filled_(0),
      cot_(Eigen::MatrixXd::Zero(n_env, n_step)),
      fail_(Eigen::MatrixXd::Zero(n_env, n_step)) {
  if (n_env < 1 || n_step < 1) {
    throw std::invalid_argument("MetricBuffer needs n_env, n_step >= 1");
  }
}

void MetricBuffer::append_step(const Eigen::VectorXd& cot,
                               const Eigen::VectorXd& fail) {
  if (cot.size() != n_env_ || fail.size() != n_env_) {
    throw std::invalid_argument("MetricBuffer column size mismatch");
  }
  if (filled_ >= n_step_) {
    throw std::runtime_error("MetricBuffer already full");
  }
  cot_.col(filled_) = cot;
  fail_.col(filled_) = fail;
  ++filled_;
}

double estimate_design_metric(const MetricBuffer& buffer, double lambda_fail) {
  if (!buffer.complete()) {
    throw std::runtime_error("estimate_design_metric: incomplete buffer");
  }
  double cot_sum = 0.0;
  double fail_sum = 0.0;
  for (int env = 0; env < buffer.n_env(); ++env) {
    for (int step = 0; step < buffer.filled_steps(); ++step) {
      cot_sum += buffer.cot()(env, step);
      fail_sum += buffer.fail()(env, step);
    }
  }
  const double cells =
      static_cast<double>(buffer.n_env()) * buffer.filled_steps();
  return cot_sum / cells + lambda_fail * (fail_sum / cells);
}

}  // namespace skate
