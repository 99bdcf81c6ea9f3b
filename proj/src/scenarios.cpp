#include "skate/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "skate/rng.hpp"

namespace skate {
namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kRadToDeg = 57.29577951308232;

double wrap_pi(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

double median_of(const std::vector<double>& values,
                 const std::vector<bool>& flagged) {
  std::vector<double> kept;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!flagged[i]) kept.push_back(values[i]);
  }
  if (kept.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(kept.begin(), kept.end());
  const std::size_t n = kept.size();
  return (n % 2 == 1) ? kept[n / 2]
                      : 0.5 * (kept[n / 2 - 1] + kept[n / 2]);
}

}  // namespace

Controller policy_controller(PolicyParams params) {
  return [params = std::move(params)](const SimState& state,
                                      const Command& command) -> Action {
    const Eigen::Matrix<double, kObsDim, 1> obs =
        build_observation(state, command);
    return params.policy.forward(obs);
  };
}

Rollout rollout(SimState state, const Controller& controller,
                const Command& command, const DesignVector& design,
                const SimParams& sim, int steps, double divergence_speed) {
  Rollout out;
  out.rows.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  double t = 0.0;
  for (int k = 0; k < steps; ++k) {
    const Action action = controller(state, command);
    const StepOutcome outcome = step(state, action, design, sim);
    t += sim.dt;
    if (!outcome.state.finite() ||
        outcome.state.velocity_world().norm() > divergence_speed) {
      out.diverged = true;
      break;
    }
    state = outcome.state;
    out.rows.push_back(trajectory_row(t, state, outcome));
  }
  out.final_state = state;
  return out;
}

std::vector<SweepRow> directional_cot_sweep(
    const Controller& controller, const DesignVector& design,
    const SimParams& sim, const MetricConfig& metric, double speed,
    int n_angles, std::uint64_t seed, const SweepOptions& options) {
  if (n_angles <= 0) {
    throw std::invalid_argument("sweep: n_angles must be positive");
  }
  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(n_angles));
  for (int k = 0; k < n_angles; ++k) {
    const double alpha =
        2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_angles);
    Command cmd;
    cmd.frame = FrameMode::BaseFrame;
    cmd.lin = Vec2{speed * std::cos(alpha), speed * std::sin(alpha)};
    cmd.yaw_rate = 0.0;

    SimState state = reset_state(
        Rng::derive(seed, static_cast<std::uint64_t>(k)),
        options.reset, sim);
    SweepRow row;
    row.alpha_deg = alpha * kRadToDeg;

    const int total = options.warmup_steps + options.measure_steps;
    double cot_sum = 0.0;
    int measured = 0;
    for (int step_idx = 0; step_idx < total; ++step_idx) {
      const Action action = controller(state, cmd);
      const StepOutcome outcome = step(state, action, design, sim);
      if (!outcome.state.finite() ||
          outcome.state.velocity_world().norm() > options.divergence_speed) {
        row.failed = true;
        break;
      }
      state = outcome.state;
      if (step_idx >= options.warmup_steps) {
        cot_sum += instantaneous_cot(outcome.tau_sq, state,
                                     FrameMode::BaseFrame, sim, metric.v_floor);
        ++measured;
      }
    }
    row.cot = measured > 0 ? cot_sum / static_cast<double>(measured) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::string out = "alpha_deg cot failed\n";
  char buf[128];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.4f %.10g %d\n", r.alpha_deg, r.cot,
                  r.failed ? 1 : 0);
    out += buf;
  }
  return out;
}

ScenarioResult scenario_hockey_stop(const Controller& controller,
                                    FrameMode mode, const DesignVector& design,
                                    const SimParams& sim, double initial_speed,
                                    int trials, std::uint64_t seed,
                                    const HockeyStopOptions& options) {
  ScenarioResult result;
  result.name = "hockey-stop";
  const int steady_hold =
      std::max(1, static_cast<int>(std::lround(options.steady_hold_s / sim.dt)));
  const int steady_timeout =
      static_cast<int>(std::lround(options.steady_timeout_s / sim.dt));
  const int stop_timeout =
      static_cast<int>(std::lround(options.stop_timeout_s / sim.dt));

  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed =
        Rng::derive(seed, static_cast<std::uint64_t>(trial));
    result.seeds.push_back(trial_seed);
    SimState state = reset_state(trial_seed, options.reset, sim);

    Command track;
    track.frame = mode;
    track.lin = Vec2{initial_speed, 0.0};
    track.yaw_rate = 0.0;

    std::vector<TrajectoryRow> rows;
    bool steady = false;
    int held = 0;
    double t = 0.0;
    for (int k = 0; k < steady_timeout; ++k) {
      const Action action = controller(state, track);
      const StepOutcome outcome = step(state, action, design, sim);
      t += sim.dt;
      if (!outcome.state.finite()) break;
      state = outcome.state;
      rows.push_back(trajectory_row(t, state, outcome));
      const double speed = state.velocity_world().norm();
      held = (std::abs(speed - initial_speed) <= options.steady_band) ? held + 1
                                                                      : 0;
      if (held >= steady_hold) {
        steady = true;
        break;
      }
    }

    if (!steady) {
      result.summary.push_back(std::numeric_limits<double>::quiet_NaN());
      result.flagged.push_back(true);
      result.trajectories.push_back(std::move(rows));
      continue;
    }

    Command stop;
    stop.frame = mode;
    stop.lin = Vec2::Zero();
    stop.yaw_rate = 0.0;
    double stop_time = options.stop_timeout_s;
    double ts = 0.0;
    if (state.velocity_world().norm() <= options.stop_speed) stop_time = 0.0;
    for (int k = 0; k < stop_timeout && stop_time == options.stop_timeout_s;
         ++k) {
      const Action action = controller(state, stop);
      const StepOutcome outcome = step(state, action, design, sim);
      ts += sim.dt;
      t += sim.dt;
      if (!outcome.state.finite()) break;
      state = outcome.state;
      rows.push_back(trajectory_row(t, state, outcome));
      if (state.velocity_world().norm() <= options.stop_speed) stop_time = ts;
    }
    result.summary.push_back(stop_time);
    result.flagged.push_back(false);
    result.trajectories.push_back(std::move(rows));
  }
  result.median = median_of(result.summary, result.flagged);
  return result;
}

ScenarioResult scenario_self_align(const Controller& controller,
                                   const DesignVector& design,
                                   const SimParams& sim, int trials,
                                   std::uint64_t seed,
                                   const SelfAlignOptions& options) {
  ScenarioResult result;
  result.name = "self-align";
  const int settle_steps =
      std::max(1, static_cast<int>(std::lround(options.settle_s / sim.dt)));

  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(trial)));
    const std::uint64_t trial_seed = rng.next_u64();
    result.seeds.push_back(trial_seed);
    SimState state = reset_state(trial_seed, options.reset, sim);
    const double phi = rng.uniform(0.0, 2.0 * kPi);

    Command cmd;
    cmd.frame = FrameMode::WorldFrame;
    cmd.lin = Vec2{options.speed * std::cos(phi), options.speed * std::sin(phi)};
    cmd.yaw_rate = 0.0;

    Rollout roll = rollout(state, controller, cmd, design, sim, settle_steps);
    const double angle =
        std::abs(wrap_pi(roll.final_state.heading + kPi - phi));
    const bool fail =
        roll.diverged || velocity_error(roll.final_state, cmd) > options.fail_error;
    result.summary.push_back(angle);
    result.flagged.push_back(fail);
    result.trajectories.push_back(std::move(roll.rows));
  }
  result.median = median_of(result.summary, result.flagged);
  return result;
}

}  // namespace skate
