#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "skate/design_space.hpp"
#include "skate/policy.hpp"
#include "skate/rewards.hpp"
#include "skate/sim.hpp"
#include "skate/trajectory.hpp"

namespace skate {

// Deterministic closed-loop controller: maps (state, command) to an action.
using Controller = std::function<Action(const SimState&, const Command&)>;

// Mean-action controller around a trained policy.
Controller policy_controller(PolicyParams params);

struct Rollout {
  std::vector<TrajectoryRow> rows;
  SimState final_state;
  bool diverged = false;
};

// Fixed-command rollout of one simulator instance; stops early (flagging
// divergence) when speed exceeds divergence_speed.
Rollout rollout(SimState state, const Controller& controller,
                const Command& command, const DesignVector& design,
                const SimParams& sim, int steps,
                double divergence_speed = 10.0);

struct SweepRow {
  double alpha_deg = 0.0;
  double cot = 0.0;
  bool failed = false;
};

struct SweepOptions {
  int warmup_steps = 150;
  int measure_steps = 250;
  double divergence_speed = 10.0;
  ResetConfig reset;
};

// Steady-state CoT of base-frame commands (speed*cos(alpha), speed*sin(alpha))
// over an evenly spaced angle grid. One deterministic trial per angle.
std::vector<SweepRow> directional_cot_sweep(
    const Controller& controller, const DesignVector& design,
    const SimParams& sim, const MetricConfig& metric, double speed,
    int n_angles, std::uint64_t seed, const SweepOptions& options = {});

std::string sweep_table(const std::vector<SweepRow>& rows);

struct ScenarioResult {
  std::string name;
  std::vector<double> summary;          // stop time (s) or alignment angle (rad)
  std::vector<bool> flagged;            // discarded / failed trials
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<TrajectoryRow>> trajectories;
  double median = 0.0;                  // over unflagged trials
};

struct HockeyStopOptions {
  double stop_speed = 0.1;      // m/s, stop threshold
  double stop_timeout_s = 10.0;
  double steady_band = 0.1;     // m/s around the target speed
  double steady_hold_s = 0.5;
  double steady_timeout_s = 15.0;
  ResetConfig reset;
};

// Per trial: track initial_speed along +x (in the policy's command frame)
// until steady, switch the command to zero, and time the drop to stop_speed.
// Trials that never reach steady speed are flagged and excluded from the
// median; stops that time out are censored at stop_timeout_s.
ScenarioResult scenario_hockey_stop(const Controller& controller,
                                    FrameMode mode, const DesignVector& design,
                                    const SimParams& sim, double initial_speed,
                                    int trials, std::uint64_t seed,
                                    const HockeyStopOptions& options = {});

struct SelfAlignOptions {
  double settle_s = 4.0;
  double speed = 1.0;        // m/s command magnitude
  double fail_error = 1.0;   // m/s, flags a trial as tracking failure
  ResetConfig reset;
};

// Per trial: world-frame command in a random direction with zero yaw-rate
// command; after the settling window, the summary is the angle between the
// body's -x axis and the command direction.
ScenarioResult scenario_self_align(const Controller& controller,
                                   const DesignVector& design,
                                   const SimParams& sim, int trials,
                                   std::uint64_t seed,
                                   const SelfAlignOptions& options = {});

}  // namespace skate
