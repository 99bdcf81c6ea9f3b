#pragma once

#include <string>
#include <vector>

#include "skate/sim.hpp"

namespace skate {

// One control step of a logged rollout. Leg order is FR, FL, RR, RL; leg
// offsets p and contact forces f are body-frame.
struct TrajectoryRow {
  double t = 0.0;
  double x = 0.0, y = 0.0, theta = 0.0;
  double vx = 0.0, vy = 0.0, omega = 0.0;
  Vec2 p[kNumLegs] = {Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  Vec2 f[kNumLegs] = {Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  double tau_sq = 0.0;
};

// Fixed CSV column order; values printed with %.17g so reads round-trip.
extern const char* const kTrajectoryHeader;

TrajectoryRow trajectory_row(double t, const SimState& state,
                             const StepOutcome& outcome);

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path);

}  // namespace skate
