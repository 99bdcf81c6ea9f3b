#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include <Eigen/Core>

#include "skate/design_space.hpp"

namespace skate {

inline constexpr int kNumLegs = 4;
inline constexpr int kActionDim = 12;  // per leg: vx cmd, vy cmd, stance logit

// Leg order used everywhere: FR, FL, RR, RL.
enum Leg { kFR = 0, kFL = 1, kRR = 2, kRL = 3 };
int mirror_leg(int leg);  // FR<->FL, RR<->RL

using Action = Eigen::Matrix<double, kActionDim, 1>;
using Vec2 = Eigen::Vector2d;

struct SimParams {
  double mass = 12.0;              // kg
  double inertia_z = 0.223;        // kg m^2
  double hip_half_length = 0.19;   // m, body x offset of the hips
  double hip_half_width = 0.14;    // m, body y offset of the hips
  double mu_lat = 0.8;             // lateral friction coefficient
  double mu_roll = 0.02;           // rolling resistance coefficient
  double slip_vel_eps = 0.05;      // m/s, slip regularization velocity
  double leg_radius = 0.15;        // m, leg workspace disk radius
  double leg_speed_max = 1.5;      // m/s, per-component leg speed limit
  double stance_floor = 0.05;      // floor on the stance-share sum
  double torque_lever = 0.25;      // m, force-to-torque lever of the proxy
  double leg_effort_coeff = 2.0;   // N s/m, leg-motion effort coefficient
  double gravity = 9.81;           // m/s^2
  double dt = 0.02;                // s, control step
  // Substep count sized so the regularized friction stays dissipative at the
  // stiffest reachable load: h <= 2 / max(mu_lat N (1/m + r^2/I_z)) / eps_v.
  int substeps = 20;               // physics substeps per control step

  void validate() const;  // throws std::invalid_argument
  Vec2 hip_offset(int leg) const;
  double weight() const { return mass * gravity; }
};

// Eigen vectors do not zero themselves on default construction; the arrays
// below spell their initializers out.
inline std::array<Vec2, kNumLegs> zero_leg_vectors() {
  return {Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
}

struct SimState {
  double x = 0.0;         // m, world
  double y = 0.0;         // m, world
  double heading = 0.0;   // rad, unwrapped
  double vx = 0.0;        // m/s, world
  double vy = 0.0;        // m/s, world
  double yaw_rate = 0.0;  // rad/s
  std::array<Vec2, kNumLegs> leg_offset =
      zero_leg_vectors();               // m, body frame, inside workspace
  Action prev_action = Action::Zero();  // clamped raw action memory

  Vec2 velocity_world() const { return {vx, vy}; }
  Vec2 velocity_body() const;
  bool finite() const;
};

// Everything a control step produces besides the next state. Per-leg values
// and tau_sq are substep means; forces are expressed in the body frame.
struct StepOutcome {
  SimState state;
  std::array<Vec2, kNumLegs> contact_force = zero_leg_vectors();  // N
  std::array<Vec2, kNumLegs> leg_velocity =
      zero_leg_vectors();  // m/s, realized, body frame
  std::array<double, kNumLegs> normal_load{};   // N, last substep
  double tau_sq = 0.0;                          // N^2 m^2 torque proxy
  double workspace_violation_sq = 0.0;          // m^2, pre-projection excess
};

// Rolling direction u and grip direction n of a wheel in world coordinates;
// u = (cos(heading + psi), sin(heading + psi)), n is u rotated +90 degrees.
std::pair<Vec2, Vec2> wheel_axes(double psi, double heading);

// World position and velocity of a leg's contact point, with leg_velocity the
// realized body-frame offset rate for the current substep.
std::pair<Vec2, Vec2> contact_kinematics(const SimState& state, int leg,
                                         const SimParams& params,
                                         const Vec2& leg_velocity);

// Regularized anisotropic friction: strong resistance across the rolling
// axis, weak rolling resistance along it.
Vec2 friction_force(const Vec2& contact_velocity_world, double normal_load,
                    double psi, double heading, const SimParams& params);

// Sum over legs of lever^2 |f|^2 + b_leg^2 |pdot|^2, the squared-torque proxy.
double torque_proxy(const std::array<Vec2, kNumLegs>& forces,
                    const std::array<Vec2, kNumLegs>& leg_velocities,
                    const SimParams& params);

// Maps a raw stance logit (clamped to [-1, 1]) to a share in (0, 1).
double stance_share(double raw_logit);

// One control step of semi-implicit Euler over params.substeps substeps.
// Throws std::invalid_argument on non-finite action components.
StepOutcome step(const SimState& state, const Action& action,
                 const DesignVector& design, const SimParams& params);

// Episode initialization ranges; each value is a symmetric half-width around
// the canonical origin state.
struct ResetConfig {
  double heading_range = 3.14159265358979;  // rad
  double lin_vel_range = 0.5;               // m/s per component
  double yaw_rate_range = 0.5;              // rad/s
  double leg_offset_range = 0.05;           // m per component
};

SimState reset_state(std::uint64_t seed, const ResetConfig& config,
                     const SimParams& params);

// Sagittal reflection operators (world y and heading negate, legs swap
// left/right). step commutes with them when the design is mirrored too.
SimState mirror_state(const SimState& state);
Action mirror_action(const Action& action);

double kinetic_energy(const SimState& state, const SimParams& params);

}  // namespace skate
