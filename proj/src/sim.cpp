#include "skate/sim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "skate/rng.hpp"

namespace skate {

namespace {

Eigen::Matrix2d rot(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }  // z-hat cross v

double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double clamp_unit(double v) { return std::min(1.0, std::max(-1.0, v)); }

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("SimParams.") + name +
                                " must be strictly positive");
  }
}

}  // namespace

int mirror_leg(int leg) {
  switch (leg) {
    case kFR: return kFL;
    case kFL: return kFR;
    case kRR: return kRL;
    case kRL: return kRR;
    default: throw std::invalid_argument("leg index out of range");
  }
}

void SimParams::validate() const {
  check_positive(mass, "mass");
  check_positive(inertia_z, "inertia_z");
  check_positive(hip_half_length, "hip_half_length");
  check_positive(hip_half_width, "hip_half_width");
  check_positive(mu_lat, "mu_lat");
  check_positive(mu_roll, "mu_roll");
  check_positive(slip_vel_eps, "slip_vel_eps");
  check_positive(leg_radius, "leg_radius");
  check_positive(leg_speed_max, "leg_speed_max");
  check_positive(stance_floor, "stance_floor");
  check_positive(torque_lever, "torque_lever");
  check_positive(leg_effort_coeff, "leg_effort_coeff");
  check_positive(gravity, "gravity");
  check_positive(dt, "dt");
  if (mu_roll >= mu_lat) {
    throw std::invalid_argument("SimParams: mu_roll must be below mu_lat");
  }
  if (substeps < 1) {
    throw std::invalid_argument("SimParams.substeps must be >= 1");
  }
}

Vec2 SimParams::hip_offset(int leg) const {
  switch (leg) {
    case kFR: return {hip_half_length, -hip_half_width};
    case kFL: return {hip_half_length, hip_half_width};
    case kRR: return {-hip_half_length, -hip_half_width};
    case kRL: return {-hip_half_length, hip_half_width};
    default: throw std::invalid_argument("leg index out of range");
  }
}

Vec2 SimState::velocity_body() const {
  return rot(-heading) * velocity_world();
}

bool SimState::finite() const {
  bool ok = std::isfinite(x) && std::isfinite(y) && std::isfinite(heading) &&
            std::isfinite(vx) && std::isfinite(vy) && std::isfinite(yaw_rate);
  for (const auto& p : leg_offset) ok = ok && p.allFinite();
  return ok && prev_action.allFinite();
}

std::pair<Vec2, Vec2> wheel_axes(double psi, double heading) {
  const double a = heading + psi;
  const Vec2 u{std::cos(a), std::sin(a)};
  return {u, perp(u)};
}

std::pair<Vec2, Vec2> contact_kinematics(const SimState& state, int leg,
                                         const SimParams& params,
                                         const Vec2& leg_velocity) {
  const Eigen::Matrix2d r = rot(state.heading);
  const Vec2 arm = r * (params.hip_offset(leg) + state.leg_offset[leg]);
  const Vec2 pos = Vec2{state.x, state.y} + arm;
  const Vec2 vel =
      state.velocity_world() + state.yaw_rate * perp(arm) + r * leg_velocity;
  return {pos, vel};
}

Vec2 friction_force(const Vec2& contact_velocity_world, double normal_load,
                    double psi, double heading, const SimParams& params) {
  const auto [u, n] = wheel_axes(psi, heading);
  const double slip_u = contact_velocity_world.dot(u) / params.slip_vel_eps;
  const double slip_n = contact_velocity_world.dot(n) / params.slip_vel_eps;
  return -normal_load * (params.mu_roll * std::tanh(slip_u) * u +
                         params.mu_lat * std::tanh(slip_n) * n);
}

double torque_proxy(const std::array<Vec2, kNumLegs>& forces,
                    const std::array<Vec2, kNumLegs>& leg_velocities,
                    const SimParams& params) {
  const double lever_sq = params.torque_lever * params.torque_lever;
  const double effort_sq = params.leg_effort_coeff * params.leg_effort_coeff;
  double total = 0.0;
  for (int i = 0; i < kNumLegs; ++i) {
    total += lever_sq * forces[static_cast<size_t>(i)].squaredNorm() +
             effort_sq * leg_velocities[static_cast<size_t>(i)].squaredNorm();
  }
  return total;
}

double stance_share(double raw_logit) {
  return 1.0 / (1.0 + std::exp(-clamp_unit(raw_logit)));
}

StepOutcome step(const SimState& state, const Action& action,
                 const DesignVector& design, const SimParams& params) {
  for (int k = 0; k < kActionDim; ++k) {
    if (!std::isfinite(action[k])) {
      std::ostringstream msg;
      msg << "non-finite action component " << k << " (leg " << k / 3
          << (k % 3 == 2 ? ", stance logit)" : ", velocity)");
      throw std::invalid_argument(msg.str());
    }
  }

  const double h = params.dt / params.substeps;

  // Normal loads are fixed for the whole control step: quasi-static shares
  // floored so unloading every leg cannot zero the denominator.
  std::array<double, kNumLegs> load{};
  {
    double share_sum = 0.0;
    std::array<double, kNumLegs> share{};
    for (int i = 0; i < kNumLegs; ++i) {
      share[static_cast<size_t>(i)] = stance_share(action[3 * i + 2]);
      share_sum += share[static_cast<size_t>(i)];
    }
    const double denom = std::max(share_sum, params.stance_floor);
    for (int i = 0; i < kNumLegs; ++i) {
      load[static_cast<size_t>(i)] =
          params.weight() * share[static_cast<size_t>(i)] / denom;
    }
  }

  StepOutcome out;
  out.normal_load = load;
  SimState cur = state;

  for (int sub = 0; sub < params.substeps; ++sub) {
    // Realize leg motion: per-component clamp, forward step, projection back
    // onto the workspace disk. The realized rate feeds the contact velocity.
    std::array<Vec2, kNumLegs> next_offset = zero_leg_vectors();
    std::array<Vec2, kNumLegs> realized = zero_leg_vectors();
    for (int i = 0; i < kNumLegs; ++i) {
      const size_t li = static_cast<size_t>(i);
      const Vec2 cmd{params.leg_speed_max * clamp_unit(action[3 * i]),
                     params.leg_speed_max * clamp_unit(action[3 * i + 1])};
      Vec2 target = cur.leg_offset[li] + h * cmd;
      const double norm = target.norm();
      if (norm > params.leg_radius) {
        const double excess = norm - params.leg_radius;
        out.workspace_violation_sq += excess * excess;
        target *= params.leg_radius / norm;
      }
      next_offset[li] = target;
      realized[li] = (target - cur.leg_offset[li]) / h;
    }

    // Contact forces and yaw torque about the body center.
    const Eigen::Matrix2d body_from_world = rot(-cur.heading);
    Vec2 force_total = Vec2::Zero();
    double torque_z = 0.0;
    std::array<Vec2, kNumLegs> force_body = zero_leg_vectors();
    for (int i = 0; i < kNumLegs; ++i) {
      const size_t li = static_cast<size_t>(i);
      const auto [pos, vel] = contact_kinematics(cur, i, params, realized[li]);
      const Vec2 f =
          friction_force(vel, load[li], design.angle(i), cur.heading, params);
      force_total += f;
      const Vec2 arm = pos - Vec2{cur.x, cur.y};
      torque_z += cross2(arm, f);
      force_body[li] = body_from_world * f;
      out.contact_force[li] += force_body[li];
      out.leg_velocity[li] += realized[li];
    }
    out.tau_sq += torque_proxy(force_body, realized, params);

    // Semi-implicit Euler: velocities first, then pose, then leg offsets.
    cur.vx += h * force_total.x() / params.mass;
    cur.vy += h * force_total.y() / params.mass;
    cur.yaw_rate += h * torque_z / params.inertia_z;
    cur.x += h * cur.vx;
    cur.y += h * cur.vy;
    cur.heading += h * cur.yaw_rate;
    cur.leg_offset = next_offset;
  }

  const double inv_sub = 1.0 / params.substeps;
  for (int i = 0; i < kNumLegs; ++i) {
    out.contact_force[static_cast<size_t>(i)] *= inv_sub;
    out.leg_velocity[static_cast<size_t>(i)] *= inv_sub;
  }
  out.tau_sq *= inv_sub;
  out.workspace_violation_sq *= inv_sub;

  for (int k = 0; k < kActionDim; ++k) cur.prev_action[k] = clamp_unit(action[k]);
  out.state = cur;
  return out;
}

SimState reset_state(std::uint64_t seed, const ResetConfig& config,
                     const SimParams& params) {
  Rng rng(seed);
  SimState s;
  s.heading = rng.uniform(-config.heading_range, config.heading_range);
  s.vx = rng.uniform(-config.lin_vel_range, config.lin_vel_range);
  s.vy = rng.uniform(-config.lin_vel_range, config.lin_vel_range);
  s.yaw_rate = rng.uniform(-config.yaw_rate_range, config.yaw_rate_range);
  for (int i = 0; i < kNumLegs; ++i) {
    Vec2 p{rng.uniform(-config.leg_offset_range, config.leg_offset_range),
           rng.uniform(-config.leg_offset_range, config.leg_offset_range)};
    const double norm = p.norm();
    if (norm > params.leg_radius) p *= params.leg_radius / norm;
    s.leg_offset[static_cast<size_t>(i)] = p;
  }
  return s;
}

SimState mirror_state(const SimState& state) {
  SimState m;
  m.x = state.x;
  m.y = -state.y;
  m.heading = -state.heading;
  m.vx = state.vx;
  m.vy = -state.vy;
  m.yaw_rate = -state.yaw_rate;
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec2& src = state.leg_offset[static_cast<size_t>(mirror_leg(i))];
    m.leg_offset[static_cast<size_t>(i)] = {src.x(), -src.y()};
  }
  m.prev_action = mirror_action(state.prev_action);
  return m;
}

Action mirror_action(const Action& action) {
  Action m;
  for (int i = 0; i < kNumLegs; ++i) {
    const int src = 3 * mirror_leg(i);
    m[3 * i] = action[src];
    m[3 * i + 1] = -action[src + 1];
    m[3 * i + 2] = action[src + 2];
  }
  return m;
}

double kinetic_energy(const SimState& state, const SimParams& params) {
  return 0.5 * params.mass * state.velocity_world().squaredNorm() +
         0.5 * params.inertia_z * state.yaw_rate * state.yaw_rate;
}

}  // namespace skate
