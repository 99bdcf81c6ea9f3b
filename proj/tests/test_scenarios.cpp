#include <doctest.h>

#include <cmath>
#include <vector>

#include "skate/env.hpp"
#include "skate/scenarios.hpp"

using namespace skate;

namespace {

constexpr double kPi = 3.141592653589793;

int pair_of(int leg) { return (leg == kFR || leg == kRL) ? 0 : 1; }

// Scripted yaw "paddle": with wheels mounted radially (rolling axes through
// the body center) the grip direction is tangential, so diagonal leg pairs
// can alternate loaded tangential power strokes with unloaded return strokes.
// Proportional throttle on the heading error rotates the body until +x points
// along the commanded direction.
Controller yaw_paddle(const SimParams& sim) {
  return [sim](const SimState& state, const Command& cmd) -> Action {
    const double target = std::atan2(cmd.lin.y(), cmd.lin.x());
    double e = target - state.heading;
    while (e > kPi) e -= 2.0 * kPi;
    while (e < -kPi) e += 2.0 * kPi;
    const double throttle = std::min(1.0, std::max(-1.0, 2.0 * e));
    Action a = Action::Zero();
    if (std::abs(throttle) < 1e-3) return a;
    const double s = throttle > 0.0 ? 1.0 : -1.0;
    Vec2 that[kNumLegs];
    double stroke[2] = {0.0, 0.0};
    for (int i = 0; i < kNumLegs; ++i) {
      const Vec2 rhat = sim.hip_offset(i).normalized();
      that[i] = Vec2(-rhat.y(), rhat.x());
      stroke[pair_of(i)] += s * state.leg_offset[i].dot(that[i]);
    }
    const int power = stroke[0] >= stroke[1] ? 0 : 1;
    for (int i = 0; i < kNumLegs; ++i) {
      const bool p = pair_of(i) == power;
      const Vec2 dir = (p ? -s : s) * std::abs(throttle) * that[i];
      a[3 * i] = dir.x();
      a[3 * i + 1] = dir.y();
      a[3 * i + 2] = p ? 1.0 : -1.0;
    }
    return a;
  };
}

// Scripted thrust "paddle": every leg see-saws along the commanded base-frame
// direction, loaded while sweeping against it and unloaded on the way back.
// Mirror-equivariant by construction.
Controller thrust_paddle() {
  return [](const SimState& state, const Command& cmd) -> Action {
    Action a = Action::Zero();
    const double n = cmd.lin.norm();
    if (n < 1e-12) return a;
    const Vec2 c = cmd.lin / n;
    for (int i = 0; i < kNumLegs; ++i) {
      const bool power = state.leg_offset[static_cast<std::size_t>(i)].dot(c) > 0.0;
      const Vec2 dir = power ? Vec2(-c) : Vec2(c);
      a[3 * i] = dir.x();
      a[3 * i + 1] = dir.y();
      a[3 * i + 2] = power ? 1.0 : -1.0;
    }
    return a;
  };
}

// Smooth velocity tracker: every leg sweeps against the base-frame velocity
// error through a tanh, with a constant stance logit. Continuous in the
// state, so mirrored runs cannot be knocked onto different control branches
// by last-ulp asymmetries in the inputs.
Controller smooth_tracker() {
  return [](const SimState& state, const Command& cmd) -> Action {
    const Vec2 e = cmd.lin - state.velocity_body();
    Action a = Action::Zero();
    for (int i = 0; i < kNumLegs; ++i) {
      a[3 * i] = -std::tanh(2.0 * e.x());
      a[3 * i + 1] = -std::tanh(2.0 * e.y());
      a[3 * i + 2] = 0.2;
    }
    return a;
  };
}

// Wheels mounted radially: the Coupled1D pattern with psi = atan2(w, l).
DesignVector radial_design(const SimParams& sim) {
  const double psi = std::atan2(sim.hip_half_width, sim.hip_half_length);
  return expand_design(Eigen::VectorXd::Constant(1, psi),
                       CouplingMode::Coupled1D);
}

Controller zero_controller() {
  return [](const SimState&, const Command&) { return Action::Zero(); };
}

ResetConfig frozen_reset() {
  ResetConfig r;
  r.heading_range = 0.0;
  r.lin_vel_range = 0.0;
  r.yaw_rate_range = 0.0;
  r.leg_offset_range = 0.0;
  return r;
}

}  // namespace

TEST_CASE("rollout is deterministic and stamps times") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  const SimState start = reset_state(21, ResetConfig{}, sim);
  Command cmd;
  cmd.frame = FrameMode::WorldFrame;
  cmd.lin = Vec2(1.0, 0.0);

  const Rollout a = rollout(start, yaw_paddle(sim), cmd, design, sim, 50);
  const Rollout b = rollout(start, yaw_paddle(sim), cmd, design, sim, 50);
  CHECK_FALSE(a.diverged);
  REQUIRE(a.rows.size() == 50);
  REQUIRE(b.rows.size() == 50);
  CHECK(a.rows[49].t == doctest::Approx(50 * sim.dt).epsilon(1e-12));
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].x == b.rows[k].x);
    CHECK(a.rows[k].theta == b.rows[k].theta);
    CHECK(a.rows[k].tau_sq == b.rows[k].tau_sq);
  }
  CHECK(a.final_state.heading == b.final_state.heading);
}

TEST_CASE("rollout aborts and flags divergence") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  SimState start;
  start.vx = 0.5;

  const Rollout r =
      rollout(start, zero_controller(), Command{}, design, sim, 50, 1e-6);
  CHECK(r.diverged);
  CHECK(r.rows.empty());
  CHECK(r.final_state.vx == 0.5);
}

TEST_CASE("policy_controller reproduces the mean-action forward pass") {
  const PolicyParams params = PolicyParams::initialized(kObsDim, kActionDim, 7);
  const Controller ctrl = policy_controller(params);
  SimParams sim;
  TaskConfig task;
  Rng rng(15);
  for (int k = 0; k < 20; ++k) {
    const SimState state =
        reset_state(rng.next_u64(), ResetConfig{}, sim);
    const Command cmd = sample_command(rng, task);
    const Action expected =
        params.policy.forward(build_observation(state, cmd));
    const Action got = ctrl(state, cmd);
    CHECK((got - expected).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("sweep covers the angle grid") {
  SimParams sim;
  const DesignVector design =
      expand_design(Eigen::VectorXd::Constant(1, 0.5236),
                    CouplingMode::Coupled1D);
  MetricConfig metric;
  SweepOptions opt;
  opt.reset = frozen_reset();
  opt.warmup_steps = 40;
  opt.measure_steps = 60;

  const auto one = directional_cot_sweep(thrust_paddle(), design, sim, metric,
                                         1.0, 1, 5, opt);
  REQUIRE(one.size() == 1);
  CHECK(one[0].alpha_deg == 0.0);
  CHECK_FALSE(one[0].failed);
  CHECK(one[0].cot > 0.0);

  const auto rows = directional_cot_sweep(thrust_paddle(), design, sim, metric,
                                          1.5, 24, 5, opt);
  REQUIRE(rows.size() == 24);
  for (int k = 0; k < 24; ++k) {
    CHECK(rows[static_cast<std::size_t>(k)].alpha_deg ==
          doctest::Approx(15.0 * k).epsilon(1e-9));
    CHECK_FALSE(rows[static_cast<std::size_t>(k)].failed);
    CHECK(rows[static_cast<std::size_t>(k)].cot > 0.0);
  }
}

TEST_CASE("sweep of a symmetric design and controller is mirror symmetric") {
  SimParams sim;
  const DesignVector design =
      expand_design(Eigen::VectorXd::Constant(1, 0.5236),
                    CouplingMode::Coupled1D);
  MetricConfig metric;
  SweepOptions opt;
  opt.reset = frozen_reset();
  opt.warmup_steps = 20;
  opt.measure_steps = 150;

  const auto rows = directional_cot_sweep(smooth_tracker(), design, sim, metric,
                                          1.5, 24, 5, opt);
  REQUIRE(rows.size() == 24);
  CHECK(rows[0].cot > 0.0);
  for (int k = 1; k < 12; ++k) {
    const double a = rows[static_cast<std::size_t>(k)].cot;
    const double b = rows[static_cast<std::size_t>(24 - k)].cot;
    CHECK(std::abs(a - b) <= 1e-9 + 1e-6 * std::max(std::abs(a), std::abs(b)));
  }
}

TEST_CASE("sweep flags diverging directions") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  MetricConfig metric;
  SweepOptions opt;
  opt.reset = frozen_reset();
  opt.divergence_speed = 1e-9;

  const auto rows = directional_cot_sweep(thrust_paddle(), design, sim, metric,
                                          1.0, 4, 5, opt);
  REQUIRE(rows.size() == 4);
  for (const SweepRow& r : rows) {
    CHECK(r.failed);
    CHECK(r.cot == 0.0);
  }
}

TEST_CASE("sweep_table prints one row per angle") {
  std::vector<SweepRow> rows(2);
  rows[0] = SweepRow{0.0, 0.5, false};
  rows[1] = SweepRow{15.0, 0.25, true};
  CHECK(sweep_table(rows) == "alpha_deg cot failed\n0.0000 0.5 0\n15.0000 0.25 1\n");
  CHECK(sweep_table({}) == "alpha_deg cot failed\n");
}

TEST_CASE("hockey stop from rest reports zero stop time") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  HockeyStopOptions opt;
  opt.reset = frozen_reset();

  const ScenarioResult r = scenario_hockey_stop(
      zero_controller(), FrameMode::BaseFrame, design, sim, 0.0, 5, 11, opt);
  REQUIRE(r.summary.size() == 5);
  REQUIRE(r.seeds.size() == 5);
  REQUIRE(r.trajectories.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK_FALSE(r.flagged[static_cast<std::size_t>(k)]);
    CHECK(r.summary[static_cast<std::size_t>(k)] == 0.0);
  }
  CHECK(r.median == 0.0);
}

TEST_CASE("hockey stop is deterministic per seed") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  HockeyStopOptions opt;
  opt.steady_band = 100.0;
  opt.steady_hold_s = 0.02;

  const ScenarioResult a = scenario_hockey_stop(
      zero_controller(), FrameMode::BaseFrame, design, sim, 0.5, 6, 33, opt);
  const ScenarioResult b = scenario_hockey_stop(
      zero_controller(), FrameMode::BaseFrame, design, sim, 0.5, 6, 33, opt);
  REQUIRE(a.summary.size() == 6);
  bool any_positive = false;
  for (int k = 0; k < 6; ++k) {
    const std::size_t i = static_cast<std::size_t>(k);
    CHECK(a.seeds[i] == b.seeds[i]);
    CHECK(a.flagged[i] == b.flagged[i]);
    CHECK(a.summary[i] == b.summary[i]);
    any_positive = any_positive || a.summary[i] > 0.0;
  }
  CHECK(any_positive);
  CHECK(a.median == b.median);
}

TEST_CASE("hockey stop censors timeouts without flagging them") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  HockeyStopOptions opt;
  opt.steady_band = 100.0;
  opt.steady_hold_s = 0.02;
  opt.stop_speed = 0.0;
  opt.stop_timeout_s = 0.4;

  const ScenarioResult r = scenario_hockey_stop(
      zero_controller(), FrameMode::BaseFrame, design, sim, 0.5, 4, 3, opt);
  for (int k = 0; k < 4; ++k) {
    CHECK_FALSE(r.flagged[static_cast<std::size_t>(k)]);
    CHECK(r.summary[static_cast<std::size_t>(k)] == 0.4);
  }
  CHECK(r.median == 0.4);
}

TEST_CASE("hockey stop flags trials that never reach steady speed") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  HockeyStopOptions opt;
  opt.steady_timeout_s = 0.5;

  const ScenarioResult r = scenario_hockey_stop(
      zero_controller(), FrameMode::BaseFrame, design, sim, 2.0, 3, 9, opt);
  for (int k = 0; k < 3; ++k) {
    CHECK(r.flagged[static_cast<std::size_t>(k)]);
  }
  CHECK(std::isnan(r.median));
}

TEST_CASE("self-align rotates the paddle double to the command direction") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  SelfAlignOptions opt;
  opt.fail_error = 2.0;

  const ScenarioResult r =
      scenario_self_align(yaw_paddle(sim), design, sim, 15, 3, opt);
  REQUIRE(r.summary.size() == 15);
  REQUIRE(r.seeds.size() == 15);
  for (int k = 0; k < 15; ++k) {
    const std::size_t i = static_cast<std::size_t>(k);
    CHECK_FALSE(r.flagged[i]);
    CHECK(r.summary[i] == doctest::Approx(kPi).epsilon(0.02));
  }
  CHECK(r.median == doctest::Approx(kPi).epsilon(0.02));
}

TEST_CASE("self-align flags tracking failures") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  SelfAlignOptions opt;
  opt.fail_error = 1e-6;

  const ScenarioResult r =
      scenario_self_align(yaw_paddle(sim), design, sim, 4, 3, opt);
  for (int k = 0; k < 4; ++k) {
    CHECK(r.flagged[static_cast<std::size_t>(k)]);
  }
  CHECK(std::isnan(r.median));
}

TEST_CASE("mirrored command and state give the mirrored alignment run") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  const Controller ctrl = yaw_paddle(sim);
  const double phi = 1.1;

  Command cmd;
  cmd.frame = FrameMode::WorldFrame;
  cmd.lin = Vec2(std::cos(phi), std::sin(phi));
  Command mcmd = cmd;
  mcmd.lin.y() = -mcmd.lin.y();

  const SimState start = reset_state(77, ResetConfig{}, sim);
  const SimState mstart = mirror_state(start);

  const Rollout a = rollout(start, ctrl, cmd, design, sim, 150);
  const Rollout b = rollout(mstart, ctrl, mcmd, design, sim, 150);
  REQUIRE(a.rows.size() == b.rows.size());
  REQUIRE(a.rows.size() == 150);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].x == doctest::Approx(b.rows[k].x).epsilon(1e-7));
    CHECK(a.rows[k].y == doctest::Approx(-b.rows[k].y).epsilon(1e-7));
    CHECK(a.rows[k].theta == doctest::Approx(-b.rows[k].theta).epsilon(1e-7));
    CHECK(a.rows[k].vx == doctest::Approx(b.rows[k].vx).epsilon(1e-7));
    CHECK(a.rows[k].vy == doctest::Approx(-b.rows[k].vy).epsilon(1e-7));
    CHECK(a.rows[k].omega == doctest::Approx(-b.rows[k].omega).epsilon(1e-7));
    CHECK(a.rows[k].tau_sq == doctest::Approx(b.rows[k].tau_sq).epsilon(1e-7));
    for (int i = 0; i < kNumLegs; ++i) {
      const std::size_t m = static_cast<std::size_t>(mirror_leg(i));
      const std::size_t li = static_cast<std::size_t>(i);
      CHECK(a.rows[k].p[li].x() ==
            doctest::Approx(b.rows[k].p[m].x()).epsilon(1e-7));
      CHECK(a.rows[k].p[li].y() ==
            doctest::Approx(-b.rows[k].p[m].y()).epsilon(1e-7));
      CHECK(a.rows[k].f[li].x() ==
            doctest::Approx(b.rows[k].f[m].x()).epsilon(1e-7));
      CHECK(a.rows[k].f[li].y() ==
            doctest::Approx(-b.rows[k].f[m].y()).epsilon(1e-7));
    }
  }

  // Equal alignment angles either way.
  const auto align_angle = [](double heading, double target) {
    double d = heading + kPi - target;
    while (d > kPi) d -= 2.0 * kPi;
    while (d < -kPi) d += 2.0 * kPi;
    return std::abs(d);
  };
  CHECK(align_angle(a.final_state.heading, phi) ==
        doctest::Approx(align_angle(b.final_state.heading, -phi))
            .epsilon(1e-7));
}

TEST_CASE("alignment median and directional minimum are reported together") {
  SimParams sim;
  const DesignVector design = radial_design(sim);
  SelfAlignOptions opt;
  opt.fail_error = 2.0;
  const ScenarioResult align =
      scenario_self_align(yaw_paddle(sim), design, sim, 9, 3, opt);

  MetricConfig metric;
  SweepOptions sweep_opt;
  sweep_opt.reset = frozen_reset();
  sweep_opt.warmup_steps = 40;
  sweep_opt.measure_steps = 60;
  const auto rows = directional_cot_sweep(thrust_paddle(), design, sim, metric,
                                          1.0, 12, 5, sweep_opt);
  REQUIRE(rows.size() == 12);
  double best_alpha = rows[0].alpha_deg, best_cot = rows[0].cot;
  for (const SweepRow& r : rows) {
    if (!r.failed && r.cot < best_cot) {
      best_cot = r.cot;
      best_alpha = r.alpha_deg;
    }
  }
  MESSAGE("self-align median ", align.median, " rad; sweep minimum at ",
          best_alpha, " deg (cot ", best_cot, ")");
  CHECK(std::isfinite(align.median));
  CHECK(std::isfinite(best_cot));
}
