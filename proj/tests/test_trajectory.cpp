#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "skate/rng.hpp"
#include "skate/trajectory.hpp"

using namespace skate;

namespace {

std::string temp_path(const std::string& name) {
  return "/tmp/skate_test_" + name;
}

std::vector<TrajectoryRow> random_rows(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrajectoryRow> rows(static_cast<std::size_t>(n));
  double t = 0.0;
  for (TrajectoryRow& r : rows) {
    r.t = t;
    t += 0.02;
    r.x = rng.normal();
    r.y = rng.normal();
    r.theta = rng.normal();
    r.vx = 3.0 * rng.normal();
    r.vy = 3.0 * rng.normal();
    r.omega = rng.normal();
    for (int i = 0; i < kNumLegs; ++i) {
      r.p[i] = Vec2(0.1 * rng.normal(), 0.1 * rng.normal());
      r.f[i] = Vec2(30.0 * rng.normal(), 30.0 * rng.normal());
    }
    r.tau_sq = std::abs(rng.normal());
  }
  return rows;
}

}  // namespace

TEST_CASE("header names each column in dump order") {
  const std::string header = kTrajectoryHeader;
  CHECK(header ==
        "t,x,y,theta,vx,vy,omega,"
        "p_fr_x,p_fr_y,p_fl_x,p_fl_y,p_rr_x,p_rr_y,p_rl_x,p_rl_y,"
        "f_fr_x,f_fr_y,f_fl_x,f_fl_y,f_rr_x,f_rr_y,f_rl_x,f_rl_y,"
        "tau_sq");
}

TEST_CASE("trajectory_row copies state and outcome fields") {
  SimState state;
  state.x = 1.5;
  state.y = -0.25;
  state.heading = 0.7;
  state.vx = 2.0;
  state.vy = -0.5;
  state.yaw_rate = 0.3;
  StepOutcome outcome;
  for (int i = 0; i < kNumLegs; ++i) {
    state.leg_offset[i] = Vec2(0.01 * (i + 1), -0.02 * (i + 1));
    outcome.contact_force[i] = Vec2(10.0 * i, -5.0 * i);
  }
  outcome.tau_sq = 42.5;

  const TrajectoryRow row = trajectory_row(3.14, state, outcome);
  CHECK(row.t == 3.14);
  CHECK(row.x == 1.5);
  CHECK(row.y == -0.25);
  CHECK(row.theta == 0.7);
  CHECK(row.vx == 2.0);
  CHECK(row.vy == -0.5);
  CHECK(row.omega == 0.3);
  for (int i = 0; i < kNumLegs; ++i) {
    CHECK(row.p[i] == state.leg_offset[i]);
    CHECK(row.f[i] == outcome.contact_force[i]);
  }
  CHECK(row.tau_sq == 42.5);
}

TEST_CASE("csv round trip is bit exact") {
  const std::string path = temp_path("traj.csv");
  const std::vector<TrajectoryRow> rows = random_rows(64, 17);
  write_trajectory_csv(path, rows);
  const std::vector<TrajectoryRow> back = read_trajectory_csv(path);

  REQUIRE(back.size() == rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(back[k].t == rows[k].t);
    CHECK(back[k].x == rows[k].x);
    CHECK(back[k].y == rows[k].y);
    CHECK(back[k].theta == rows[k].theta);
    CHECK(back[k].vx == rows[k].vx);
    CHECK(back[k].vy == rows[k].vy);
    CHECK(back[k].omega == rows[k].omega);
    for (int i = 0; i < kNumLegs; ++i) {
      CHECK(back[k].p[i] == rows[k].p[i]);
      CHECK(back[k].f[i] == rows[k].f[i]);
    }
    CHECK(back[k].tau_sq == rows[k].tau_sq);
  }
  std::remove(path.c_str());
}

TEST_CASE("empty dump round trips to an empty vector") {
  const std::string path = temp_path("traj_empty.csv");
  write_trajectory_csv(path, {});
  CHECK(read_trajectory_csv(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("rewriting a read dump reproduces the file bytes") {
  const std::string path_a = temp_path("traj_a.csv");
  const std::string path_b = temp_path("traj_b.csv");
  write_trajectory_csv(path_a, random_rows(32, 5));
  write_trajectory_csv(path_b, read_trajectory_csv(path_a));

  std::ifstream a(path_a, std::ios::binary), b(path_b, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                            std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());
}

TEST_CASE("reader rejects malformed dumps with line numbers") {
  const std::string path = temp_path("traj_bad.csv");

  {
    std::ofstream out(path);
    out << "t,x,y\n";
  }
  CHECK_THROWS_WITH_AS(read_trajectory_csv(path),
                       doctest::Contains("header mismatch"),
                       std::runtime_error);

  const std::vector<TrajectoryRow> rows = random_rows(3, 9);
  write_trajectory_csv(path, rows);
  {
    std::ofstream out(path, std::ios::app);
    out << "1,2,3\n";
  }
  CHECK_THROWS_WITH_AS(read_trajectory_csv(path),
                       doctest::Contains("too short at line 5"),
                       std::runtime_error);

  write_trajectory_csv(path, rows);
  {
    std::ofstream out(path, std::ios::app);
    for (int k = 0; k < 23; ++k) out << "1,";
    out << "oops\n";
  }
  CHECK_THROWS_WITH_AS(read_trajectory_csv(path),
                       doctest::Contains("bad trajectory value at line 5"),
                       std::runtime_error);

  write_trajectory_csv(path, rows);
  {
    std::ofstream out(path, std::ios::app);
    for (int k = 0; k < 24; ++k) out << "1,";
    out << "9\n";
  }
  CHECK_THROWS_WITH_AS(read_trajectory_csv(path),
                       doctest::Contains("too long at line 5"),
                       std::runtime_error);

  CHECK_THROWS_WITH_AS(read_trajectory_csv(temp_path("no_such_traj.csv")),
                       doctest::Contains("cannot open trajectory"),
                       std::runtime_error);
  std::remove(path.c_str());
}
