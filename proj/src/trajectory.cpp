#include "skate/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skate {

const char* const kTrajectoryHeader =
    "t,x,y,theta,vx,vy,omega,"
    "p_fr_x,p_fr_y,p_fl_x,p_fl_y,p_rr_x,p_rr_y,p_rl_x,p_rl_y,"
    "f_fr_x,f_fr_y,f_fl_x,f_fl_y,f_rr_x,f_rr_y,f_rl_x,f_rl_y,"
    "tau_sq";

TrajectoryRow trajectory_row(double t, const SimState& state,
                             const StepOutcome& outcome) {
  TrajectoryRow row;
  row.t = t;
  row.x = state.x;
  row.y = state.y;
  row.theta = state.heading;
  row.vx = state.vx;
  row.vy = state.vy;
  row.omega = state.yaw_rate;
  for (int i = 0; i < kNumLegs; ++i) {
    row.p[i] = state.leg_offset[i];
    row.f[i] = outcome.contact_force[i];
  }
  row.tau_sq = outcome.tau_sq;
  return row;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("cannot write trajectory: " + path);
  std::fprintf(out, "%s\n", kTrajectoryHeader);
  for (const TrajectoryRow& r : rows) {
    std::fprintf(out, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.x,
                 r.y, r.theta, r.vx, r.vy, r.omega);
    for (int i = 0; i < kNumLegs; ++i) {
      std::fprintf(out, ",%.17g,%.17g", r.p[i].x(), r.p[i].y());
    }
    for (int i = 0; i < kNumLegs; ++i) {
      std::fprintf(out, ",%.17g,%.17g", r.f[i].x(), r.f[i].y());
    }
    std::fprintf(out, ",%.17g\n", r.tau_sq);
  }
  if (std::fclose(out) != 0) {
    throw std::runtime_error("trajectory write failed: " + path);
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw std::runtime_error("trajectory header mismatch in " + path);
  }
  std::vector<TrajectoryRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    double v[24];
    std::string cell;
    for (int k = 0; k < 24; ++k) {
      if (!std::getline(ss, cell, ',')) {
        throw std::runtime_error("trajectory row too short at line " +
                                 std::to_string(line_no));
      }
      try {
        v[k] = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("bad trajectory value at line " +
                                 std::to_string(line_no));
      }
    }
    if (std::getline(ss, cell, ',')) {
      throw std::runtime_error("trajectory row too long at line " +
                               std::to_string(line_no));
    }
    TrajectoryRow r;
    r.t = v[0];
    r.x = v[1];
    r.y = v[2];
    r.theta = v[3];
    r.vx = v[4];
    r.vy = v[5];
    r.omega = v[6];
    for (int i = 0; i < kNumLegs; ++i) {
      r.p[i] = Vec2{v[7 + 2 * i], v[8 + 2 * i]};
      r.f[i] = Vec2{v[15 + 2 * i], v[16 + 2 * i]};
    }
    r.tau_sq = v[23];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace skate
