#pragma once

#include <string>

#include <Eigen/Core>

namespace skate {

// Wheel yaw installation angles. Each angle is the deviation of a wheel's
// rolling axis from the body x-axis, in radians, limited to [-pi/2, pi/2]
// (an axis at psi and psi + pi roll identically).
struct DesignVector {
  double psi_fr = 0.0;
  double psi_fl = 0.0;
  double psi_rr = 0.0;
  double psi_rl = 0.0;

  Eigen::Vector4d angles() const { return {psi_fr, psi_fl, psi_rr, psi_rl}; }
  double angle(int leg) const;  // leg order FR, FL, RR, RL
};

// Symmetry couplings that shrink the search dimension.
//   Coupled1D:   (psi_fr, psi_fl, psi_rr, psi_rl) = (-psi, psi, psi, -psi)
//   Symmetric2D: psi_fr = -psi_fl, psi_rr = -psi_rl, free = (psi_front, psi_rear)
//   Full4D:      all four angles free
enum class CouplingMode { Coupled1D, Symmetric2D, Full4D };

constexpr double kAngleLimit = 1.5707963267948966;  // pi/2

int free_dimension(CouplingMode mode);
std::string to_string(CouplingMode mode);
CouplingMode coupling_mode_from_string(const std::string& name);

// Throws std::invalid_argument naming the offending component when an angle
// leaves [-pi/2, pi/2].
DesignVector expand_design(const Eigen::VectorXd& reduced, CouplingMode mode);

// Reads the free coordinates back out of a full design.
Eigen::VectorXd reduce_design(const DesignVector& design, CouplingMode mode);

// Affine map of [-pi/2, pi/2] onto [0, 1] per coordinate, and its inverse.
Eigen::VectorXd to_unit_cube(const Eigen::VectorXd& reduced, CouplingMode mode);
Eigen::VectorXd from_unit_cube(const Eigen::VectorXd& unit, CouplingMode mode);

// Sagittal reflection: swap left/right legs and negate every angle.
DesignVector mirror_design(const DesignVector& design);

}  // namespace skate
