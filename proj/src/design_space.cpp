#include "skate/design_space.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace skate {

namespace {

void check_angle(double value, const char* name) {
  if (!(std::abs(value) <= kAngleLimit)) {
    std::ostringstream msg;
    msg << "design angle " << name << " = " << value
        << " rad outside [-pi/2, pi/2]";
    throw std::invalid_argument(msg.str());
  }
}

const std::array<const char*, 4> kFullNames = {"psi_fr", "psi_fl", "psi_rr",
                                               "psi_rl"};
const std::array<const char*, 2> kPairNames = {"psi_front", "psi_rear"};

void check_reduced(const Eigen::VectorXd& reduced, CouplingMode mode) {
  const int d = free_dimension(mode);
  if (reduced.size() != d) {
    std::ostringstream msg;
    msg << "reduced design has " << reduced.size() << " coordinates, mode "
        << to_string(mode) << " needs " << d;
    throw std::invalid_argument(msg.str());
  }
  for (int i = 0; i < d; ++i) {
    const char* name = mode == CouplingMode::Coupled1D ? "psi"
                       : mode == CouplingMode::Symmetric2D
                           ? kPairNames[static_cast<size_t>(i)]
                           : kFullNames[static_cast<size_t>(i)];
    check_angle(reduced[i], name);
  }
}

}  // namespace

double DesignVector::angle(int leg) const {
  switch (leg) {
    case 0: return psi_fr;
    case 1: return psi_fl;
    case 2: return psi_rr;
    case 3: return psi_rl;
    default: throw std::invalid_argument("leg index out of range");
  }
}

int free_dimension(CouplingMode mode) {
  switch (mode) {
    case CouplingMode::Coupled1D: return 1;
    case CouplingMode::Symmetric2D: return 2;
    case CouplingMode::Full4D: return 4;
  }
  return 0;
}

std::string to_string(CouplingMode mode) {
  switch (mode) {
    case CouplingMode::Coupled1D: return "coupled1d";
    case CouplingMode::Symmetric2D: return "symmetric2d";
    case CouplingMode::Full4D: return "full4d";
  }
  return "?";
}

CouplingMode coupling_mode_from_string(const std::string& name) {
  if (name == "coupled1d") return CouplingMode::Coupled1D;
  if (name == "symmetric2d") return CouplingMode::Symmetric2D;
  if (name == "full4d") return CouplingMode::Full4D;
  throw std::invalid_argument("unknown coupling mode '" + name +
                              "' (expected coupled1d|symmetric2d|full4d)");
}

DesignVector expand_design(const Eigen::VectorXd& reduced, CouplingMode mode) {
  check_reduced(reduced, mode);
  DesignVector d;
  switch (mode) {
    case CouplingMode::Coupled1D: {
      const double psi = reduced[0];
      d = {-psi, psi, psi, -psi};
      break;
    }
    case CouplingMode::Symmetric2D: {
      const double front = reduced[0];
      const double rear = reduced[1];
      d = {-front, front, rear, -rear};
      break;
    }
    case CouplingMode::Full4D:
      d = {reduced[0], reduced[1], reduced[2], reduced[3]};
      break;
  }
  return d;
}

Eigen::VectorXd reduce_design(const DesignVector& design, CouplingMode mode) {
  switch (mode) {
    case CouplingMode::Coupled1D: {
      Eigen::VectorXd r(1);
      r << design.psi_fl;
      return r;
    }
    case CouplingMode::Symmetric2D: {
      Eigen::VectorXd r(2);
      r << design.psi_fl, design.psi_rr;
      return r;
    }
    case CouplingMode::Full4D:
      return design.angles();
  }
  return {};
}

Eigen::VectorXd to_unit_cube(const Eigen::VectorXd& reduced,
                             CouplingMode mode) {
  check_reduced(reduced, mode);
  return (reduced.array() + kAngleLimit) / (2.0 * kAngleLimit);
}

Eigen::VectorXd from_unit_cube(const Eigen::VectorXd& unit, CouplingMode mode) {
  const int d = free_dimension(mode);
  if (unit.size() != d) {
    throw std::invalid_argument("unit-cube point dimension mismatch");
  }
  Eigen::VectorXd reduced = unit.array() * (2.0 * kAngleLimit) - kAngleLimit;
  check_reduced(reduced, mode);
  return reduced;
}

DesignVector mirror_design(const DesignVector& design) {
  return {-design.psi_fl, -design.psi_fr, -design.psi_rl, -design.psi_rr};
}

}  // namespace skate
