#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "skate/design_space.hpp"
#include "skate/rng.hpp"

using namespace skate;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Eigen::VectorXd vec2d(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("free dimension per mode") {
  CHECK(free_dimension(CouplingMode::Coupled1D) == 1);
  CHECK(free_dimension(CouplingMode::Symmetric2D) == 2);
  CHECK(free_dimension(CouplingMode::Full4D) == 4);
}

TEST_CASE("mode name round trip") {
  for (auto mode : {CouplingMode::Coupled1D, CouplingMode::Symmetric2D,
                    CouplingMode::Full4D}) {
    CHECK(coupling_mode_from_string(to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(coupling_mode_from_string("diagonal3d"), std::invalid_argument);
}

TEST_CASE("coupled expansion follows the (-psi, psi, psi, -psi) pattern") {
  DesignVector d = expand_design(vec1(0.5236), CouplingMode::Coupled1D);
  CHECK(d.psi_fr == doctest::Approx(-0.5236).epsilon(1e-15));
  CHECK(d.psi_fl == doctest::Approx(0.5236).epsilon(1e-15));
  CHECK(d.psi_rr == doctest::Approx(0.5236).epsilon(1e-15));
  CHECK(d.psi_rl == doctest::Approx(-0.5236).epsilon(1e-15));
}

TEST_CASE("zero expands to zero") {
  DesignVector d = expand_design(vec1(0.0), CouplingMode::Coupled1D);
  CHECK(d.angles().isZero(0.0));
}

TEST_CASE("symmetric expansion negates the right side") {
  DesignVector d = expand_design(vec2d(0.3, -0.2), CouplingMode::Symmetric2D);
  CHECK(d.psi_fr == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(d.psi_fl == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(d.psi_rr == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(d.psi_rl == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("full mode is the identity") {
  Eigen::VectorXd r(4);
  r << 0.1, -0.2, 0.3, -0.4;
  DesignVector d = expand_design(r, CouplingMode::Full4D);
  CHECK((d.angles() - r).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("out-of-bounds angle is rejected with the component named") {
  Eigen::VectorXd r(4);
  r << 0.0, 0.0, 1.6, 0.0;
  try {
    expand_design(r, CouplingMode::Full4D);
    FAIL("expected throw");
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("expand then reduce is the identity in every mode") {
  Rng rng(7);
  for (auto mode : {CouplingMode::Coupled1D, CouplingMode::Symmetric2D,
                    CouplingMode::Full4D}) {
    const int d = free_dimension(mode);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd r(d);
      for (int i = 0; i < d; ++i) r[i] = rng.uniform(-kAngleLimit, kAngleLimit);
      Eigen::VectorXd back = reduce_design(expand_design(r, mode), mode);
      CHECK((back - r).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("unit cube map hits the documented anchor points") {
  CHECK(to_unit_cube(vec1(-kAngleLimit), CouplingMode::Coupled1D)[0] ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(to_unit_cube(vec1(0.0), CouplingMode::Coupled1D)[0] ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(to_unit_cube(vec1(kAngleLimit / 2.0), CouplingMode::Coupled1D)[0] ==
        doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("unit cube round trip is the identity within 1e-12") {
  Rng rng(11);
  for (auto mode : {CouplingMode::Coupled1D, CouplingMode::Symmetric2D,
                    CouplingMode::Full4D}) {
    const int d = free_dimension(mode);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd r(d);
      for (int i = 0; i < d; ++i) r[i] = rng.uniform(-kAngleLimit, kAngleLimit);
      Eigen::VectorXd back =
          from_unit_cube(to_unit_cube(r, mode), mode);
      CHECK((back - r).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::VectorXd u(d);
      for (int i = 0; i < d; ++i) u[i] = rng.uniform01();
      Eigen::VectorXd u_back = to_unit_cube(from_unit_cube(u, mode), mode);
      CHECK((u_back - u).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("coupled and symmetric designs are mirror invariant") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    DesignVector c = expand_design(vec1(rng.uniform(-kAngleLimit, kAngleLimit)),
                                   CouplingMode::Coupled1D);
    DesignVector cm = mirror_design(c);
    CHECK((cm.angles() - c.angles()).cwiseAbs().maxCoeff() == 0.0);

    DesignVector s = expand_design(
        vec2d(rng.uniform(-kAngleLimit, kAngleLimit),
              rng.uniform(-kAngleLimit, kAngleLimit)),
        CouplingMode::Symmetric2D);
    DesignVector sm = mirror_design(s);
    CHECK((sm.angles() - s.angles()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("mirror is an involution on full designs") {
  Eigen::VectorXd r(4);
  r << 0.1, -0.2, 0.3, -0.4;
  DesignVector d = expand_design(r, CouplingMode::Full4D);
  DesignVector dd = mirror_design(mirror_design(d));
  CHECK((dd.angles() - d.angles()).cwiseAbs().maxCoeff() == 0.0);
}
