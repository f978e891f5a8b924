#pragma once

#include "artdelay/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fixtures {

// Triple integrator y''' = u with position measurement.
inline artdelay::LtiPlant triple_integrator() {
  Eigen::MatrixXd A(3, 3), B(3, 1), C(1, 3);
  A << 0, 1, 0, 0, 0, 1, 0, 0, 0;
  B << 0, 0, 1;
  C << 1, 0, 0;
  return {A, B, C};
}

inline artdelay::DerivativeController triple_integrator_gains() {
  std::vector<Eigen::MatrixXd> K(3);
  K[0] = Eigen::MatrixXd::Constant(1, 1, -2e-4);
  K[1] = Eigen::MatrixXd::Constant(1, 1, -0.06);
  K[2] = Eigen::MatrixXd::Constant(1, 1, -0.342);
  return artdelay::DerivativeController(K);
}

inline artdelay::PidPlant servo() { return {8.4, 0.0, 35.71}; }

inline artdelay::PidController servo_gains() { return {-10.0, -40.0, -0.65}; }

}  // namespace fixtures
