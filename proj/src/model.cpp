#include "artdelay/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace artdelay {

LtiPlant::LtiPlant(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)) {
  if (A.rows() == 0 || A.rows() != A.cols())
    throw std::invalid_argument("LtiPlant: A must be square and nonempty");
  if (B.rows() != A.rows() || B.cols() == 0)
    throw std::invalid_argument("LtiPlant: B must be n x m with m >= 1");
  if (C.cols() != A.rows() || C.rows() == 0)
    throw std::invalid_argument("LtiPlant: C must be l x n with l >= 1");
}

PidPlant::PidPlant(double a1_, double a2_, double b_) : a1(a1_), a2(a2_), b(b_) {
  if (b == 0.0) throw std::invalid_argument("PidPlant: b must be nonzero");
  if (!std::isfinite(a1) || !std::isfinite(a2) || !std::isfinite(b))
    throw std::invalid_argument("PidPlant: coefficients must be finite");
}

DerivativeController::DerivativeController(std::vector<Eigen::MatrixXd> K_)
    : K(std::move(K_)) {
  if (K.empty()) throw std::invalid_argument("DerivativeController: needs at least one gain");
  for (const auto& Ki : K) {
    if (Ki.rows() != K[0].rows() || Ki.cols() != K[0].cols())
      throw std::invalid_argument("DerivativeController: gain shapes differ");
    if (Ki.size() == 0)
      throw std::invalid_argument("DerivativeController: empty gain");
  }
}

std::optional<int> relative_degree(const LtiPlant& plant, int r_max) {
  if (r_max < 1) throw std::invalid_argument("relative_degree: r_max must be >= 1");
  const double nC = plant.C.norm();
  const double nB = plant.B.norm();
  const double nA = plant.A.norm();
  Eigen::MatrixXd CAi = plant.C;  // C A^i
  double nAi = 1.0;               // ||A||^i
  for (int i = 0; i < r_max; ++i) {
    const double tol = 1e-9 * (1.0 + nC * nAi * nB);
    const double markov = (CAi * plant.B).cwiseAbs().maxCoeff();
    if (markov > 10.0 * tol) return i + 1;
    if (markov > tol)
      throw std::runtime_error(
          "relative_degree: ill-conditioned, Markov parameter " + std::to_string(i) +
          " of magnitude " + std::to_string(markov) + " lies in the ambiguous band (" +
          std::to_string(tol) + ", " + std::to_string(10.0 * tol) + ")");
    CAi = CAi * plant.A;
    nAi *= nA;
  }
  return std::nullopt;
}

Eigen::MatrixXd stacked_output_map(const LtiPlant& plant, int r) {
  if (r < 1) throw std::invalid_argument("stacked_output_map: r must be >= 1");
  const int l = plant.l();
  Eigen::MatrixXd out(r * l, plant.n());
  Eigen::MatrixXd CAi = plant.C;
  for (int i = 0; i < r; ++i) {
    out.middleRows(i * l, l) = CAi;
    if (i + 1 < r) CAi = CAi * plant.A;
  }
  return out;
}

double decay_rate(const Eigen::MatrixXd& closed_loop) {
  if (closed_loop.rows() != closed_loop.cols() || closed_loop.rows() == 0)
    throw std::invalid_argument("decay_rate: matrix must be square and nonempty");
  Eigen::EigenSolver<Eigen::MatrixXd> es(closed_loop, false);
  return -es.eigenvalues().real().maxCoeff();
}

Eigen::MatrixXd ideal_closed_loop(const LtiPlant& plant, const DerivativeController& ctrl) {
  const int r = ctrl.r();
  if (ctrl.K[0].cols() != plant.l() || ctrl.K[0].rows() != plant.m())
    throw std::invalid_argument("ideal_closed_loop: gain shape does not match plant");
  Eigen::MatrixXd Krow(plant.m(), r * plant.l());
  for (int i = 0; i < r; ++i) Krow.middleCols(i * plant.l(), plant.l()) = ctrl.K[i];
  return plant.A + plant.B * Krow * stacked_output_map(plant, r);
}

Eigen::MatrixXd pid_ideal_closed_loop(const PidPlant& plant, const PidController& ctrl) {
  Eigen::Matrix3d D;
  D << 0, 1, 0,
      -plant.a2 + plant.b * ctrl.kp, -plant.a1 + plant.b * ctrl.kd, plant.b * ctrl.ki,
      1, 0, 0;
  return D;
}

}  // namespace artdelay
