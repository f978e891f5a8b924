#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace artdelay {

// LTI plant x' = Ax + Bu, y = Cx. Construction validates dimensions;
// treat instances as immutable after creation.
struct LtiPlant {
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x m
  Eigen::MatrixXd C;  // l x n

  LtiPlant(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_);

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int l() const { return static_cast<int>(C.rows()); }
};

// Second-order SISO plant y'' + a1 y' + a2 y = b u.
struct PidPlant {
  double a1 = 0;
  double a2 = 0;
  double b = 0;

  PidPlant(double a1_, double a2_, double b_);
};

// Ideal derivative-dependent state feedback u = sum_i Kbar_i y^(i).
// K[i] is m x l; K.size() = r.
struct DerivativeController {
  std::vector<Eigen::MatrixXd> K;

  explicit DerivativeController(std::vector<Eigen::MatrixXd> K_);

  int r() const { return static_cast<int>(K.size()); }
};

// Ideal PID gains u = kp y + ki int y + kd y'.
struct PidController {
  double kp = 0;
  double ki = 0;
  double kd = 0;
};

// Smallest r >= 1 with C A^(r-1) B != 0 while C A^i B = 0 for i < r-1,
// testing entrywise against tol_i = 1e-9 (1 + ||C|| ||A||^i ||B||) (Frobenius).
// Returns nullopt when no such r <= r_max exists. Throws std::runtime_error
// when a Markov parameter falls in the ambiguous band (tol_i, 10 tol_i).
std::optional<int> relative_degree(const LtiPlant& plant, int r_max);

// Rows C; CA; ...; CA^(r-1), stacked (r*l x n). For a plant with relative
// degree >= r these are the output derivative maps: y^(i) = C A^i x.
Eigen::MatrixXd stacked_output_map(const LtiPlant& plant, int r);

// Decay rate of x' = Mx: -max_i Re(lambda_i(M)). Positive iff Hurwitz.
double decay_rate(const Eigen::MatrixXd& closed_loop);

// Ideal closed loop D = A + B [Kbar_0 ... Kbar_{r-1}] Cbar.
Eigen::MatrixXd ideal_closed_loop(const LtiPlant& plant, const DerivativeController& ctrl);

// Ideal PID closed loop in the (y, y', int y) coordinates.
Eigen::MatrixXd pid_ideal_closed_loop(const PidPlant& plant, const PidController& ctrl);

}  // namespace artdelay
