#pragma once

#include "artdelay/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace artdelay {

// Delayed sampled-data controller
//   u(t) = sum_i K_i y(t_{k - q_i}),  t in [t_k, t_{k+1}),  t_k = k h,
// with q_0 = 0 < q_1 < ... < q_{r-1} integer delays and y(t) = 0 for t < 0.
struct SampledController {
  double h = 0;
  std::vector<int> q;               // q_1 .. q_{r-1}; empty when r = 1
  std::vector<Eigen::MatrixXd> K;   // K_0 .. K_{r-1}, each m x l
  bool ill_conditioned_map = false; // set when cond(V) > 1e12 in map_gains

  int r() const { return static_cast<int>(K.size()); }
  int delay(int i) const { return i == 0 ? 0 : q.at(static_cast<size_t>(i) - 1); }
};

// Delayed sampled-data PID
//   u(t) = kp y(t_k) + ki h sum_{j<k} y(t_j) + kd y(t_{k-q}).
struct SampledPidController {
  double h = 0;
  int q = 0;
  double kp = 0;
  double ki = 0;
  double kd = 0;
  double sigma = 0;  // event-trigger threshold; 0 means periodic transmission
};

// Gain transformation matrix M = V kron I_l with V_ij = (-q_i h)^j / j!,
// q_0 = 0, i, j = 0..r-1. q holds q_1..q_{r-1}.
Eigen::MatrixXd build_M(double h, const std::vector<int>& q, int r, int l);

// Map ideal derivative gains to delayed sampled gains:
// [K_0 ... K_{r-1}] = [Kbar_0 ... Kbar_{r-1}] M^{-1}. Sets
// ill_conditioned_map when cond(V) > 1e12 instead of failing.
SampledController map_gains(const DerivativeController& ideal, double h,
                            const std::vector<int>& q);

// Default delays q_i = i * floor(h^{1/r - 1}), i = 1..r-1 (empty for r = 1).
// Throws when h is too large for a positive base delay.
std::vector<int> choose_delays(double h, int r);

// kp = kbar_p + kbar_d/(q h), ki = kbar_i, kd = -kbar_d/(q h).
SampledPidController map_pid_gains(const PidController& ideal, double h, int q,
                                   double sigma = 0.0);

// Default PID delay q = floor(h^{-1/2}); requires 0 < h < 1.
int choose_pid_delay(double h);

// Closed-loop matrix of the delay-free limit, D = A + B [K] M Cbar.
// Equals the ideal closed loop A + B [Kbar] Cbar up to rounding.
Eigen::MatrixXd closed_loop_matrix(const LtiPlant& plant, const SampledController& ctrl);

}  // namespace artdelay
