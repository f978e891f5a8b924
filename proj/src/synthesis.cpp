#include "artdelay/synthesis.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace artdelay {

namespace {

void check_delays(const std::vector<int>& q) {
  int prev = 0;
  for (int qi : q) {
    if (qi <= prev) throw std::invalid_argument("delays must be strictly increasing positive integers");
    prev = qi;
  }
}

// Scalar part V of the gain map, V_ij = (-q_i h)^j / j!, q_0 = 0.
Eigen::MatrixXd vandermonde(double h, const std::vector<int>& q, int r) {
  Eigen::MatrixXd V(r, r);
  for (int i = 0; i < r; ++i) {
    const double tau = -(i == 0 ? 0 : q[static_cast<size_t>(i) - 1]) * h;
    double term = 1.0;  // tau^j / j!
    for (int j = 0; j < r; ++j) {
      V(i, j) = term;
      term *= tau / (j + 1);
    }
  }
  return V;
}

}  // namespace

Eigen::MatrixXd build_M(double h, const std::vector<int>& q, int r, int l) {
  if (h <= 0) throw std::invalid_argument("build_M: h must be positive");
  if (r < 1 || l < 1) throw std::invalid_argument("build_M: r and l must be >= 1");
  if (static_cast<int>(q.size()) != r - 1)
    throw std::invalid_argument("build_M: need r - 1 delays");
  check_delays(q);
  return Eigen::kroneckerProduct(vandermonde(h, q, r),
                                 Eigen::MatrixXd::Identity(l, l));
}

SampledController map_gains(const DerivativeController& ideal, double h,
                            const std::vector<int>& q) {
  const int r = ideal.r();
  if (h <= 0) throw std::invalid_argument("map_gains: h must be positive");
  if (static_cast<int>(q.size()) != r - 1)
    throw std::invalid_argument("map_gains: need r - 1 delays");
  check_delays(q);

  const Eigen::MatrixXd V = vandermonde(h, q, r);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
  const double smin = svd.singularValues().minCoeff();
  const double cond = smin > 0 ? svd.singularValues().maxCoeff() / smin
                               : std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd Vinv = Eigen::PartialPivLU<Eigen::MatrixXd>(V).inverse();

  // [K_0 .. K_{r-1}] = [Kbar_0 .. Kbar_{r-1}] (V^{-1} kron I_l), blockwise:
  // K_j = sum_i Vinv(i, j) Kbar_i.
  SampledController out;
  out.h = h;
  out.q = q;
  out.ill_conditioned_map = cond > 1e12;
  out.K.reserve(static_cast<size_t>(r));
  for (int j = 0; j < r; ++j) {
    Eigen::MatrixXd Kj = Eigen::MatrixXd::Zero(ideal.K[0].rows(), ideal.K[0].cols());
    for (int i = 0; i < r; ++i) Kj += Vinv(i, j) * ideal.K[static_cast<size_t>(i)];
    out.K.push_back(std::move(Kj));
  }
  return out;
}

std::vector<int> choose_delays(double h, int r) {
  if (h <= 0) throw std::invalid_argument("choose_delays: h must be positive");
  if (r < 1) throw std::invalid_argument("choose_delays: r must be >= 1");
  if (r == 1) return {};
  const int base = static_cast<int>(std::floor(std::pow(h, 1.0 / r - 1.0)));
  if (base < 1)
    throw std::invalid_argument("choose_delays: h too large for a positive base delay");
  std::vector<int> q(static_cast<size_t>(r) - 1);
  for (int i = 1; i < r; ++i) q[static_cast<size_t>(i) - 1] = i * base;
  return q;
}

SampledPidController map_pid_gains(const PidController& ideal, double h, int q,
                                   double sigma) {
  if (h <= 0) throw std::invalid_argument("map_pid_gains: h must be positive");
  if (q < 1) throw std::invalid_argument("map_pid_gains: q must be >= 1");
  if (sigma < 0 || sigma >= 1)
    throw std::invalid_argument("map_pid_gains: sigma must lie in [0, 1)");
  SampledPidController out;
  out.h = h;
  out.q = q;
  out.kp = ideal.kp + ideal.kd / (q * h);
  out.ki = ideal.ki;
  out.kd = -ideal.kd / (q * h);
  out.sigma = sigma;
  return out;
}

int choose_pid_delay(double h) {
  if (h <= 0 || h >= 1)
    throw std::invalid_argument("choose_pid_delay: requires 0 < h < 1");
  return static_cast<int>(std::floor(1.0 / std::sqrt(h)));
}

Eigen::MatrixXd closed_loop_matrix(const LtiPlant& plant, const SampledController& ctrl) {
  const int r = ctrl.r();
  const int l = plant.l();
  if (ctrl.K[0].cols() != l || ctrl.K[0].rows() != plant.m())
    throw std::invalid_argument("closed_loop_matrix: gain shape does not match plant");
  Eigen::MatrixXd Krow(plant.m(), r * l);
  for (int i = 0; i < r; ++i) Krow.middleCols(i * l, l) = ctrl.K[static_cast<size_t>(i)];
  const Eigen::MatrixXd M = build_M(ctrl.h, ctrl.q, r, l);
  return plant.A + plant.B * Krow * M * stacked_output_map(plant, r);
}

}  // namespace artdelay
