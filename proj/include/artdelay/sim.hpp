#pragma once

#include "artdelay/lmi.hpp"
#include "artdelay/model.hpp"
#include "artdelay/synthesis.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace artdelay {

// Closed-loop trajectory on the sampling grid t_k = k h, k = 0..K with
// K = floor(T/h), plus an optional dense sub-grid used for Lyapunov
// quadrature. States on the grid are exact zero-order-hold propagations and
// do not depend on the dense resolution.
struct SimTrace {
  double h = 0;
  std::vector<double> t;                 // size K+1
  std::vector<Eigen::VectorXd> x;        // plant state at t_k
  std::vector<Eigen::VectorXd> u;        // input held on [t_k, t_{k+1})
  std::vector<std::uint8_t> transmitted; // 1 when a new value reached the actuator at t_k

  // dense sub-grid: per interval k < K, points t_k + j h/G, j = 0..G-1
  int dense_per_step = 0;
  std::vector<Eigen::VectorXd> dense_x;

  // PID runs only: running sum S_k = h * sum_{j<k} y_j, size K+1
  std::vector<double> integral;

  int samples() const { return static_cast<int>(t.size()); }
  int transmissions() const;
};

struct EventLog {
  double sigma = 0;
  int samples = 0;                 // sensor-to-controller messages
  int transmissions = 0;           // controller-to-actuator messages
  std::vector<std::uint8_t> fired;

  nlohmann::json to_json() const;
};

// Periodic delayed sampled-data loop. y(t) = 0 for t < 0; every sample is
// transmitted.
SimTrace simulate_sampled(const LtiPlant& plant, const SampledController& ctrl,
                          const Eigen::VectorXd& x0, double T,
                          int dense_per_step = 0);

// Event-triggered loop: u(t_k) is transmitted when
// (u_k - uhat_{k-1})^T Omega (u_k - uhat_{k-1}) > sigma u_k^T Omega u_k,
// with the first sample always transmitted. Omega from the certificate (any
// positive definite matrix gives the same events when m = 1).
std::pair<SimTrace, EventLog> simulate_event_triggered(
    const LtiPlant& plant, const SampledController& ctrl, double sigma,
    const Eigen::MatrixXd& Omega, const Eigen::VectorXd& x0, double T,
    int dense_per_step = 0);

// Sampled PID loop for PidPlant, x0 = (y(0), y'(0)). ctrl.sigma > 0 enables
// the scalar event trigger (u_k - uhat_{k-1})^2 > sigma u_k^2.
std::pair<SimTrace, EventLog> simulate_pid(const PidPlant& plant,
                                           const SampledPidController& ctrl,
                                           const Eigen::Vector2d& x0, double T,
                                           int dense_per_step = 0);

// Least-squares slope of -log ||x(t_k)|| over the trailing fraction of the
// horizon. Returns +inf when the tail norms underflow (below 1e-300).
double estimate_decay_rate(const SimTrace& trace, double tail_fraction = 0.5);

// Lyapunov functional evaluated at the sampling instants t_k from certificate
// variables. The time-window terms vanishing at t_k (the current-interval
// sampling-error term, and the PID reset term) are omitted identically zero.
//
// max_relative_increase covers k >= first_covered, the first instant whose
// delay windows lie fully inside [0, t_k]. Earlier instants are excluded:
// with the zero-pre-history convention the output jumps at t = 0, the
// windowed terms fill up from empty, and the certified decay argument only
// applies once every window is covered.
struct LyapunovDiagnostic {
  std::vector<double> t;
  std::vector<double> V;
  std::vector<double> V_state;    // x^T P x
  std::vector<double> V_delta;    // delayed sampling-error windows
  std::vector<double> V_kappa;    // delayed derivative windows
  bool grid_warning = false;      // half-resolution quadrature moved V by > 1%
  int first_covered = 0;          // index of the first fully-covered instant
  double max_relative_increase = 0;  // of exp(2 alpha t_k) V(t_k), k >= first_covered

  bool monotone(double slack = 1e-6) const { return max_relative_increase <= slack; }
};

LyapunovDiagnostic evaluate_lyapunov(const LtiPlant& plant,
                                     const SampledController& ctrl,
                                     const SimTrace& trace,
                                     const Assignment& certificate,
                                     double alpha);

LyapunovDiagnostic evaluate_lyapunov_pid(const PidPlant& plant,
                                         const SampledPidController& ctrl,
                                         const SimTrace& trace,
                                         const Assignment& certificate,
                                         double alpha);

// CSV with header k,t,x1..xn,u,transmitted,V ; V column blank when absent.
std::string trace_to_csv(const SimTrace& trace,
                         const std::vector<double>* V = nullptr);

// Samples 10 initial conditions with entries uniform on [-1, 1] from a fixed
// integer seed; deterministic across platforms.
std::vector<Eigen::VectorXd> seeded_initial_conditions(std::uint64_t seed,
                                                       int dim, int count = 10);

}  // namespace artdelay
