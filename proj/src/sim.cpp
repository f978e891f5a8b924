#include "artdelay/sim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

namespace artdelay {

namespace {

// Exact zero-order-hold discretization over dt via the augmented exponential.
struct Zoh {
  Eigen::MatrixXd Ad, Bd;
};

Zoh make_zoh(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double dt) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A * dt;
  aug.topRightCorner(n, m) = B * dt;
  const Eigen::MatrixXd E = aug.exp();
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

int step_count(double T, double h) {
  if (h <= 0 || T <= 0) throw std::invalid_argument("simulate: need h > 0 and T > 0");
  return static_cast<int>(std::floor(T / h));
}

}  // namespace

int SimTrace::transmissions() const {
  int c = 0;
  for (auto f : transmitted) c += f != 0;
  return c;
}

nlohmann::json EventLog::to_json() const {
  nlohmann::json j;
  j["sigma"] = sigma;
  j["sensor_to_controller"] = samples;
  j["controller_to_actuator"] = transmissions;
  j["fired"] = fired;
  return j;
}

namespace {

// Shared LTI loop; trigger(k, u_candidate, uhat_prev) decides transmission.
template <typename Trigger>
SimTrace run_lti(const LtiPlant& plant, const SampledController& ctrl,
                 const Eigen::VectorXd& x0, double T, int dense_per_step,
                 Trigger&& trigger) {
  if (x0.size() != plant.n())
    throw std::invalid_argument("simulate: x0 dimension does not match plant");
  if (ctrl.K.empty() || ctrl.K[0].rows() != plant.m() || ctrl.K[0].cols() != plant.l())
    throw std::invalid_argument("simulate: gain shape does not match plant");
  const int K = step_count(T, ctrl.h);
  const int r = ctrl.r();
  const Zoh full = make_zoh(plant.A, plant.B, ctrl.h);
  Zoh sub;
  if (dense_per_step > 0) sub = make_zoh(plant.A, plant.B, ctrl.h / dense_per_step);

  SimTrace tr;
  tr.h = ctrl.h;
  tr.dense_per_step = dense_per_step;
  tr.t.resize(static_cast<size_t>(K) + 1);
  tr.x.resize(static_cast<size_t>(K) + 1);
  tr.u.resize(static_cast<size_t>(K) + 1);
  tr.transmitted.resize(static_cast<size_t>(K) + 1);
  if (dense_per_step > 0)
    tr.dense_x.reserve(static_cast<size_t>(K) * static_cast<size_t>(dense_per_step));

  std::vector<Eigen::VectorXd> y(static_cast<size_t>(K) + 1);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd uhat = Eigen::VectorXd::Zero(plant.m());
  for (int k = 0; k <= K; ++k) {
    tr.t[static_cast<size_t>(k)] = k * ctrl.h;
    tr.x[static_cast<size_t>(k)] = x;
    y[static_cast<size_t>(k)] = plant.C * x;

    Eigen::VectorXd u = Eigen::VectorXd::Zero(plant.m());
    for (int i = 0; i < r; ++i) {
      const int j = k - ctrl.delay(i);
      if (j >= 0) u += ctrl.K[static_cast<size_t>(i)] * y[static_cast<size_t>(j)];
    }
    const bool fire = trigger(k, u, uhat);
    if (fire) uhat = u;
    tr.u[static_cast<size_t>(k)] = uhat;
    tr.transmitted[static_cast<size_t>(k)] = fire ? 1 : 0;

    if (k < K) {
      if (dense_per_step > 0) {
        Eigen::VectorXd z = x;
        for (int s = 0; s < dense_per_step; ++s) {
          tr.dense_x.push_back(z);
          z = sub.Ad * z + sub.Bd * uhat;
        }
      }
      x = full.Ad * x + full.Bd * uhat;
    }
  }
  return tr;
}

}  // namespace

SimTrace simulate_sampled(const LtiPlant& plant, const SampledController& ctrl,
                          const Eigen::VectorXd& x0, double T, int dense_per_step) {
  return run_lti(plant, ctrl, x0, T, dense_per_step,
                 [](int, const Eigen::VectorXd&, const Eigen::VectorXd&) { return true; });
}

std::pair<SimTrace, EventLog> simulate_event_triggered(
    const LtiPlant& plant, const SampledController& ctrl, double sigma,
    const Eigen::MatrixXd& Omega, const Eigen::VectorXd& x0, double T,
    int dense_per_step) {
  if (sigma < 0 || sigma >= 1)
    throw std::invalid_argument("simulate_event_triggered: sigma must lie in [0, 1)");
  Eigen::MatrixXd Om = Omega;
  if (Om.size() == 0) Om = Eigen::MatrixXd::Identity(plant.m(), plant.m());
  if (Om.rows() != plant.m() || Om.cols() != plant.m())
    throw std::invalid_argument("simulate_event_triggered: Omega must be m x m");

  auto trigger = [&](int k, const Eigen::VectorXd& u, const Eigen::VectorXd& uhat) {
    if (k == 0) return true;
    const Eigen::VectorXd e = u - uhat;
    const double lhs = e.dot(Om * e);
    const double rhs = sigma * u.dot(Om * u);
    return lhs > rhs;
  };
  SimTrace tr = run_lti(plant, ctrl, x0, T, dense_per_step, trigger);
  EventLog log;
  log.sigma = sigma;
  log.samples = tr.samples();
  log.transmissions = tr.transmissions();
  log.fired = tr.transmitted;
  return {std::move(tr), std::move(log)};
}

std::pair<SimTrace, EventLog> simulate_pid(const PidPlant& plant,
                                           const SampledPidController& ctrl,
                                           const Eigen::Vector2d& x0, double T,
                                           int dense_per_step) {
  if (ctrl.q < 1) throw std::invalid_argument("simulate_pid: q must be >= 1");
  const int K = step_count(T, ctrl.h);
  Eigen::Matrix2d A;
  A << 0, 1, -plant.a2, -plant.a1;
  Eigen::Vector2d B(0, plant.b);
  const Zoh full = make_zoh(A, B, ctrl.h);
  Zoh sub;
  if (dense_per_step > 0) sub = make_zoh(A, B, ctrl.h / dense_per_step);

  SimTrace tr;
  tr.h = ctrl.h;
  tr.dense_per_step = dense_per_step;
  tr.t.resize(static_cast<size_t>(K) + 1);
  tr.x.resize(static_cast<size_t>(K) + 1);
  tr.u.resize(static_cast<size_t>(K) + 1);
  tr.transmitted.resize(static_cast<size_t>(K) + 1);
  tr.integral.resize(static_cast<size_t>(K) + 1);
  if (dense_per_step > 0)
    tr.dense_x.reserve(static_cast<size_t>(K) * static_cast<size_t>(dense_per_step));

  std::vector<double> y(static_cast<size_t>(K) + 1);
  Eigen::Vector2d x = x0;
  double S = 0;       // h * sum_{j<k} y_j
  double uhat = 0;
  for (int k = 0; k <= K; ++k) {
    tr.t[static_cast<size_t>(k)] = k * ctrl.h;
    tr.x[static_cast<size_t>(k)] = x;
    tr.integral[static_cast<size_t>(k)] = S;
    y[static_cast<size_t>(k)] = x(0);

    const double ydel = (k - ctrl.q >= 0) ? y[static_cast<size_t>(k - ctrl.q)] : 0.0;
    const double u = ctrl.kp * y[static_cast<size_t>(k)] + ctrl.ki * S + ctrl.kd * ydel;
    bool fire = true;
    if (ctrl.sigma > 0 && k > 0) {
      const double e = u - uhat;
      fire = e * e > ctrl.sigma * u * u;
    }
    if (fire) uhat = u;
    tr.u[static_cast<size_t>(k)] = Eigen::VectorXd::Constant(1, uhat);
    tr.transmitted[static_cast<size_t>(k)] = fire ? 1 : 0;

    if (k < K) {
      if (dense_per_step > 0) {
        Eigen::Vector2d z = x;
        for (int s = 0; s < dense_per_step; ++s) {
          tr.dense_x.push_back(z);
          z = sub.Ad * z + sub.Bd * uhat;
        }
      }
      x = full.Ad * x + full.Bd * uhat;
      S += ctrl.h * y[static_cast<size_t>(k)];
    }
  }

  EventLog log;
  log.sigma = ctrl.sigma;
  log.samples = tr.samples();
  log.transmissions = tr.transmissions();
  log.fired = tr.transmitted;
  return {std::move(tr), std::move(log)};
}

double estimate_decay_rate(const SimTrace& trace, double tail_fraction) {
  if (tail_fraction <= 0 || tail_fraction > 1)
    throw std::invalid_argument("estimate_decay_rate: tail_fraction must lie in (0, 1]");
  const int K = trace.samples();
  const int k0 = static_cast<int>(std::floor((K - 1) * (1.0 - tail_fraction)));
  if (K - k0 < 2) throw std::invalid_argument("estimate_decay_rate: too few samples");

  double st = 0, sl = 0, stt = 0, stl = 0;
  int cnt = 0;
  for (int k = k0; k < K; ++k) {
    const double nrm = trace.x[static_cast<size_t>(k)].norm();
    if (nrm <= 1e-300) return std::numeric_limits<double>::infinity();
    const double tk = trace.t[static_cast<size_t>(k)];
    const double lk = std::log(nrm);
    st += tk;
    sl += lk;
    stt += tk * tk;
    stl += tk * lk;
    ++cnt;
  }
  const double denom = cnt * stt - st * st;
  if (denom == 0) throw std::invalid_argument("estimate_decay_rate: degenerate time grid");
  const double slope = (cnt * stl - st * sl) / denom;
  return -slope;
}

namespace {

// Windowed exponentially weighted quadrature shared by both Lyapunov
// evaluators. vals[i][node] holds the integrand for channel i at the global
// dense node; kernel_pow = 0 gives the plain weight, otherwise the window
// kernel (s - t_k + q_i h)^kernel_pow is applied.
struct WindowSpec {
  int q = 0;            // window length in sampling intervals
  double outer = 1;     // constant factor
  int kernel_pow = 0;
};

std::vector<double> window_integrals(const std::vector<std::vector<double>>& vals,
                                     const std::vector<WindowSpec>& spec, int K,
                                     int G, double h, double alpha, int stride) {
  const double sub = h / G;
  int qmax = 0;
  for (const auto& s : spec) qmax = std::max(qmax, s.q);
  std::vector<double> e1(static_cast<size_t>(qmax) + 1);
  for (int d = 0; d <= qmax; ++d) e1[static_cast<size_t>(d)] = std::exp(-2.0 * alpha * d * h);
  std::vector<double> e2(static_cast<size_t>(G) + 1);
  for (int i = 0; i <= G; ++i) e2[static_cast<size_t>(i)] = std::exp(2.0 * alpha * i * sub);

  std::vector<double> out(static_cast<size_t>(K) + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    double acc = 0;
    for (size_t c = 0; c < spec.size(); ++c) {
      const auto& sp = spec[c];
      const auto& v = vals[c];
      double channel = 0;
      for (int d = 1; d <= sp.q; ++d) {  // interval j = k - d
        const int j = k - d;
        if (j < 0) break;                // y(t) = 0 before t = 0
        const size_t base = static_cast<size_t>(j) * static_cast<size_t>(G + 1);
        double itg = 0;
        for (int i = 0; i <= G; i += stride) {
          double w = e1[static_cast<size_t>(d)] * e2[static_cast<size_t>(i)];
          if (sp.kernel_pow > 0) {
            const double arg = (sp.q - d) * h + i * sub;
            double p = 1;
            for (int e = 0; e < sp.kernel_pow; ++e) p *= arg;
            w *= p;
          }
          const double f = w * v[base + static_cast<size_t>(i)];
          itg += (i == 0 || i == G) ? 0.5 * f : f;
        }
        channel += itg * sub * stride;
      }
      acc += sp.outer * channel;
    }
    out[static_cast<size_t>(k)] = acc;
  }
  return out;
}

void finish_diag(LyapunovDiagnostic& d, const std::vector<double>& Vh, double alpha,
                 int q_max) {
  const size_t K1 = d.V.size();
  for (size_t k = 0; k < K1; ++k) {
    const double v = d.V[k];
    const double rel = std::abs(Vh[k] - v) / std::max(std::abs(v), 1e-300);
    if (rel > 0.01) d.grid_warning = true;
  }
  d.first_covered = static_cast<int>(std::min<size_t>(static_cast<size_t>(q_max), K1));
  double worst = 0;
  for (size_t k = static_cast<size_t>(d.first_covered); k + 1 < K1; ++k) {
    const double a = std::exp(2.0 * alpha * d.t[k]) * d.V[k];
    const double b = std::exp(2.0 * alpha * d.t[k + 1]) * d.V[k + 1];
    const double inc = (b - a) / std::max(std::max(a, b), 1e-300);
    worst = std::max(worst, inc);
  }
  d.max_relative_increase = worst;
}

}  // namespace

LyapunovDiagnostic evaluate_lyapunov(const LtiPlant& plant,
                                     const SampledController& ctrl,
                                     const SimTrace& trace,
                                     const Assignment& certificate, double alpha) {
  const int G = trace.dense_per_step;
  if (G < 2 || G % 2 != 0)
    throw std::invalid_argument(
        "evaluate_lyapunov: trace needs an even dense_per_step >= 2");
  const int K = trace.samples() - 1;
  const int r = ctrl.r();
  const Eigen::MatrixXd& P = certificate.at("P");

  // derivative maps: y' = CA x, y^(r) = C A^r x + C A^{r-1} B u
  const Eigen::MatrixXd CA = plant.C * plant.A;
  Eigen::MatrixXd CArm1 = plant.C;
  for (int i = 0; i + 1 < r; ++i) CArm1 = CArm1 * plant.A;
  const Eigen::MatrixXd CAr = CArm1 * plant.A;
  const Eigen::MatrixXd CArm1B = CArm1 * plant.B;

  // per-channel integrands on the dense grid, interval-wise with both ends
  const int nodes = G + 1;
  std::vector<std::vector<double>> gvals(static_cast<size_t>(r) - 1),
      cvals(static_cast<size_t>(r) - 1);
  for (auto& v : gvals) v.resize(static_cast<size_t>(K) * static_cast<size_t>(nodes));
  for (auto& v : cvals) v.resize(static_cast<size_t>(K) * static_cast<size_t>(nodes));

  for (int j = 0; j < K; ++j) {
    const Eigen::VectorXd& uj = trace.u[static_cast<size_t>(j)];
    for (int i = 0; i <= G; ++i) {
      const Eigen::VectorXd& z =
          (i < G) ? trace.dense_x[static_cast<size_t>(j) * static_cast<size_t>(G) +
                                  static_cast<size_t>(i)]
                  : trace.x[static_cast<size_t>(j) + 1];
      const Eigen::VectorXd ydot = CA * z;
      const Eigen::VectorXd yr = CAr * z + CArm1B * uj;
      for (int c = 1; c < r; ++c) {
        const Eigen::VectorXd gd = ctrl.K[static_cast<size_t>(c)] * ydot;
        const Eigen::VectorXd cd = ctrl.K[static_cast<size_t>(c)] * yr;
        const auto& Wc = certificate.at("W" + std::to_string(c));
        const auto& Rc = certificate.at("R" + std::to_string(c));
        const size_t idx =
            static_cast<size_t>(j) * static_cast<size_t>(nodes) + static_cast<size_t>(i);
        gvals[static_cast<size_t>(c) - 1][idx] = gd.dot(Wc * gd);
        cvals[static_cast<size_t>(c) - 1][idx] = cd.dot(Rc * cd);
      }
    }
  }

  std::vector<WindowSpec> gspec, cspec;
  const double hfac = ctrl.h * ctrl.h * std::exp(2.0 * alpha * ctrl.h);
  for (int c = 1; c < r; ++c) {
    gspec.push_back({ctrl.delay(c), hfac, 0});
    cspec.push_back({ctrl.delay(c), 1.0, r});
  }

  LyapunovDiagnostic d;
  d.t = trace.t;
  d.V_delta = window_integrals(gvals, gspec, K, G, ctrl.h, alpha, 1);
  d.V_kappa = window_integrals(cvals, cspec, K, G, ctrl.h, alpha, 1);
  const std::vector<double> half_d = window_integrals(gvals, gspec, K, G, ctrl.h, alpha, 2);
  const std::vector<double> half_k = window_integrals(cvals, cspec, K, G, ctrl.h, alpha, 2);

  d.V_state.resize(static_cast<size_t>(K) + 1);
  d.V.resize(static_cast<size_t>(K) + 1);
  std::vector<double> Vh(static_cast<size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) {
    const auto ku = static_cast<size_t>(k);
    const Eigen::VectorXd& xk = trace.x[ku];
    d.V_state[ku] = xk.dot(P * xk);
    d.V[ku] = d.V_state[ku] + d.V_delta[ku] + d.V_kappa[ku];
    Vh[ku] = d.V_state[ku] + half_d[ku] + half_k[ku];
  }
  finish_diag(d, Vh, alpha, ctrl.delay(r - 1));
  return d;
}

LyapunovDiagnostic evaluate_lyapunov_pid(const PidPlant& plant,
                                         const SampledPidController& ctrl,
                                         const SimTrace& trace,
                                         const Assignment& certificate,
                                         double alpha) {
  const int G = trace.dense_per_step;
  if (G < 2 || G % 2 != 0)
    throw std::invalid_argument(
        "evaluate_lyapunov_pid: trace needs an even dense_per_step >= 2");
  if (trace.integral.size() != trace.t.size())
    throw std::invalid_argument("evaluate_lyapunov_pid: trace lacks the integral channel");
  const int K = trace.samples() - 1;
  const Eigen::MatrixXd& P = certificate.at("P");
  const double W = certificate.at("W")(0, 0);
  const double R = certificate.at("R")(0, 0);
  const double kd2 = ctrl.kd * ctrl.kd;

  const int nodes = G + 1;
  std::vector<std::vector<double>> gvals(1), cvals(1);
  gvals[0].resize(static_cast<size_t>(K) * static_cast<size_t>(nodes));
  cvals[0].resize(static_cast<size_t>(K) * static_cast<size_t>(nodes));
  for (int j = 0; j < K; ++j) {
    const double uj = trace.u[static_cast<size_t>(j)](0);
    for (int i = 0; i <= G; ++i) {
      const Eigen::VectorXd& z =
          (i < G) ? trace.dense_x[static_cast<size_t>(j) * static_cast<size_t>(G) +
                                  static_cast<size_t>(i)]
                  : trace.x[static_cast<size_t>(j) + 1];
      const double ydot = z(1);
      const double yddot = -plant.a1 * z(1) - plant.a2 * z(0) + plant.b * uj;
      const size_t idx =
          static_cast<size_t>(j) * static_cast<size_t>(nodes) + static_cast<size_t>(i);
      gvals[0][idx] = ydot * ydot;
      cvals[0][idx] = yddot * yddot;
    }
  }

  const double hfac = W * kd2 * ctrl.h * ctrl.h * std::exp(2.0 * alpha * ctrl.h);
  std::vector<WindowSpec> gspec{{ctrl.q, hfac, 0}};
  std::vector<WindowSpec> cspec{{ctrl.q, R * kd2, 2}};

  LyapunovDiagnostic d;
  d.t = trace.t;
  d.V_delta = window_integrals(gvals, gspec, K, G, ctrl.h, alpha, 1);
  d.V_kappa = window_integrals(cvals, cspec, K, G, ctrl.h, alpha, 1);
  const std::vector<double> half_d = window_integrals(gvals, gspec, K, G, ctrl.h, alpha, 2);
  const std::vector<double> half_k = window_integrals(cvals, cspec, K, G, ctrl.h, alpha, 2);

  d.V_state.resize(static_cast<size_t>(K) + 1);
  d.V.resize(static_cast<size_t>(K) + 1);
  std::vector<double> Vh(static_cast<size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) {
    const auto ku = static_cast<size_t>(k);
    Eigen::Vector3d X(trace.x[ku](0), trace.x[ku](1), trace.integral[ku]);
    d.V_state[ku] = X.dot(P * X);
    d.V[ku] = d.V_state[ku] + d.V_delta[ku] + d.V_kappa[ku];
    Vh[ku] = d.V_state[ku] + half_d[ku] + half_k[ku];
  }
  finish_diag(d, Vh, alpha, ctrl.q);
  return d;
}

std::string trace_to_csv(const SimTrace& trace, const std::vector<double>* V) {
  const int n = trace.x.empty() ? 0 : static_cast<int>(trace.x[0].size());
  const int m = trace.u.empty() ? 0 : static_cast<int>(trace.u[0].size());
  std::string out = "k,t";
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  if (m == 1) {
    out += ",u";
  } else {
    for (int i = 1; i <= m; ++i) out += ",u" + std::to_string(i);
  }
  out += ",transmitted,V\n";

  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  };
  for (int k = 0; k < trace.samples(); ++k) {
    const auto ku = static_cast<size_t>(k);
    out += std::to_string(k);
    out += ',';
    put(trace.t[ku]);
    for (int i = 0; i < n; ++i) {
      out += ',';
      put(trace.x[ku](i));
    }
    for (int i = 0; i < m; ++i) {
      out += ',';
      put(trace.u[ku](i));
    }
    out += ',';
    out += std::to_string(static_cast<int>(trace.transmitted[ku]));
    out += ',';
    if (V && ku < V->size()) put((*V)[ku]);
    out += '\n';
  }
  return out;
}

std::vector<Eigen::VectorXd> seeded_initial_conditions(std::uint64_t seed, int dim,
                                                       int count) {
  if (dim < 1 || count < 1)
    throw std::invalid_argument("seeded_initial_conditions: bad dimensions");
  // raw engine output mapped to [-1, 1]; avoids distribution implementations
  // that differ across standard libraries
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<size_t>(count));
  for (int c = 0; c < count; ++c) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v(i) = 2.0 * u - 1.0;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace artdelay
