#include "artdelay/cli.hpp"

#include "artdelay/lmi.hpp"
#include "artdelay/sdp.hpp"
#include "artdelay/search.hpp"
#include "artdelay/sim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace artdelay {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void fail(const std::string& ptr, const std::string& msg) {
  throw ConfigError(ptr, msg);
}

const json& member(const json& obj, const char* key, const std::string& parent) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(parent + "/" + key, "required field is missing");
  return *it;
}

double number_at(const json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) fail(ptr, "must be finite");
  return v;
}

std::int64_t integer_at(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) fail(ptr, "expected an integer");
  return j.get<std::int64_t>();
}

// Matrix: array of equal-length rows. A flat numeric array is a column
// vector; a bare number a 1x1 matrix.
Eigen::MatrixXd matrix_at(const json& j, const std::string& ptr) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, number_at(j, ptr));
  if (!j.is_array() || j.empty()) fail(ptr, "expected a matrix (array of rows) or a number");
  if (j.front().is_number()) {
    Eigen::MatrixXd M(static_cast<int>(j.size()), 1);
    for (int i = 0; i < M.rows(); ++i)
      M(i, 0) = number_at(j[static_cast<size_t>(i)], ptr + "/" + std::to_string(i));
    return M;
  }
  const auto rows = static_cast<int>(j.size());
  int cols = -1;
  Eigen::MatrixXd M;
  for (int i = 0; i < rows; ++i) {
    const json& row = j[static_cast<size_t>(i)];
    const std::string rptr = ptr + "/" + std::to_string(i);
    if (!row.is_array() || row.empty()) fail(rptr, "expected a non-empty row array");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      M.resize(rows, cols);
    } else if (static_cast<int>(row.size()) != cols) {
      fail(rptr, "rows must have equal length");
    }
    for (int c = 0; c < cols; ++c)
      M(i, c) = number_at(row[static_cast<size_t>(c)], rptr + "/" + std::to_string(c));
  }
  return M;
}

Eigen::VectorXd vector_at(const json& j, const std::string& ptr) {
  if (!j.is_array()) fail(ptr, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i)
    v(i) = number_at(j[static_cast<size_t>(i)], ptr + "/" + std::to_string(i));
  return v;
}

std::vector<int> delays_at(const json& j, const std::string& ptr) {
  std::vector<int> q;
  if (j.is_number_integer()) {
    q.push_back(static_cast<int>(integer_at(j, ptr)));
  } else if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i)
      q.push_back(static_cast<int>(integer_at(j[i], ptr + "/" + std::to_string(i))));
  } else {
    fail(ptr, "expected an integer or an array of integers");
  }
  for (size_t i = 0; i < q.size(); ++i) {
    if (q[i] < 1) fail(ptr, "delays must be positive integers");
    if (i > 0 && q[i] <= q[i - 1]) fail(ptr, "delays must be strictly increasing");
  }
  return q;
}

json mat_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& j) { return matrix_at(j, ""); }

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + p.string());
}

void write_json_file(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

const char* status_text(FeasStatus s) {
  switch (s) {
    case FeasStatus::Feasible: return "feasible";
    case FeasStatus::Infeasible: return "infeasible";
    default: return "inconclusive";
  }
}

struct LtiSetup {
  const LtiPlant& plant;
  const DerivativeController& ideal;
  int r;
  std::vector<int> q;
  SampledController ctrl;
};

LtiSetup lti_setup(const RunConfig& cfg) {
  const LtiPlant& plant = *cfg.lti;
  const DerivativeController& ideal = *cfg.lti_gains;
  const int r = ideal.r();
  auto deg = relative_degree(plant, plant.n());
  if (!deg)
    throw std::runtime_error("plant has no relative degree up to n = " +
                             std::to_string(plant.n()));
  if (*deg != r)
    throw std::runtime_error("controller supplies " + std::to_string(r) +
                             " gain blocks but the plant's relative degree is " +
                             std::to_string(*deg));
  std::vector<int> q = cfg.q ? *cfg.q : choose_delays(*cfg.h, r);
  SampledController ctrl = map_gains(ideal, *cfg.h, q);
  return {plant, ideal, r, std::move(q), std::move(ctrl)};
}

int pid_delay(const RunConfig& cfg) {
  return cfg.q ? cfg.q->front() : choose_pid_delay(*cfg.h);
}

json certificate_file_json(json context, const AffineLmi& lmi, const Certificate& cert,
                           const VerifyReport& vr) {
  json f;
  f["context"] = std::move(context);
  f["lmi"] = lmi.to_json();
  f["certificate"] = cert.to_json();
  f["verification"] = {{"pass", vr.pass},
                       {"lambda_max", vr.lambda_max},
                       {"scale", vr.scale}};
  return f;
}

// ---- reproduce helpers ----

struct CheckTable {
  json rows = json::array();
  bool all = true;

  void add(const std::string& name, const std::string& computed,
           const std::string& reference, bool pass) {
    rows.push_back({{"name", name},
                    {"computed", computed},
                    {"reference", reference},
                    {"pass", pass}});
    all = all && pass;
  }
  void add_num(const std::string& name, double computed, double ref, double tol) {
    add(name, fmt(computed), fmt(ref) + " +- " + fmt(tol), std::abs(computed - ref) <= tol);
  }
  void add_band(const std::string& name, double computed, double lo, double hi) {
    add(name, fmt(computed), "[" + fmt(lo) + ", " + fmt(hi) + "]",
        computed >= lo && computed <= hi);
  }
  void add_count(const std::string& name, int computed, int expected) {
    add(name, std::to_string(computed), std::to_string(expected), computed == expected);
  }
  void add_ge(const std::string& name, double computed, double threshold) {
    add(name, fmt(computed), ">= " + fmt(threshold), computed >= threshold);
  }

  void print(std::ostream& os, const std::string& title) const {
    size_t wname = 4, wcomp = 8, wref = 9;
    for (const auto& r : rows) {
      wname = std::max(wname, r["name"].get<std::string>().size());
      wcomp = std::max(wcomp, r["computed"].get<std::string>().size());
      wref = std::max(wref, r["reference"].get<std::string>().size());
    }
    os << title << "\n";
    os << "  " << std::left << std::setw(static_cast<int>(wname)) << "check" << "  "
       << std::setw(static_cast<int>(wcomp)) << "computed" << "  "
       << std::setw(static_cast<int>(wref)) << "reference" << "  result\n";
    for (const auto& r : rows) {
      os << "  " << std::left << std::setw(static_cast<int>(wname))
         << r["name"].get<std::string>() << "  " << std::setw(static_cast<int>(wcomp))
         << r["computed"].get<std::string>() << "  " << std::setw(static_cast<int>(wref))
         << r["reference"].get<std::string>() << "  "
         << (r["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
    }
    os << (all ? "  all checks passed\n" : "  one or more checks FAILED\n");
  }
};

// Solves, verifies, records a table row, and writes the certificate artifact.
// Returns the certificate values when feasible and verified.
std::optional<Assignment> certify_row(CheckTable& table, const std::string& name,
                                      const AffineLmi& lmi, json context,
                                      const fs::path& cert_path) {
  auto outcome = solve_feasibility(lmi);
  if (!outcome.feasible()) {
    table.add(name, std::string(status_text(outcome.status)) +
                        " (lambda bound " + fmt(outcome.best_lambda) + ")",
              "feasible", false);
    return std::nullopt;
  }
  auto vr = verify_certificate(lmi, outcome.certificate->values);
  table.add(name,
            vr.pass ? "feasible, verified"
                    : "feasible, verification FAILED (lambda_max " + fmt(vr.lambda_max) + ")",
            "feasible", vr.pass);
  write_json_file(cert_path,
                  certificate_file_json(std::move(context), lmi, *outcome.certificate, vr));
  if (!vr.pass) return std::nullopt;
  return outcome.certificate->values;
}

json reproduce_triple_integrator(const std::string& out_dir, std::ostream& log) {
  Eigen::MatrixXd A(3, 3), B(3, 1), C(1, 3);
  A << 0, 1, 0, 0, 0, 1, 0, 0, 0;
  B << 0, 0, 1;
  C << 1, 0, 0;
  LtiPlant plant(A, B, C);
  std::vector<Eigen::MatrixXd> Kb(3);
  Kb[0] = Eigen::MatrixXd::Constant(1, 1, -2e-4);
  Kb[1] = Eigen::MatrixXd::Constant(1, 1, -0.06);
  Kb[2] = Eigen::MatrixXd::Constant(1, 1, -0.342);
  DerivativeController ideal(Kb);
  const double alpha = 1e-3;
  const std::vector<int> q{30, 60};
  CheckTable table;

  auto ctrl = map_gains(ideal, 0.044, q);
  table.add_num("K_0 at h=0.044, q=(30,60)", ctrl.K[0](0, 0), -0.265, 1e-3);
  table.add_num("K_1 at h=0.044, q=(30,60)", ctrl.K[1](0, 0), 0.483, 1e-3);
  table.add_num("K_2 at h=0.044, q=(30,60)", ctrl.K[2](0, 0), -0.219, 1e-3);

  auto phi = build_phi(plant, ctrl, alpha);
  certify_row(table, "periodic condition at h=0.044", phi,
              {{"example", "triple-integrator"}, {"h", 0.044}, {"q", q}, {"alpha", alpha}},
              fs::path(out_dir) / "triple-integrator_periodic_certificate.json");

  auto ctrl_e = map_gains(ideal, 0.042, q);
  const double sigma = 2e-3;
  auto phie = build_phi_e(plant, ctrl_e, alpha, sigma);
  auto event_cert = certify_row(
      table, "event condition at h=0.042, sigma=0.002", phie,
      {{"example", "triple-integrator"}, {"h", 0.042}, {"q", q}, {"alpha", alpha}, {"sigma", sigma}},
      fs::path(out_dir) / "triple-integrator_event_certificate.json");

  auto srep = max_sigma(plant, ideal, 0.042, q, alpha, {0.0, 0.05});
  table.add_ge("largest certified sigma at h=0.042", srep.found ? srep.best : 0.0, sigma);

  Eigen::VectorXd x0(3);
  x0 << 1, 1, 1;
  auto trace = simulate_sampled(plant, ctrl, x0, 100.0);
  table.add_count("periodic updates (T=100, h=0.044)", trace.transmissions(), 2273);

  Eigen::MatrixXd Omega = Eigen::MatrixXd::Identity(1, 1);
  if (event_cert) Omega = event_cert->at("Omega");
  double total = 0;
  int event_samples = 0;
  for (const auto& ic : seeded_initial_conditions(42, 3)) {
    auto [tr, ev] = simulate_event_triggered(plant, ctrl_e, sigma, Omega, ic, 100.0);
    total += ev.transmissions;
    event_samples = ev.samples;
  }
  const double mean = total / 10.0;
  table.add_band("mean event transmissions (10 runs)", mean, 364, 547);
  table.add_ge("actuator-network reduction (%)",
               100.0 * (1.0 - mean / event_samples), 75.0);

  table.print(log, "triple-integrator reproduction");
  json rep{{"example", "triple-integrator"}, {"rows", table.rows}, {"ok", table.all}};
  write_json_file(fs::path(out_dir) / "triple-integrator_report.json", rep);
  return rep;
}

json reproduce_pid(const std::string& out_dir, std::ostream& log) {
  PidPlant plant(8.4, 0.0, 35.71);
  PidController ideal{-10.0, -40.0, -0.65};
  const double alpha = 5.0;
  const int q = 7;
  CheckTable table;

  auto c1 = map_pid_gains(ideal, 4.7e-3, q);
  table.add_num("k_p at h=0.0047, q=7", c1.kp, -29.7568, 1e-3);
  table.add_num("k_i at h=0.0047, q=7", c1.ki, -40.0, 1e-3);
  table.add_num("k_d at h=0.0047, q=7", c1.kd, 19.7568, 1e-3);

  auto c2 = map_pid_gains(ideal, 4e-3, q, 9e-3);
  table.add_num("k_p at h=0.004, q=7", c2.kp, -33.2143, 1e-3);
  table.add_num("k_i at h=0.004, q=7", c2.ki, -40.0, 1e-3);
  table.add_num("k_d at h=0.004, q=7", c2.kd, 23.2143, 1e-3);

  table.add_num("ideal closed-loop decay rate",
                decay_rate(pid_ideal_closed_loop(plant, ideal)), 10.4, 0.05);

  auto psi1 = build_psi(plant, c1, alpha);
  certify_row(table, "sampled condition at h=0.0047", psi1,
              {{"example", "pid"}, {"h", 4.7e-3}, {"q", q}, {"alpha", alpha}, {"sigma", 0.0}},
              fs::path(out_dir) / "pid_sampled_certificate.json");

  auto psi2 = build_psi(plant, c2, alpha);
  certify_row(table, "event condition at h=0.004, sigma=0.009", psi2,
              {{"example", "pid"}, {"h", 4e-3}, {"q", q}, {"alpha", alpha}, {"sigma", 9e-3}},
              fs::path(out_dir) / "pid_event_certificate.json");

  auto srep = max_sigma(plant, ideal, 4e-3, q, alpha, {0.0, 0.05});
  table.add_ge("largest certified sigma at h=0.004", srep.found ? srep.best : 0.0, 9e-3);

  auto [trace, ev0] = simulate_pid(plant, c1, Eigen::Vector2d(1, 1), 10.0);
  table.add_count("periodic updates (T=10, h=0.0047)", trace.transmissions(), 2128);

  double total = 0;
  int event_samples = 0;
  for (const auto& ic : seeded_initial_conditions(42, 2)) {
    auto [tr, ev] = simulate_pid(plant, c2, Eigen::Vector2d(ic(0), ic(1)), 10.0);
    total += ev.transmissions;
    event_samples = ev.samples;
  }
  const double mean = total / 10.0;
  table.add_band("mean event transmissions (10 runs)", mean, 503, 754);
  table.add_ge("actuator-network reduction (%)",
               100.0 * (1.0 - mean / event_samples), 65.0);

  table.print(log, "pid reproduction");
  json rep{{"example", "pid"}, {"rows", table.rows}, {"ok", table.all}};
  write_json_file(fs::path(out_dir) / "pid_report.json", rep);
  return rep;
}

// ---- human summaries ----

void print_summary(const json& out, std::ostream& os) {
  const std::string mode = out.value("mode", "");
  if (mode == "analyze") {
    if (out.contains("relative_degree"))
      os << "relative degree: " << out["relative_degree"].get<int>() << "\n";
    os << "condition: " << out.value("status", "?");
    if (out.value("status", "") == "feasible") {
      os << ", lambda_max = " << fmt(out.value("lambda_max", 0.0))
         << (out.value("verified", false) ? " (certificate verified)"
                                          : " (verification FAILED)");
    } else {
      os << ", minimized lambda_max bound " << fmt(out.value("lambda_max_bound", 0.0))
         << " > 0";
    }
    os << "\n";
    if (out.contains("certificate_file"))
      os << "certificate: " << out["certificate_file"].get<std::string>() << "\n";
  } else if (mode == "synthesize") {
    os << "controller written to " << out.value("controller_file", "controller.json") << "\n";
    if (out.contains("delay_free_decay_rate"))
      os << "delay-free closed-loop decay rate: " << fmt(out["delay_free_decay_rate"].get<double>())
         << "\n";
  } else if (mode == "search") {
    if (out.value("found", false)) {
      os << "largest feasible " << out.value("parameter", "?") << " = "
         << fmt(out.value("best", 0.0));
      if (out.contains("best_q") && !out["best_q"].empty()) os << " at q = " << out["best_q"].dump();
      os << " (" << out.value("probes", 0) << " probes)\n";
    } else {
      os << "no feasible " << out.value("parameter", "?") << " in range";
      const std::string msg = out.value("message", "");
      if (!msg.empty()) os << ": " << msg;
      os << "\n";
    }
  } else if (mode == "simulate") {
    os << out["runs"].size() << " run(s), mean transmissions "
       << fmt(out.value("mean_transmissions", 0.0)) << " of " << out.value("samples", 0)
       << " samples";
    if (out.contains("reduction_percent"))
      os << " (" << fmt(out["reduction_percent"].get<double>()) << "% actuator reduction)";
    os << "\n";
    if (out.value("certified", false))
      os << "Lyapunov diagnostics: max relative increase "
         << fmt(out.value("max_relative_increase", 0.0)) << "\n";
    else if (!out.value("certificate_note", std::string()).empty())
      os << out["certificate_note"].get<std::string>() << "\n";
  }
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  if (!j.is_object()) fail("", "top-level config must be an object");

  auto mode_it = j.find("mode");
  if (mode_it == j.end() || !mode_it->is_string())
    fail("/mode", "required: one of analyze, synthesize, search, simulate, reproduce");
  cfg.mode = mode_it->get<std::string>();
  const bool known_mode = cfg.mode == "analyze" || cfg.mode == "synthesize" ||
                          cfg.mode == "search" || cfg.mode == "simulate" ||
                          cfg.mode == "reproduce";
  if (!known_mode) fail("/mode", "unknown mode '" + cfg.mode + "'");
  if (cfg.mode == "reproduce") return cfg;  // built-in data; selected via --example

  auto sys_it = j.find("system");
  if (sys_it == j.end() || !sys_it->is_object()) fail("/system", "required object");
  const json& sys = *sys_it;
  const json& kind_j = member(sys, "kind", "/system");
  const std::string kind = kind_j.is_string() ? kind_j.get<std::string>() : "";
  if (kind == "lti") {
    Eigen::MatrixXd A = matrix_at(member(sys, "A", "/system"), "/system/A");
    Eigen::MatrixXd B = matrix_at(member(sys, "B", "/system"), "/system/B");
    Eigen::MatrixXd C = matrix_at(member(sys, "C", "/system"), "/system/C");
    if (A.rows() != A.cols()) fail("/system/A", "must be square");
    if (B.rows() != A.rows()) fail("/system/B", "row count must match A");
    if (C.cols() != A.cols()) fail("/system/C", "column count must match A");
    cfg.lti.emplace(std::move(A), std::move(B), std::move(C));
  } else if (kind == "pid") {
    const double a1 = number_at(member(sys, "a1", "/system"), "/system/a1");
    const double a2 = number_at(member(sys, "a2", "/system"), "/system/a2");
    const double b = number_at(member(sys, "b", "/system"), "/system/b");
    if (b == 0) fail("/system/b", "must be nonzero");
    cfg.pid.emplace(a1, a2, b);
  } else {
    fail("/system/kind", "expected \"lti\" or \"pid\"");
  }

  auto ctrl_it = j.find("controller");
  if (ctrl_it == j.end() || !ctrl_it->is_object()) fail("/controller", "required object");
  const json& ctl = *ctrl_it;
  if (cfg.lti) {
    const json& gains = member(ctl, "gains", "/controller");
    if (!gains.is_array() || gains.empty())
      fail("/controller/gains", "expected a non-empty array of gain matrices");
    std::vector<Eigen::MatrixXd> K;
    for (size_t i = 0; i < gains.size(); ++i) {
      const std::string ptr = "/controller/gains/" + std::to_string(i);
      Eigen::MatrixXd Ki = matrix_at(gains[i], ptr);
      if (Ki.rows() != cfg.lti->m() || Ki.cols() != cfg.lti->l())
        fail(ptr, "gain must be " + std::to_string(cfg.lti->m()) + "x" +
                      std::to_string(cfg.lti->l()) + " (inputs x outputs)");
      K.push_back(std::move(Ki));
    }
    cfg.lti_gains.emplace(std::move(K));
  } else {
    cfg.pid_gains = PidController{
        number_at(member(ctl, "kp", "/controller"), "/controller/kp"),
        number_at(member(ctl, "ki", "/controller"), "/controller/ki"),
        number_at(member(ctl, "kd", "/controller"), "/controller/kd")};
  }

  json params = json::object();
  if (auto it = j.find("parameters"); it != j.end()) {
    if (!it->is_object()) fail("/parameters", "expected an object");
    params = *it;
  }
  if (params.contains("alpha")) {
    cfg.alpha = number_at(params["alpha"], "/parameters/alpha");
    if (cfg.alpha < 0) fail("/parameters/alpha", "must be >= 0");
  }
  if (params.contains("h")) {
    const double h = number_at(params["h"], "/parameters/h");
    if (h <= 0) fail("/parameters/h", "must be > 0");
    cfg.h = h;
  }
  if (params.contains("q")) {
    auto q = delays_at(params["q"], "/parameters/q");
    if (cfg.pid && q.size() != 1) fail("/parameters/q", "PID systems take a single delay");
    if (cfg.lti && static_cast<int>(q.size()) != cfg.lti_gains->r() - 1)
      fail("/parameters/q", "expected " + std::to_string(cfg.lti_gains->r() - 1) +
                                " delays (one per derivative order)");
    cfg.q = std::move(q);
  }
  if (params.contains("sigma")) {
    cfg.sigma = number_at(params["sigma"], "/parameters/sigma");
    if (cfg.sigma < 0) fail("/parameters/sigma", "must be >= 0");
  }
  if (params.contains("T")) {
    cfg.T = number_at(params["T"], "/parameters/T");
    if (cfg.T <= 0) fail("/parameters/T", "must be > 0");
  }
  if (params.contains("seed")) {
    const std::int64_t s = integer_at(params["seed"], "/parameters/seed");
    if (s < 0) fail("/parameters/seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (params.contains("x0")) {
    cfg.x0 = vector_at(params["x0"], "/parameters/x0");
    const int want = cfg.pid ? 2 : cfg.lti->n();
    if (cfg.x0.size() != want)
      fail("/parameters/x0", "expected " + std::to_string(want) + " entries");
  }
  if (params.contains("dense")) {
    const auto d = integer_at(params["dense"], "/parameters/dense");
    if (d < 2 || d % 2 != 0) fail("/parameters/dense", "must be an even integer >= 2");
    cfg.dense_per_step = static_cast<int>(d);
  }

  if (cfg.mode == "search") {
    json search = json::object();
    if (auto it = j.find("search"); it != j.end()) {
      if (!it->is_object()) fail("/search", "expected an object");
      search = *it;
    }
    if (search.contains("parameter")) {
      if (!search["parameter"].is_string())
        fail("/search/parameter", "expected \"h\", \"sigma\" or \"sweep-q\"");
      cfg.search_parameter = search["parameter"].get<std::string>();
    }
    if (cfg.search_parameter != "h" && cfg.search_parameter != "sigma" &&
        cfg.search_parameter != "sweep-q")
      fail("/search/parameter", "expected \"h\", \"sigma\" or \"sweep-q\"");
    const json& range = member(search, "range", "/search");
    if (!range.is_array() || range.size() != 2)
      fail("/search/range", "expected [lo, hi]");
    cfg.range_lo = number_at(range[0], "/search/range/0");
    cfg.range_hi = number_at(range[1], "/search/range/1");
    if (!(cfg.range_lo >= 0 && cfg.range_lo < cfg.range_hi))
      fail("/search/range", "need 0 <= lo < hi");
    if (search.contains("q_range")) {
      const json& qr = search["q_range"];
      if (!qr.is_array() || qr.size() != 2) fail("/search/q_range", "expected [lo, hi]");
      cfg.q_lo = static_cast<int>(integer_at(qr[0], "/search/q_range/0"));
      cfg.q_hi = static_cast<int>(integer_at(qr[1], "/search/q_range/1"));
      if (cfg.q_lo < 1 || cfg.q_lo > cfg.q_hi)
        fail("/search/q_range", "need 1 <= lo <= hi");
    }
    if (cfg.search_parameter == "sweep-q" && !cfg.pid)
      fail("/search/parameter", "sweep-q applies to PID systems only");
    if (cfg.search_parameter == "h" && cfg.pid && !cfg.q)
      fail("/parameters/q", "required for a PID h-search (fixed delay)");
    if (cfg.search_parameter == "sigma" && !cfg.h)
      fail("/parameters/h", "required for a sigma-search");
  } else {
    if (!cfg.h) fail("/parameters/h", "required for mode '" + cfg.mode + "'");
  }
  if ((cfg.mode == "analyze" || cfg.mode == "search") && cfg.alpha <= 0)
    fail("/parameters/alpha", "a positive decay rate is required for mode '" + cfg.mode + "'");

  return cfg;
}

json controller_to_json(const SampledController& c) {
  json j;
  j["kind"] = "lti";
  j["h"] = c.h;
  j["q"] = c.q;
  json K = json::array();
  for (const auto& Ki : c.K) K.push_back(mat_to_json(Ki));
  j["K"] = std::move(K);
  j["ill_conditioned_map"] = c.ill_conditioned_map;
  return j;
}

json controller_to_json(const SampledPidController& c) {
  return json{{"kind", "pid"}, {"h", c.h},   {"q", c.q},     {"kp", c.kp},
              {"ki", c.ki},    {"kd", c.kd}, {"sigma", c.sigma}};
}

SampledController lti_controller_from_json(const json& j) {
  SampledController c;
  c.h = j.at("h").get<double>();
  c.q = j.at("q").get<std::vector<int>>();
  for (const auto& m : j.at("K")) c.K.push_back(mat_from_json(m));
  c.ill_conditioned_map = j.value("ill_conditioned_map", false);
  return c;
}

SampledPidController pid_controller_from_json(const json& j) {
  SampledPidController c;
  c.h = j.at("h").get<double>();
  c.q = j.at("q").get<int>();
  c.kp = j.at("kp").get<double>();
  c.ki = j.at("ki").get<double>();
  c.kd = j.at("kd").get<double>();
  c.sigma = j.value("sigma", 0.0);
  return c;
}

json run_analyze(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  json out{{"mode", "analyze"}, {"ok", false}};
  AffineLmi lmi;
  json context{{"alpha", cfg.alpha}, {"sigma", cfg.sigma}, {"h", *cfg.h}};
  if (cfg.is_pid()) {
    const int q = pid_delay(cfg);
    auto ctrl = map_pid_gains(*cfg.pid_gains, *cfg.h, q, cfg.sigma);
    out["kind"] = "pid";
    out["controller"] = controller_to_json(ctrl);
    out["ideal_decay_rate"] = decay_rate(pid_ideal_closed_loop(*cfg.pid, *cfg.pid_gains));
    context["q"] = q;
    lmi = build_psi(*cfg.pid, ctrl, cfg.alpha);
  } else {
    auto s = lti_setup(cfg);
    out["kind"] = "lti";
    out["relative_degree"] = s.r;
    out["controller"] = controller_to_json(s.ctrl);
    out["ideal_decay_rate"] = decay_rate(ideal_closed_loop(s.plant, s.ideal));
    out["delay_free_decay_rate"] = decay_rate(closed_loop_matrix(s.plant, s.ctrl));
    context["q"] = s.q;
    lmi = cfg.sigma > 0 ? build_phi_e(s.plant, s.ctrl, cfg.alpha, cfg.sigma)
                        : build_phi(s.plant, s.ctrl, cfg.alpha);
  }
  out["h"] = *cfg.h;
  out["alpha"] = cfg.alpha;
  out["sigma"] = cfg.sigma;

  auto outcome = solve_feasibility(lmi);
  out["status"] = status_text(outcome.status);
  out["lambda_max_bound"] = outcome.best_lambda;
  out["message"] = outcome.message;
  if (outcome.feasible()) {
    auto vr = verify_certificate(lmi, outcome.certificate->values);
    out["verified"] = vr.pass;
    out["lambda_max"] = vr.lambda_max;
    write_json_file(fs::path(out_dir) / "certificate.json",
                    certificate_file_json(context, lmi, *outcome.certificate, vr));
    out["certificate_file"] = "certificate.json";
    out["ok"] = vr.pass;
  }
  write_json_file(fs::path(out_dir) / "analysis.json", out);
  return out;
}

json run_synthesize(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  json out{{"mode", "synthesize"}, {"ok", true}};
  json ctl;
  if (cfg.is_pid()) {
    const int q = pid_delay(cfg);
    auto ctrl = map_pid_gains(*cfg.pid_gains, *cfg.h, q, cfg.sigma);
    ctl = controller_to_json(ctrl);
    out["kind"] = "pid";
    out["ideal_decay_rate"] = decay_rate(pid_ideal_closed_loop(*cfg.pid, *cfg.pid_gains));
  } else {
    auto s = lti_setup(cfg);
    ctl = controller_to_json(s.ctrl);
    out["kind"] = "lti";
    out["relative_degree"] = s.r;
    out["ideal_decay_rate"] = decay_rate(ideal_closed_loop(s.plant, s.ideal));
    out["delay_free_decay_rate"] = decay_rate(closed_loop_matrix(s.plant, s.ctrl));
    if (s.ctrl.ill_conditioned_map)
      out["warning"] = "gain transformation is ill-conditioned at these delays";
  }
  out["controller"] = ctl;
  write_json_file(fs::path(out_dir) / "controller.json", ctl);
  out["controller_file"] = "controller.json";
  return out;
}

json run_search(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  json out{{"mode", "search"}, {"parameter", cfg.search_parameter}};
  const SearchSettings settings;
  const std::pair<double, double> range{cfg.range_lo, cfg.range_hi};

  if (cfg.search_parameter == "sweep-q") {
    auto rep = sweep_q(*cfg.pid, *cfg.pid_gains, cfg.alpha, cfg.sigma,
                       {cfg.q_lo, cfg.q_hi}, range, settings);
    write_text(fs::path(out_dir) / "sweep.csv", rep.to_csv());
    write_json_file(fs::path(out_dir) / "sweep.json", rep.to_json());
    out["found"] = rep.found;
    out["best_q"] = std::vector<int>{rep.best_q};
    out["best"] = rep.best_h;
    out["probes"] = rep.rows.size();
    if (rep.found && rep.best && rep.best->certificate) {
      auto ctrl = map_pid_gains(*cfg.pid_gains, rep.best_h, rep.best_q, cfg.sigma);
      auto lmi = build_psi(*cfg.pid, ctrl, cfg.alpha);
      auto vr = verify_certificate(lmi, rep.best->certificate->values);
      write_json_file(fs::path(out_dir) / "certificate.json",
                      certificate_file_json({{"h", rep.best_h},
                                             {"q", rep.best_q},
                                             {"alpha", cfg.alpha},
                                             {"sigma", cfg.sigma}},
                                            lmi, *rep.best->certificate, vr));
      out["certificate_file"] = "certificate.json";
    }
    out["ok"] = rep.found;
    return out;
  }

  SearchReport rep;
  json context{{"alpha", cfg.alpha}};
  std::optional<AffineLmi> best_lmi;
  if (cfg.search_parameter == "h") {
    if (cfg.is_pid()) {
      const int q = cfg.q->front();
      rep = max_h(*cfg.pid, *cfg.pid_gains, cfg.alpha, q, cfg.sigma, range, settings);
      if (rep.found) {
        auto ctrl = map_pid_gains(*cfg.pid_gains, rep.best, q, cfg.sigma);
        best_lmi = build_psi(*cfg.pid, ctrl, cfg.alpha);
        context["q"] = q;
      }
    } else {
      DelayRule rule = cfg.q ? DelayRule::fixed_delays(*cfg.q) : DelayRule::by_rule();
      rep = max_h(*cfg.lti, *cfg.lti_gains, cfg.alpha, rule, range, cfg.sigma, settings);
      if (rep.found) {
        auto ctrl = map_gains(*cfg.lti_gains, rep.best, rep.best_q);
        best_lmi = cfg.sigma > 0 ? build_phi_e(*cfg.lti, ctrl, cfg.alpha, cfg.sigma)
                                 : build_phi(*cfg.lti, ctrl, cfg.alpha);
        context["q"] = rep.best_q;
      }
    }
    context["h"] = rep.best;
    context["sigma"] = cfg.sigma;
  } else {
    if (cfg.is_pid()) {
      const int q = pid_delay(cfg);
      rep = max_sigma(*cfg.pid, *cfg.pid_gains, *cfg.h, q, cfg.alpha, range, settings);
      if (rep.found) {
        auto ctrl = map_pid_gains(*cfg.pid_gains, *cfg.h, q, rep.best);
        best_lmi = build_psi(*cfg.pid, ctrl, cfg.alpha);
        context["q"] = q;
      }
    } else {
      std::vector<int> q = cfg.q ? *cfg.q : choose_delays(*cfg.h, cfg.lti_gains->r());
      rep = max_sigma(*cfg.lti, *cfg.lti_gains, *cfg.h, q, cfg.alpha, range, settings);
      if (rep.found) {
        auto ctrl = map_gains(*cfg.lti_gains, *cfg.h, q);
        best_lmi = rep.best > 0 ? build_phi_e(*cfg.lti, ctrl, cfg.alpha, rep.best)
                                : build_phi(*cfg.lti, ctrl, cfg.alpha);
        context["q"] = q;
      }
    }
    context["h"] = cfg.h ? json(*cfg.h) : json();
    context["sigma"] = rep.best;
  }

  write_text(fs::path(out_dir) / "search.csv", rep.to_csv());
  write_json_file(fs::path(out_dir) / "search.json", rep.to_json());
  out["found"] = rep.found;
  out["best"] = rep.best;
  out["best_q"] = rep.best_q;
  out["probes"] = rep.probes.size();
  out["local_boundary"] = rep.local_boundary;
  out["message"] = rep.message;
  if (rep.found && rep.certificate && best_lmi) {
    auto vr = verify_certificate(*best_lmi, rep.certificate->values);
    write_json_file(fs::path(out_dir) / "certificate.json",
                    certificate_file_json(context, *best_lmi, *rep.certificate, vr));
    out["certificate_file"] = "certificate.json";
  }
  out["ok"] = rep.found;
  return out;
}

json run_simulate(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  json out{{"mode", "simulate"}, {"ok", true}};
  const bool event = cfg.sigma > 0;
  const bool batch = cfg.x0.size() == 0;
  out["event_triggered"] = event;

  Assignment certvals;
  bool certified = false;
  std::string certnote;
  Eigen::MatrixXd Omega;

  std::vector<Eigen::VectorXd> ics;
  std::optional<SampledController> lctrl;
  std::optional<SampledPidController> pctrl;
  std::optional<AffineLmi> lmi;

  if (cfg.is_pid()) {
    const int q = pid_delay(cfg);
    pctrl = map_pid_gains(*cfg.pid_gains, *cfg.h, q, cfg.sigma);
    out["kind"] = "pid";
    out["controller"] = controller_to_json(*pctrl);
    if (cfg.alpha > 0) lmi = build_psi(*cfg.pid, *pctrl, cfg.alpha);
    ics = batch ? seeded_initial_conditions(cfg.seed, 2)
                : std::vector<Eigen::VectorXd>{cfg.x0};
  } else {
    auto s = lti_setup(cfg);
    lctrl = s.ctrl;
    out["kind"] = "lti";
    out["controller"] = controller_to_json(*lctrl);
    if (cfg.alpha > 0)
      lmi = event ? build_phi_e(s.plant, *lctrl, cfg.alpha, cfg.sigma)
                  : build_phi(s.plant, *lctrl, cfg.alpha);
    Omega = Eigen::MatrixXd::Identity(cfg.lti->m(), cfg.lti->m());
    ics = batch ? seeded_initial_conditions(cfg.seed, cfg.lti->n())
                : std::vector<Eigen::VectorXd>{cfg.x0};
  }

  if (lmi) {
    auto outcome = solve_feasibility(*lmi);
    if (outcome.feasible()) {
      auto vr = verify_certificate(*lmi, outcome.certificate->values);
      if (vr.pass) {
        certified = true;
        certvals = outcome.certificate->values;
        json context{{"h", *cfg.h}, {"alpha", cfg.alpha}, {"sigma", cfg.sigma}};
        write_json_file(fs::path(out_dir) / "certificate.json",
                        certificate_file_json(context, *lmi, *outcome.certificate, vr));
        out["certificate_file"] = "certificate.json";
        if (!cfg.is_pid() && event) Omega = certvals.at("Omega");
      } else {
        certnote = "certificate failed verification; Lyapunov diagnostics skipped";
      }
    } else {
      certnote = "condition not certified at these parameters (" +
                 std::string(status_text(outcome.status)) +
                 "); Lyapunov diagnostics skipped";
    }
  } else if (cfg.alpha <= 0) {
    certnote = "alpha = 0: no certificate attempted, Lyapunov diagnostics skipped";
  }
  out["certified"] = certified;
  if (!certnote.empty()) out["certificate_note"] = certnote;

  json runs = json::array();
  double total_trans = 0;
  int samples = 0;
  double worst_increase = 0;
  bool any_grid_warning = false;
  for (size_t i = 0; i < ics.size(); ++i) {
    const std::string suffix = batch ? "_" + std::to_string(i) : "";
    json row{{"index", i}, {"x0", vec_to_json(ics[i])}};
    SimTrace trace;
    std::optional<EventLog> ev;
    if (cfg.is_pid()) {
      auto [tr, log] = simulate_pid(*cfg.pid, *pctrl, Eigen::Vector2d(ics[i](0), ics[i](1)),
                                    cfg.T, cfg.dense_per_step);
      trace = std::move(tr);
      if (event) ev = log;
    } else if (event) {
      auto [tr, log] = simulate_event_triggered(*cfg.lti, *lctrl, cfg.sigma, Omega, ics[i],
                                                cfg.T, cfg.dense_per_step);
      trace = std::move(tr);
      ev = log;
    } else {
      trace = simulate_sampled(*cfg.lti, *lctrl, ics[i], cfg.T, cfg.dense_per_step);
    }
    samples = trace.samples();
    total_trans += trace.transmissions();
    row["samples"] = trace.samples();
    row["transmissions"] = trace.transmissions();
    row["decay_estimate"] = finite_or_null(estimate_decay_rate(trace));

    const std::vector<double>* Vptr = nullptr;
    std::vector<double> V;
    if (certified) {
      LyapunovDiagnostic diag =
          cfg.is_pid() ? evaluate_lyapunov_pid(*cfg.pid, *pctrl, trace, certvals, cfg.alpha)
                       : evaluate_lyapunov(*cfg.lti, *lctrl, trace, certvals, cfg.alpha);
      V = diag.V;
      Vptr = &V;
      row["lyapunov"] = {{"max_relative_increase", diag.max_relative_increase},
                         {"monotone", diag.monotone()},
                         {"grid_warning", diag.grid_warning}};
      worst_increase = std::max(worst_increase, diag.max_relative_increase);
      any_grid_warning = any_grid_warning || diag.grid_warning;
    }

    const std::string trace_file = "trace" + suffix + ".csv";
    write_text(fs::path(out_dir) / trace_file, trace_to_csv(trace, Vptr));
    row["trace_file"] = trace_file;
    if (ev) {
      const std::string ev_file = "events" + suffix + ".json";
      write_json_file(fs::path(out_dir) / ev_file, ev->to_json());
      row["events_file"] = ev_file;
    }
    runs.push_back(std::move(row));
  }

  out["runs"] = std::move(runs);
  out["samples"] = samples;
  out["mean_transmissions"] = total_trans / static_cast<double>(ics.size());
  if (event && samples > 0)
    out["reduction_percent"] =
        100.0 * (1.0 - total_trans / static_cast<double>(ics.size()) / samples);
  if (certified) {
    out["max_relative_increase"] = worst_increase;
    out["grid_warning"] = any_grid_warning;
  }
  write_json_file(fs::path(out_dir) / "summary.json", out);
  return out;
}

json run_reproduce(const std::string& example, const std::string& out_dir,
                   std::ostream& log) {
  fs::create_directories(out_dir);
  if (example == "triple-integrator") return reproduce_triple_integrator(out_dir, log);
  if (example == "pid") return reproduce_pid(out_dir, log);
  throw std::runtime_error("unknown example '" + example +
                           "'; valid ids: triple-integrator, pid");
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"delayed sampled-data controller synthesis, certification, and simulation"};
  std::string config_path, mode, out_dir = ".", example;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON run configuration file");
  app.add_option("--mode", mode, "analyze|synthesize|search|simulate|reproduce (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed, "seed override for batch initial conditions");
  app.add_option("--out", out_dir, "output directory (default: current)");
  app.add_option("--example", example, "built-in example id for reproduce mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (mode == "reproduce" || !example.empty()) {
      if (example.empty())
        throw std::runtime_error("reproduce mode needs --example; valid ids: triple-integrator, pid");
      json rep = run_reproduce(example, out_dir, std::cout);
      return rep.value("ok", false) ? 0 : 2;
    }
    if (config_path.empty())
      throw std::runtime_error("either --config or --example is required");

    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + config_path);
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw std::runtime_error("config is not valid JSON: " + std::string(e.what()));
    }
    RunConfig cfg = parse_config(j);
    if (!mode.empty()) cfg.mode = mode;
    if (seed_opt->count() > 0) cfg.seed = seed;

    json out;
    if (cfg.mode == "analyze") {
      out = run_analyze(cfg, out_dir);
    } else if (cfg.mode == "synthesize") {
      out = run_synthesize(cfg, out_dir);
    } else if (cfg.mode == "search") {
      out = run_search(cfg, out_dir);
    } else if (cfg.mode == "simulate") {
      out = run_simulate(cfg, out_dir);
    } else if (cfg.mode == "reproduce") {
      throw std::runtime_error("reproduce mode needs --example; valid ids: triple-integrator, pid");
    } else {
      throw std::runtime_error("unknown mode '" + cfg.mode + "'");
    }
    print_summary(out, std::cout);
    return out.value("ok", false) ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace artdelay
