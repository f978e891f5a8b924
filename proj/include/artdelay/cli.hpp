#pragma once

#include "artdelay/model.hpp"
#include "artdelay/synthesis.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace artdelay {

// Configuration/schema violation; `pointer` is a JSON pointer to the
// offending field, e.g. "/parameters/h".
struct ConfigError : std::runtime_error {
  std::string pointer;
  ConfigError(std::string ptr, const std::string& message)
      : std::runtime_error(ptr + ": " + message), pointer(std::move(ptr)) {}
};

struct RunConfig {
  std::string mode;  // analyze | synthesize | search | simulate

  // system: exactly one of lti / pid
  std::optional<LtiPlant> lti;
  std::optional<PidPlant> pid;

  // ideal controller gains
  std::optional<DerivativeController> lti_gains;
  std::optional<PidController> pid_gains;

  // parameters
  double alpha = 0;
  std::optional<double> h;
  std::optional<std::vector<int>> q;  // delays; single entry for PID
  double sigma = 0;
  double T = 10;
  std::uint64_t seed = 42;
  Eigen::VectorXd x0;                // empty: seeded batch (simulate mode)
  int dense_per_step = 50;

  // search block
  std::string search_parameter = "h";  // h | sigma | sweep-q
  double range_lo = 0, range_hi = 0;
  int q_lo = 1, q_hi = 20;

  bool is_pid() const { return pid.has_value(); }
};

// Parses and validates a run configuration. Throws ConfigError with a JSON
// pointer on any violation.
RunConfig parse_config(const nlohmann::json& j);

// Serialization for synthesized controllers (the controller.json artifact).
nlohmann::json controller_to_json(const SampledController& c);
nlohmann::json controller_to_json(const SampledPidController& c);
SampledController lti_controller_from_json(const nlohmann::json& j);
SampledPidController pid_controller_from_json(const nlohmann::json& j);

// Mode drivers. Artifacts (CSV traces, JSON reports, certificates) go under
// out_dir; the returned JSON summarizes the run. They throw on hard errors;
// a "negative but valid" outcome (infeasible condition, failed check) is
// reported in the JSON under "ok".
nlohmann::json run_analyze(const RunConfig& cfg, const std::string& out_dir);
nlohmann::json run_synthesize(const RunConfig& cfg, const std::string& out_dir);
nlohmann::json run_search(const RunConfig& cfg, const std::string& out_dir);
nlohmann::json run_simulate(const RunConfig& cfg, const std::string& out_dir);

// Built-in end-to-end examples ("triple-integrator", "pid"): synthesizes,
// certifies, simulates, and checks the results against stored reference
// values. Each check becomes a table row.
nlohmann::json run_reproduce(const std::string& example, const std::string& out_dir,
                             std::ostream& log);

// Full command-line entry point. Exit codes: 0 success, 1 error (bad usage,
// malformed config, unknown example), 2 valid run with a negative outcome
// (infeasible condition, failed reproduce row, search without result).
int cli_main(int argc, const char* const* argv);

}  // namespace artdelay
