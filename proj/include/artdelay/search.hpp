#pragma once

#include "artdelay/lmi.hpp"
#include "artdelay/model.hpp"
#include "artdelay/sdp.hpp"
#include "artdelay/synthesis.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace artdelay {

// Delay selection for max_h probes: either the default rule re-applied at
// each probed h, or a fixed delay vector.
struct DelayRule {
  bool rule_based = true;
  std::vector<int> fixed;  // used when !rule_based

  static DelayRule by_rule() { return {true, {}}; }
  static DelayRule fixed_delays(std::vector<int> q) { return {false, std::move(q)}; }
};

struct ProbeRecord {
  double value = 0;            // probed h or sigma
  std::vector<int> q;
  FeasStatus status = FeasStatus::Inconclusive;
  double lambda = 0;
  std::string note;
};

struct SearchReport {
  std::string parameter;       // "h" or "sigma"
  bool found = false;
  double best = 0;
  std::optional<Certificate> certificate;  // at the best feasible probe
  std::vector<int> best_q;
  std::vector<ProbeRecord> probes;
  double bracket_lo = 0, bracket_hi = 0;   // final bisection bracket
  bool local_boundary = false;  // feasibility changed sign more than once
  std::string message;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

struct SearchSettings {
  double rel_tol = 1e-3;          // stop when (hi - lo) <= rel_tol * lo
  int validation_probes = 3;      // interior re-checks after bisection
  SolverSettings solver;
};

// Largest h with a feasible stability condition on [h_lo, h_hi], by
// bisection on feasibility. sigma = 0 uses the periodic condition; sigma > 0
// the event-triggered one. Delays and gains are regenerated at every probe.
SearchReport max_h(const LtiPlant& plant, const DerivativeController& ideal,
                   double alpha, const DelayRule& rule,
                   std::pair<double, double> h_range, double sigma = 0.0,
                   const SearchSettings& settings = {});

// PID variant with a fixed delay q.
SearchReport max_h(const PidPlant& plant, const PidController& ideal,
                   double alpha, int q, double sigma,
                   std::pair<double, double> h_range,
                   const SearchSettings& settings = {});

// Largest sigma in [sigma_range) keeping the event-triggered condition
// feasible at fixed h and delays. sigma = 0 probes use the periodic
// condition.
SearchReport max_sigma(const LtiPlant& plant, const DerivativeController& ideal,
                       double h, const std::vector<int>& q, double alpha,
                       std::pair<double, double> sigma_range,
                       const SearchSettings& settings = {});

SearchReport max_sigma(const PidPlant& plant, const PidController& ideal,
                       double h, int q, double alpha,
                       std::pair<double, double> sigma_range,
                       const SearchSettings& settings = {});

struct SweepRow {
  int q = 0;
  bool found = false;
  double best_h = 0;
  std::string message;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool found = false;
  int best_q = 0;
  double best_h = 0;
  std::optional<SearchReport> best;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Runs the PID max_h search for each q in [q_range]; rows are independent,
// a row whose h_lo probe is infeasible is marked and skipped.
SweepReport sweep_q(const PidPlant& plant, const PidController& ideal,
                    double alpha, double sigma, std::pair<int, int> q_range,
                    std::pair<double, double> h_range,
                    const SearchSettings& settings = {});

}  // namespace artdelay
