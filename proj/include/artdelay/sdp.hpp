#pragma once

#include "artdelay/lmi.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <optional>
#include <string>

namespace artdelay {

// Strict feasibility problem for an AffineLmi: find variable values with
// F(theta) <= -mu I, matrix variables >= eps I invertible floors, scalar
// variables >= 0. Negative margin/eps select the defaults
// mu = 1e-9 (1 + ||F0||_F), eps = 1e-9.
struct FeasibilityProblem {
  AffineLmi lmi;
  double margin = -1;
  double eps = -1;

  double resolved_margin() const;
  double resolved_eps() const;
};

struct SolverSettings {
  int max_iterations = 500;
  double duality_tol = 1e-10;
  double trace_budget = 1e8;
  bool retry_long_double = true;
};

struct SolverStats {
  int iterations = 0;
  double duality_gap = 0;
  double primal_residual = 0;
  double dual_residual = 0;
  bool early_exit = false;       // explicit eigenvalue check fired mid-run
  bool extended_precision = false;
  std::string note;
};

struct Certificate {
  Assignment values;
  double lambda_max = 0;          // of F(theta) with structurally zero rows removed
  double lambda_max_full = 0;     // of the full F(theta)
  double margin = 0;              // feasibility margin the certificate satisfies
  SolverStats stats;

  nlohmann::json to_json() const;
  static Certificate from_json(const nlohmann::json& j);
};

enum class FeasStatus { Feasible, Infeasible, Inconclusive };

struct FeasibilityOutcome {
  FeasStatus status = FeasStatus::Inconclusive;
  std::optional<Certificate> certificate;  // set when Feasible
  double best_lambda = 0;                  // best (reduced) lambda_max bound found
  SolverStats stats;
  std::string message;

  bool feasible() const { return status == FeasStatus::Feasible; }
};

// Dense primal-dual interior-point solve of the feasibility problem.
// Deterministic: same inputs give bitwise-identical outcomes.
FeasibilityOutcome solve_feasibility(const FeasibilityProblem& problem,
                                     const SolverSettings& settings = {});

FeasibilityOutcome solve_feasibility(const AffineLmi& lmi,
                                     const SolverSettings& settings = {});

// Independent certificate check: re-evaluates the LMI from the stored values
// and tests, by eigenvalue computation only,
//   lambda_max(F(theta)) <= 1e-8 * (1 + ||F(theta)||_F),
//   lambda_min of PD variables >= eps/2, scalar variables >= 0.
struct VerifyReport {
  bool pass = false;
  double lambda_max = 0;
  double scale = 0;
  std::map<std::string, double> variable_min_eig;
  std::vector<std::string> failures;
};

VerifyReport verify_certificate(const AffineLmi& lmi, const Assignment& values,
                                double eps = 1e-9);

}  // namespace artdelay
