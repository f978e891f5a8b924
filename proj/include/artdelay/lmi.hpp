#pragma once

#include "artdelay/model.hpp"
#include "artdelay/synthesis.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace artdelay {

// Named decision variable values.
using Assignment = std::map<std::string, Eigen::MatrixXd>;

enum class VarKind { SymmetricMatrix, Scalar };

struct VariableSpec {
  std::string name;
  int dim = 1;                     // matrix dimension; 1 for scalars
  VarKind kind = VarKind::Scalar;
  bool positive_definite = false;  // else nonnegative (scalars)
};

// Maps named symmetric-matrix / scalar variables onto a flat parameter
// vector. Matrix variables contribute their upper triangle, column-major
// within the triangle: (0,0), (0,1), (1,1), (0,2), ...
class DecisionLayout {
 public:
  DecisionLayout() = default;
  explicit DecisionLayout(std::vector<VariableSpec> vars);

  int param_count() const { return total_; }
  const std::vector<VariableSpec>& variables() const { return vars_; }
  int offset(int var) const { return offsets_.at(static_cast<size_t>(var)); }
  int span(int var) const;
  int var_of_param(int p) const;

  // Symmetric basis matrix of parameter p within its variable:
  // E_aa = e_a e_a^T on the diagonal, E_ab = e_a e_b^T + e_b e_a^T off it.
  Eigen::MatrixXd basis(int p) const;
  // (row, col) of parameter p within its variable, row <= col.
  std::pair<int, int> entry(int p) const;
  bool is_diagonal_param(int p) const;

  Eigen::VectorXd pack(const Assignment& values) const;
  Assignment unpack(const Eigen::VectorXd& params) const;

 private:
  std::vector<VariableSpec> vars_;
  std::vector<int> offsets_;
  int total_ = 0;
};

// Affine symmetric-matrix map F(theta) = F0 + sum_p theta_p Fp with a block
// partition of the rows/columns for reporting.
struct AffineLmi {
  std::vector<int> block_dims;
  std::vector<std::string> block_names;
  DecisionLayout layout;
  Eigen::MatrixXd constant;             // F0, N x N
  std::vector<Eigen::MatrixXd> coeffs;  // Fp, each N x N

  int dim() const { return static_cast<int>(constant.rows()); }

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& params) const;
  Eigen::MatrixXd evaluate(const Assignment& values) const;

  // max |entry| / min nonzero |entry| over F0 and all Fp; scaling diagnostic.
  double coefficient_dynamic_range() const;

  nlohmann::json to_json() const;
  static AffineLmi from_json(const nlohmann::json& j);
};

// Builds an AffineLmi by probing an assembler callback at the zero assignment
// and at unit parameter perturbations. The callback must be affine in the
// variables and return a symmetric matrix.
AffineLmi affine_from_assembler(
    DecisionLayout layout, std::vector<int> block_dims,
    std::vector<std::string> block_names,
    const std::function<Eigen::MatrixXd(const Assignment&)>& assemble);

// Exponential-stability condition for the delayed sampled-data loop:
// feasibility in P, W_0..W_{r-1}, R_1..R_{r-1} certifies decay rate alpha.
AffineLmi build_phi(const LtiPlant& plant, const SampledController& ctrl, double alpha);

// Event-triggered variant: build_phi bordered by error and threshold blocks,
// with Omega as an extra variable. At sigma = 0 the threshold block row is
// structurally zero and the condition degenerates to build_phi's.
AffineLmi build_phi_e(const LtiPlant& plant, const SampledController& ctrl,
                      double alpha, double sigma);

// Sampled PID closed loop
//   X' = A X + A_v v(t) + B e(t) style matrices in the (y, y', integral)
// coordinates; used by build_psi and exposed for inspection.
struct PidStateSpace {
  Eigen::Matrix3d A;
  Eigen::Matrix3d Av;
  Eigen::Vector3d B;
};
PidStateSpace pid_sampled_state_space(const PidPlant& plant, const SampledPidController& ctrl);

// Exponential-stability condition for the sampled (optionally event-
// triggered) PID loop; variables P, S (3x3 PD), W, R, omega (scalars).
AffineLmi build_psi(const PidPlant& plant, const SampledPidController& ctrl, double alpha);

void to_json(nlohmann::json& j, const VariableSpec& v);
void from_json(const nlohmann::json& j, VariableSpec& v);
nlohmann::json assignment_to_json(const Assignment& a);
Assignment assignment_from_json(const nlohmann::json& j);

}  // namespace artdelay
