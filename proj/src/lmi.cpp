#include "artdelay/lmi.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace artdelay {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("matrix_from_json: expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      M(i, c) = row.at(static_cast<size_t>(c)).get<double>();
  }
  return M;
}

int triangle_size(int d) { return d * (d + 1) / 2; }

}  // namespace

DecisionLayout::DecisionLayout(std::vector<VariableSpec> vars) : vars_(std::move(vars)) {
  offsets_.reserve(vars_.size());
  for (const auto& v : vars_) {
    if (v.dim < 1) throw std::invalid_argument("DecisionLayout: variable dim must be >= 1");
    if (v.kind == VarKind::Scalar && v.dim != 1)
      throw std::invalid_argument("DecisionLayout: scalar variables have dim 1");
    offsets_.push_back(total_);
    total_ += (v.kind == VarKind::SymmetricMatrix) ? triangle_size(v.dim) : 1;
  }
}

int DecisionLayout::span(int var) const {
  const auto& v = vars_.at(static_cast<size_t>(var));
  return v.kind == VarKind::SymmetricMatrix ? triangle_size(v.dim) : 1;
}

int DecisionLayout::var_of_param(int p) const {
  if (p < 0 || p >= total_) throw std::out_of_range("DecisionLayout: parameter index");
  int v = static_cast<int>(vars_.size()) - 1;
  while (offsets_[static_cast<size_t>(v)] > p) --v;
  return v;
}

std::pair<int, int> DecisionLayout::entry(int p) const {
  const int v = var_of_param(p);
  int k = p - offsets_[static_cast<size_t>(v)];
  if (vars_[static_cast<size_t>(v)].kind == VarKind::Scalar) return {0, 0};
  int col = 0;
  while (triangle_size(col + 1) <= k) ++col;
  return {k - triangle_size(col), col};
}

bool DecisionLayout::is_diagonal_param(int p) const {
  auto [a, b] = entry(p);
  return a == b;
}

Eigen::MatrixXd DecisionLayout::basis(int p) const {
  const int v = var_of_param(p);
  const int d = vars_[static_cast<size_t>(v)].dim;
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, d);
  auto [a, b] = entry(p);
  E(a, b) = 1.0;
  E(b, a) = 1.0;
  return E;
}

Eigen::VectorXd DecisionLayout::pack(const Assignment& values) const {
  Eigen::VectorXd theta(total_);
  for (size_t v = 0; v < vars_.size(); ++v) {
    const auto& spec = vars_[v];
    auto it = values.find(spec.name);
    if (it == values.end())
      throw std::invalid_argument("pack: missing variable " + spec.name);
    const Eigen::MatrixXd& X = it->second;
    if (X.rows() != spec.dim || X.cols() != spec.dim)
      throw std::invalid_argument("pack: wrong shape for " + spec.name);
    int k = offsets_[v];
    for (int col = 0; col < spec.dim; ++col)
      for (int row = 0; row <= col; ++row) theta(k++) = X(row, col);
  }
  return theta;
}

Assignment DecisionLayout::unpack(const Eigen::VectorXd& params) const {
  if (params.size() != total_)
    throw std::invalid_argument("unpack: wrong parameter count");
  Assignment out;
  for (size_t v = 0; v < vars_.size(); ++v) {
    const auto& spec = vars_[v];
    Eigen::MatrixXd X(spec.dim, spec.dim);
    int k = offsets_[v];
    for (int col = 0; col < spec.dim; ++col)
      for (int row = 0; row <= col; ++row) {
        X(row, col) = params(k);
        X(col, row) = params(k);
        ++k;
      }
    out.emplace(spec.name, std::move(X));
  }
  return out;
}

Eigen::MatrixXd AffineLmi::evaluate(const Eigen::VectorXd& params) const {
  if (params.size() != layout.param_count())
    throw std::invalid_argument("AffineLmi::evaluate: wrong parameter count");
  Eigen::MatrixXd F = constant;
  for (int p = 0; p < params.size(); ++p)
    if (params(p) != 0.0) F += params(p) * coeffs[static_cast<size_t>(p)];
  return F;
}

Eigen::MatrixXd AffineLmi::evaluate(const Assignment& values) const {
  return evaluate(layout.pack(values));
}

double AffineLmi::coefficient_dynamic_range() const {
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  auto scan = [&](const Eigen::MatrixXd& M) {
    for (Eigen::Index i = 0; i < M.size(); ++i) {
      const double a = std::abs(M.data()[i]);
      if (a == 0.0) continue;
      hi = std::max(hi, a);
      lo = std::min(lo, a);
    }
  };
  scan(constant);
  for (const auto& M : coeffs) scan(M);
  return hi == 0.0 ? 1.0 : hi / lo;
}

void to_json(nlohmann::json& j, const VariableSpec& v) {
  j = nlohmann::json{{"name", v.name},
                     {"dim", v.dim},
                     {"kind", v.kind == VarKind::SymmetricMatrix ? "sym" : "scalar"},
                     {"positive_definite", v.positive_definite}};
}

void from_json(const nlohmann::json& j, VariableSpec& v) {
  v.name = j.at("name").get<std::string>();
  v.dim = j.at("dim").get<int>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "sym")
    v.kind = VarKind::SymmetricMatrix;
  else if (kind == "scalar")
    v.kind = VarKind::Scalar;
  else
    throw std::invalid_argument("VariableSpec: unknown kind " + kind);
  v.positive_definite = j.at("positive_definite").get<bool>();
}

nlohmann::json AffineLmi::to_json() const {
  nlohmann::json j;
  j["block_dims"] = block_dims;
  j["block_names"] = block_names;
  j["variables"] = layout.variables();
  j["constant"] = matrix_to_json(constant);
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& M : coeffs) cs.push_back(matrix_to_json(M));
  j["coeffs"] = std::move(cs);
  return j;
}

AffineLmi AffineLmi::from_json(const nlohmann::json& j) {
  AffineLmi lmi;
  lmi.block_dims = j.at("block_dims").get<std::vector<int>>();
  lmi.block_names = j.at("block_names").get<std::vector<std::string>>();
  lmi.layout = DecisionLayout(j.at("variables").get<std::vector<VariableSpec>>());
  lmi.constant = matrix_from_json(j.at("constant"));
  for (const auto& c : j.at("coeffs")) lmi.coeffs.push_back(matrix_from_json(c));
  if (static_cast<int>(lmi.coeffs.size()) != lmi.layout.param_count())
    throw std::invalid_argument("AffineLmi::from_json: coefficient count mismatch");
  return lmi;
}

nlohmann::json assignment_to_json(const Assignment& a) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, M] : a) j[name] = matrix_to_json(M);
  return j;
}

Assignment assignment_from_json(const nlohmann::json& j) {
  Assignment a;
  for (auto it = j.begin(); it != j.end(); ++it)
    a.emplace(it.key(), matrix_from_json(it.value()));
  return a;
}

AffineLmi affine_from_assembler(
    DecisionLayout layout, std::vector<int> block_dims,
    std::vector<std::string> block_names,
    const std::function<Eigen::MatrixXd(const Assignment&)>& assemble) {
  const int np = layout.param_count();
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(np);
  const Eigen::MatrixXd F0 = assemble(layout.unpack(zero));

  auto check_sym = [](const Eigen::MatrixXd& M, const char* what) {
    const double scale = 1.0 + (M.size() ? M.cwiseAbs().maxCoeff() : 0.0);
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::logic_error(std::string("affine_from_assembler: ") + what +
                             " is not symmetric");
  };
  check_sym(F0, "constant term");

  AffineLmi lmi;
  lmi.block_dims = std::move(block_dims);
  lmi.block_names = std::move(block_names);
  lmi.constant = F0;
  lmi.coeffs.reserve(static_cast<size_t>(np));
  for (int p = 0; p < np; ++p) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(np);
    e(p) = 1.0;
    Eigen::MatrixXd Fp = assemble(layout.unpack(e)) - F0;
    check_sym(Fp, "coefficient");
    lmi.coeffs.push_back(std::move(Fp));
  }
  lmi.layout = std::move(layout);

  int total = 0;
  for (int d : lmi.block_dims) total += d;
  if (total != lmi.dim())
    throw std::logic_error("affine_from_assembler: block dims do not cover the matrix");
  return lmi;
}

namespace {

// Writes a block and its transpose mirror.
void sym_set(Eigen::MatrixXd& M, int i0, int j0, const Eigen::MatrixXd& blk) {
  M.block(i0, j0, blk.rows(), blk.cols()) = blk;
  if (i0 != j0)
    M.block(j0, i0, blk.cols(), blk.rows()) = blk.transpose();
}

double factorial(int r) {
  double f = 1;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

struct PhiData {
  int n = 0, m = 0, l = 0, r = 0, N = 0;
  double h = 0, alpha = 0;
  std::vector<int> q;            // q_0 = 0 included, size r
  Eigen::MatrixXd B;             // n x m
  Eigen::MatrixXd D;             // closed loop, n x n
  Eigen::MatrixXd CA;            // l x n, map x -> y'
  Eigen::MatrixXd CArm1;         // l x n, C A^{r-1}
  Eigen::MatrixXd KMC;           // m x n, u = KMC x in the delay-free limit
  std::vector<Eigen::MatrixXd> K;
  std::vector<int> delta_off, kappa_off;
  int x_off = 0, schur_off = 0;
};

PhiData phi_data(const LtiPlant& plant, const SampledController& ctrl, double alpha) {
  const int r = ctrl.r();
  auto rd = relative_degree(plant, r);
  if (!rd || *rd != r)
    throw std::invalid_argument(
        "build_phi: controller derivative order does not match the plant's relative degree");
  if (ctrl.h <= 0) throw std::invalid_argument("build_phi: h must be positive");
  if (ctrl.K[0].rows() != plant.m() || ctrl.K[0].cols() != plant.l())
    throw std::invalid_argument("build_phi: gain shape does not match plant");
  if (alpha < 0) throw std::invalid_argument("build_phi: alpha must be nonnegative");

  PhiData d;
  d.n = plant.n();
  d.m = plant.m();
  d.l = plant.l();
  d.r = r;
  d.h = ctrl.h;
  d.alpha = alpha;
  d.q.resize(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) d.q[static_cast<size_t>(i)] = ctrl.delay(i);
  d.B = plant.B;
  d.D = closed_loop_matrix(plant, ctrl);
  d.CA = plant.C * plant.A;
  Eigen::MatrixXd CArm1 = plant.C;
  for (int i = 0; i + 1 < r; ++i) CArm1 = CArm1 * plant.A;
  d.CArm1 = CArm1;
  d.K = ctrl.K;

  Eigen::MatrixXd Krow(d.m, r * d.l);
  for (int i = 0; i < r; ++i) Krow.middleCols(i * d.l, d.l) = d.K[static_cast<size_t>(i)];
  d.KMC = Krow * build_M(d.h, ctrl.q, r, d.l) * stacked_output_map(plant, r);

  d.N = d.n + (2 * r - 1) * d.m + d.l;
  d.x_off = 0;
  for (int i = 0; i < r; ++i) d.delta_off.push_back(d.n + i * d.m);
  for (int i = 1; i < r; ++i) d.kappa_off.push_back(d.n + r * d.m + (i - 1) * d.m);
  d.schur_off = d.n + (2 * r - 1) * d.m;
  return d;
}

// Stability blocks shared by the periodic and event-triggered conditions.
// Writes the leading N x N part of Phi (which may be larger).
void fill_phi(Eigen::MatrixXd& Phi, const PhiData& d, const Assignment& v) {
  const double pi = std::numbers::pi;
  const Eigen::MatrixXd& P = v.at("P");
  const int r = d.r;

  // Schur variable H aggregating the delayed derivative bounds.
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d.l, d.l);
  for (int i = 1; i < r; ++i) {
    const auto& Ri = v.at("R" + std::to_string(i));
    const auto& Ki = d.K[static_cast<size_t>(i)];
    H += std::pow(d.q[static_cast<size_t>(i)] * d.h, r) * Ki.transpose() * Ri * Ki;
  }

  Eigen::MatrixXd xx = P * d.D + d.D.transpose() * P + 2.0 * d.alpha * P;
  const double hfac = d.h * d.h * std::exp(2.0 * d.alpha * d.h);
  for (int i = 0; i < r; ++i) {
    const auto& Wi = v.at("W" + std::to_string(i));
    const Eigen::MatrixXd KiCA = d.K[static_cast<size_t>(i)] * d.CA;
    xx += hfac * KiCA.transpose() * Wi * KiCA;
  }
  sym_set(Phi, d.x_off, d.x_off, xx);

  const Eigen::MatrixXd PB = P * d.B;
  const Eigen::MatrixXd BtH = (d.CArm1 * d.B).transpose() * H;  // m x l
  for (int i = 0; i < r; ++i) {
    const int off = d.delta_off[static_cast<size_t>(i)];
    const double decay = std::exp(-2.0 * d.alpha * d.q[static_cast<size_t>(i)] * d.h);
    sym_set(Phi, d.x_off, off, PB);
    sym_set(Phi, off, off,
            Eigen::MatrixXd(-(pi * pi / 4.0) * decay * v.at("W" + std::to_string(i))));
    sym_set(Phi, off, d.schur_off, BtH);
  }
  for (int i = 1; i < r; ++i) {
    const int off = d.kappa_off[static_cast<size_t>(i - 1)];
    const double qh = d.q[static_cast<size_t>(i)] * d.h;
    const double decay = std::exp(-2.0 * d.alpha * qh);
    const double scale = std::pow(factorial(r), 2) * decay / std::pow(qh, r);
    sym_set(Phi, d.x_off, off, PB);
    sym_set(Phi, off, off,
            Eigen::MatrixXd(-scale * v.at("R" + std::to_string(i))));
    sym_set(Phi, off, d.schur_off, BtH);
  }

  sym_set(Phi, d.x_off, d.schur_off, (d.CArm1 * d.D).transpose() * H);
  sym_set(Phi, d.schur_off, d.schur_off, Eigen::MatrixXd(-H));
}

DecisionLayout phi_layout(const PhiData& d, bool with_omega) {
  std::vector<VariableSpec> vars;
  vars.push_back({"P", d.n, VarKind::SymmetricMatrix, true});
  for (int i = 0; i < d.r; ++i)
    vars.push_back({"W" + std::to_string(i), d.m, VarKind::SymmetricMatrix, true});
  for (int i = 1; i < d.r; ++i)
    vars.push_back({"R" + std::to_string(i), d.m, VarKind::SymmetricMatrix, true});
  if (with_omega)
    vars.push_back({"Omega", d.m, VarKind::SymmetricMatrix, true});
  return DecisionLayout(std::move(vars));
}

std::vector<int> phi_block_dims(const PhiData& d, bool event) {
  std::vector<int> dims{d.n};
  for (int i = 0; i < 2 * d.r - 1; ++i) dims.push_back(d.m);
  dims.push_back(d.l);
  if (event) {
    dims.push_back(d.m);
    dims.push_back(d.m);
  }
  return dims;
}

std::vector<std::string> phi_block_names(const PhiData& d, bool event) {
  std::vector<std::string> names{"x"};
  for (int i = 0; i < d.r; ++i) names.push_back("delta" + std::to_string(i));
  for (int i = 1; i < d.r; ++i) names.push_back("kappa" + std::to_string(i));
  names.push_back("schur");
  if (event) {
    names.push_back("error");
    names.push_back("threshold");
  }
  return names;
}

}  // namespace

AffineLmi build_phi(const LtiPlant& plant, const SampledController& ctrl, double alpha) {
  const PhiData d = phi_data(plant, ctrl, alpha);
  auto assemble = [d](const Assignment& v) {
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(d.N, d.N);
    fill_phi(Phi, d, v);
    return Phi;
  };
  return affine_from_assembler(phi_layout(d, false), phi_block_dims(d, false),
                               phi_block_names(d, false), assemble);
}

AffineLmi build_phi_e(const LtiPlant& plant, const SampledController& ctrl,
                      double alpha, double sigma) {
  if (sigma < 0 || sigma >= 1)
    throw std::invalid_argument("build_phi_e: sigma must lie in [0, 1)");
  const PhiData d = phi_data(plant, ctrl, alpha);
  const int err_off = d.N;
  const int thr_off = d.N + d.m;
  auto assemble = [d, sigma, err_off, thr_off](const Assignment& v) {
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(d.N + 2 * d.m, d.N + 2 * d.m);
    fill_phi(Phi, d, v);
    const Eigen::MatrixXd& P = v.at("P");
    const Eigen::MatrixXd& Omega = v.at("Omega");

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d.l, d.l);
    for (int i = 1; i < d.r; ++i) {
      const auto& Ri = v.at("R" + std::to_string(i));
      const auto& Ki = d.K[static_cast<size_t>(i)];
      H += std::pow(d.q[static_cast<size_t>(i)] * d.h, d.r) * Ki.transpose() * Ri * Ki;
    }

    sym_set(Phi, d.x_off, err_off, P * d.B);
    sym_set(Phi, d.schur_off, err_off, H * d.CArm1 * d.B);
    sym_set(Phi, err_off, err_off, Eigen::MatrixXd(-Omega));

    sym_set(Phi, d.x_off, thr_off, sigma * d.KMC.transpose() * Omega);
    for (int off : d.delta_off) sym_set(Phi, off, thr_off, sigma * Omega);
    for (int off : d.kappa_off) sym_set(Phi, off, thr_off, sigma * Omega);
    sym_set(Phi, thr_off, thr_off, Eigen::MatrixXd(-sigma * Omega));
    return Phi;
  };
  return affine_from_assembler(phi_layout(d, true), phi_block_dims(d, true),
                               phi_block_names(d, true), assemble);
}

PidStateSpace pid_sampled_state_space(const PidPlant& plant,
                                      const SampledPidController& ctrl) {
  if (ctrl.h <= 0 || ctrl.q < 1)
    throw std::invalid_argument("pid_sampled_state_space: need h > 0 and q >= 1");
  const double qh = ctrl.q * ctrl.h;
  PidStateSpace ss;
  ss.A << 0, 1, 0,
      -plant.a2 + plant.b * (ctrl.kp + ctrl.kd), -plant.a1 - qh * plant.b * ctrl.kd,
      plant.b * ctrl.ki,
      1, 0, 0;
  ss.Av << 0, 0, 0,
      plant.b * ctrl.kp, 0, plant.b * ctrl.ki,
      1, 0, 0;
  ss.B << 0, plant.b, 0;
  return ss;
}

AffineLmi build_psi(const PidPlant& plant, const SampledPidController& ctrl, double alpha) {
  if (ctrl.h <= 0) throw std::invalid_argument("build_psi: h must be positive");
  if (ctrl.q < 1) throw std::invalid_argument("build_psi: q must be >= 1");
  if (ctrl.sigma < 0 || ctrl.sigma >= 1)
    throw std::invalid_argument("build_psi: sigma must lie in [0, 1)");
  if (alpha < 0) throw std::invalid_argument("build_psi: alpha must be nonnegative");

  const PidStateSpace ss = pid_sampled_state_space(plant, ctrl);
  const double h = ctrl.h;
  const double qh = ctrl.q * h;
  const double sigma = ctrl.sigma;
  const double alpha_ = alpha;
  const double kd = ctrl.kd, kp = ctrl.kp, ki = ctrl.ki;

  auto assemble = [=](const Assignment& v) {
    const double pi = std::numbers::pi;
    const Eigen::MatrixXd& P = v.at("P");
    const Eigen::MatrixXd& S = v.at("S");
    const double W = v.at("W")(0, 0);
    const double R = v.at("R")(0, 0);
    const double omega = v.at("omega")(0, 0);

    const Eigen::Matrix3d Lambda = Eigen::Vector3d(0, 1, 0).asDiagonal();
    const double e2ah = std::exp(2.0 * alpha_ * h);
    const double e2aqh = std::exp(-2.0 * alpha_ * qh);
    const Eigen::Matrix3d G =
        h * h * e2ah * S + Lambda * (R * kd * kd * qh * qh);
    const double sh = std::sqrt(h);

    // offsets: x 0-2, v 3-5, kd*delta 6, kd*kappa 7, error 8, threshold 9, schur 10-12
    Eigen::MatrixXd Psi = Eigen::MatrixXd::Zero(13, 13);
    Eigen::MatrixXd xx = P * ss.A + ss.A.transpose() * P + 2.0 * alpha_ * P +
                         Lambda * (W * kd * kd * h * h * e2ah);
    sym_set(Psi, 0, 0, xx);
    sym_set(Psi, 0, 3, Eigen::MatrixXd(P * ss.Av * sh));
    sym_set(Psi, 0, 6, Eigen::MatrixXd(P * ss.B));
    sym_set(Psi, 0, 7, Eigen::MatrixXd(P * ss.B));
    sym_set(Psi, 0, 8, Eigen::MatrixXd(P * ss.B));
    Eigen::Vector3d trig_x(kp + kd, -qh * kd, ki);
    sym_set(Psi, 0, 9, Eigen::MatrixXd(trig_x * (omega * sigma)));
    sym_set(Psi, 0, 10, Eigen::MatrixXd(ss.A.transpose() * G));

    sym_set(Psi, 3, 3, Eigen::MatrixXd(-(pi * pi / 4.0) * h * S));
    Eigen::Vector3d trig_v(kp, 0, ki);
    sym_set(Psi, 3, 9, Eigen::MatrixXd(trig_v * (omega * sigma * sh)));
    sym_set(Psi, 3, 10, Eigen::MatrixXd(ss.Av.transpose() * G * sh));

    Psi(6, 6) = -W * (pi * pi / 4.0) * e2aqh;
    Psi(6, 9) = Psi(9, 6) = omega * sigma;
    sym_set(Psi, 6, 10, Eigen::MatrixXd(ss.B.transpose() * G));

    Psi(7, 7) = -R * (4.0 / (qh * qh)) * e2aqh;
    Psi(7, 9) = Psi(9, 7) = omega * sigma;
    sym_set(Psi, 7, 10, Eigen::MatrixXd(ss.B.transpose() * G));

    Psi(8, 8) = -omega;
    sym_set(Psi, 8, 10, Eigen::MatrixXd(ss.B.transpose() * G));

    Psi(9, 9) = -omega * sigma;

    sym_set(Psi, 10, 10, Eigen::MatrixXd(-G));
    return Psi;
  };

  std::vector<VariableSpec> vars{
      {"P", 3, VarKind::SymmetricMatrix, true},
      {"S", 3, VarKind::SymmetricMatrix, true},
      {"W", 1, VarKind::Scalar, false},
      {"R", 1, VarKind::Scalar, false},
      {"omega", 1, VarKind::Scalar, false},
  };
  return affine_from_assembler(
      DecisionLayout(std::move(vars)), {3, 3, 1, 1, 1, 1, 3},
      {"x", "v", "delta", "kappa", "error", "threshold", "schur"}, assemble);
}

}  // namespace artdelay
