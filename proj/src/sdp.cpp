#include "artdelay/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace artdelay {

double FeasibilityProblem::resolved_margin() const {
  return margin >= 0 ? margin : 1e-9 * (1.0 + lmi.constant.norm());
}

double FeasibilityProblem::resolved_eps() const { return eps >= 0 ? eps : 1e-9; }

namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// LMI rows that are identically zero (constant and every coefficient) carry
// no constraint; they are dropped before the solve and reported separately.
struct Reduction {
  std::vector<int> keep;
  Eigen::MatrixXd constant;
  std::vector<Eigen::MatrixXd> coeffs;
  int full_dim = 0;
  bool any_dropped() const { return static_cast<int>(keep.size()) != full_dim; }
};

Reduction reduce_lmi(const AffineLmi& lmi) {
  const int N = lmi.dim();
  std::vector<char> nonzero(static_cast<size_t>(N), 0);
  auto mark = [&](const Eigen::MatrixXd& M) {
    for (int i = 0; i < N; ++i)
      if (!nonzero[static_cast<size_t>(i)] && M.row(i).cwiseAbs().maxCoeff() != 0.0)
        nonzero[static_cast<size_t>(i)] = 1;
  };
  mark(lmi.constant);
  for (const auto& M : lmi.coeffs) mark(M);

  Reduction red;
  red.full_dim = N;
  for (int i = 0; i < N; ++i)
    if (nonzero[static_cast<size_t>(i)]) red.keep.push_back(i);
  red.constant = lmi.constant(red.keep, red.keep);
  red.coeffs.reserve(lmi.coeffs.size());
  for (const auto& M : lmi.coeffs) red.coeffs.push_back(M(red.keep, red.keep));
  return red;
}

// Standard-form conic data: max b'y  s.t.  Z = C - sum_i y_i A_i >= 0,
// block-diagonal.
template <typename T>
struct StdForm {
  struct Entry {
    int block;
    Mat<T> A;
  };
  std::vector<int> dims;
  std::vector<Mat<T>> C;
  std::vector<std::vector<Entry>> cons;   // per y component
  std::vector<std::vector<int>> touching; // per block: constraint indices
  Vec<T> b;
  int total = 0;

  void finish() {
    total = 0;
    for (int d : dims) total += d;
    touching.assign(dims.size(), {});
    for (size_t i = 0; i < cons.size(); ++i)
      for (const auto& e : cons[i])
        touching[static_cast<size_t>(e.block)].push_back(static_cast<int>(i));
  }
};

template <typename T>
StdForm<T> cast_form(const StdForm<double>& f) {
  StdForm<T> out;
  out.dims = f.dims;
  for (const auto& M : f.C) out.C.push_back(M.template cast<T>());
  out.cons.resize(f.cons.size());
  for (size_t i = 0; i < f.cons.size(); ++i)
    for (const auto& e : f.cons[i])
      out.cons[i].push_back({e.block, e.A.template cast<T>()});
  out.b = f.b.template cast<T>();
  out.finish();
  return out;
}

template <typename T>
T block_dot(const std::vector<typename StdForm<T>::Entry>& parts,
            const std::vector<Mat<T>>& blocks) {
  T acc = 0;
  for (const auto& e : parts)
    acc += (e.A.cwiseProduct(blocks[static_cast<size_t>(e.block)])).sum();
  return acc;
}

// trace(A * U) for symmetric A and general U.
template <typename T>
T trace_prod(const Mat<T>& A, const Mat<T>& U) {
  return (A.cwiseProduct(U.transpose())).sum();
}

// Largest step with X + a dX staying positive semidefinite, via the
// spectrum of L^{-1} dX L^{-T}.
template <typename T>
T max_step(const Eigen::LLT<Mat<T>>& llt, const Mat<T>& dX) {
  Mat<T> W = llt.matrixL().solve(dX);
  W = llt.matrixL().solve(W.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(
      Mat<T>(((W + W.transpose()) / T(2))), Eigen::EigenvaluesOnly);
  const T lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0) return std::numeric_limits<T>::infinity();
  return T(1) / (-lmin);
}

enum class CoreKind { EarlyFeasible, Converged, IterationLimit, Breakdown };

struct CoreOutcome {
  CoreKind kind = CoreKind::IterationLimit;
  Eigen::VectorXd y;
  int iterations = 0;
  double rel_gap = 0;
  double rp_rel = 0;
  double rd_rel = 0;
  std::string note;
};

template <typename T>
CoreOutcome run_core(const StdForm<T>& P, const SolverSettings& st,
                     const std::function<bool(const Eigen::VectorXd&)>& early_check) {
  const int m = static_cast<int>(P.b.size());
  const int nb = static_cast<int>(P.dims.size());

  // block-wise infeasible start
  std::vector<Mat<T>> X(static_cast<size_t>(nb)), Z(static_cast<size_t>(nb));
  T normC = 0;
  for (int be = 0; be < nb; ++be) {
    const auto bu = static_cast<size_t>(be);
    T amax = 0;
    for (int i : P.touching[bu])
      for (const auto& e : P.cons[static_cast<size_t>(i)])
        if (e.block == be) amax = std::max(amax, e.A.norm());
    const T cn = P.C[bu].norm();
    normC += cn * cn;
    const T xi_d = std::max(T(10), std::max(cn, amax));
    const T xi_p = std::max(T(10), amax);
    X[bu] = Mat<T>::Identity(P.dims[bu], P.dims[bu]) * xi_p;
    Z[bu] = Mat<T>::Identity(P.dims[bu], P.dims[bu]) * xi_d;
  }
  normC = std::sqrt(normC);
  Vec<T> y = Vec<T>::Zero(m);
  const T normb = P.b.norm();

  CoreOutcome out;
  out.y = Eigen::VectorXd::Zero(m);
  double best_relgap = std::numeric_limits<double>::infinity();
  int last_progress = 0;
  int stall = 0;

  std::vector<Eigen::LLT<Mat<T>>> lltZ(static_cast<size_t>(nb)),
      lltX(static_cast<size_t>(nb));
  std::vector<Mat<T>> Zinv(static_cast<size_t>(nb)), Rd(static_cast<size_t>(nb));

  for (int it = 0; it < st.max_iterations; ++it) {
    out.iterations = it;
    out.y = y.template cast<double>();

    for (int be = 0; be < nb; ++be) {
      const auto bu = static_cast<size_t>(be);
      lltZ[bu].compute(Z[bu]);
      lltX[bu].compute(X[bu]);
      if (lltZ[bu].info() != Eigen::Success || lltX[bu].info() != Eigen::Success) {
        out.kind = CoreKind::Breakdown;
        out.note = "cholesky breakdown at iteration " + std::to_string(it);
        return out;
      }
      Zinv[bu] = lltZ[bu].solve(Mat<T>::Identity(P.dims[bu], P.dims[bu]));
    }

    // residuals and gap
    Vec<T> rp(m);
    for (int i = 0; i < m; ++i)
      rp(i) = P.b(i) - block_dot<T>(P.cons[static_cast<size_t>(i)], X);
    T gap = 0, pobj = 0;
    for (int be = 0; be < nb; ++be) {
      const auto bu = static_cast<size_t>(be);
      gap += (X[bu].cwiseProduct(Z[bu])).sum();
      pobj += (P.C[bu].cwiseProduct(X[bu])).sum();
      Rd[bu] = P.C[bu] - Z[bu];
    }
    for (int i = 0; i < m; ++i)
      if (y(i) != 0)
        for (const auto& e : P.cons[static_cast<size_t>(i)])
          Rd[static_cast<size_t>(e.block)] -= y(i) * e.A;
    const T dobj = P.b.dot(y);
    T rdsq = 0;
    for (const auto& R : Rd) rdsq += R.squaredNorm();

    out.rel_gap = static_cast<double>(gap / (T(1) + std::abs(pobj) + std::abs(dobj)));
    out.rp_rel = static_cast<double>(rp.norm() / (T(1) + normb));
    out.rd_rel = static_cast<double>(std::sqrt(rdsq) / (T(1) + normC));

    if (early_check && early_check(out.y)) {
      out.kind = CoreKind::EarlyFeasible;
      return out;
    }

    const bool resid_ok = out.rp_rel <= 1e-8 && out.rd_rel <= 1e-8;
    if (resid_ok && out.rel_gap <= st.duality_tol) {
      out.kind = CoreKind::Converged;
      return out;
    }
    if (out.rel_gap < 0.75 * best_relgap) {
      best_relgap = out.rel_gap;
      last_progress = it;
    }
    if (resid_ok && out.rel_gap <= 1e-7 && it - last_progress > 40) {
      out.kind = CoreKind::Converged;
      out.note = "progress plateau accepted at relative gap " +
                 std::to_string(out.rel_gap);
      return out;
    }

    // Schur complement matrix M_ij = <A_i, X A_j Zinv>
    Mat<T> M = Mat<T>::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      for (const auto& e : P.cons[static_cast<size_t>(j)]) {
        const auto bu = static_cast<size_t>(e.block);
        const Mat<T> U = X[bu] * e.A * Zinv[bu];
        for (int i : P.touching[bu]) {
          for (const auto& ei : P.cons[static_cast<size_t>(i)])
            if (ei.block == e.block) M(i, j) += trace_prod<T>(ei.A, U);
        }
      }
    }
    M = ((M + M.transpose()) / T(2)).eval();
    Eigen::LDLT<Mat<T>> ldlt(M);
    if (ldlt.info() != Eigen::Success) {
      out.kind = CoreKind::Breakdown;
      out.note = "schur factorization failed at iteration " + std::to_string(it);
      return out;
    }

    // Q = X Rd Zinv per block, shared by both passes
    std::vector<Mat<T>> Q(static_cast<size_t>(nb));
    for (size_t bu = 0; bu < Q.size(); ++bu) Q[bu] = X[bu] * Rd[bu] * Zinv[bu];

    auto solve_direction = [&](T nu, const std::vector<Mat<T>>* Kc,
                               std::vector<Mat<T>>& dX, Vec<T>& dy,
                               std::vector<Mat<T>>& dZ) {
      Vec<T> rhs(m);
      for (int i = 0; i < m; ++i) {
        T v = P.b(i) + block_dot<T>(P.cons[static_cast<size_t>(i)], Q);
        if (nu != 0)
          for (const auto& e : P.cons[static_cast<size_t>(i)])
            v -= nu * (e.A.cwiseProduct(Zinv[static_cast<size_t>(e.block)])).sum();
        if (Kc) {
          for (const auto& e : P.cons[static_cast<size_t>(i)]) {
            const auto bu = static_cast<size_t>(e.block);
            v += trace_prod<T>(e.A, Mat<T>((*Kc)[bu] * Zinv[bu]));
          }
        }
        rhs(i) = v;
      }
      dy = ldlt.solve(rhs);
      dZ.assign(static_cast<size_t>(nb), Mat<T>());
      for (int be = 0; be < nb; ++be) dZ[static_cast<size_t>(be)] = Rd[static_cast<size_t>(be)];
      for (int i = 0; i < m; ++i)
        for (const auto& e : P.cons[static_cast<size_t>(i)])
          dZ[static_cast<size_t>(e.block)] -= dy(i) * e.A;
      dX.assign(static_cast<size_t>(nb), Mat<T>());
      for (int be = 0; be < nb; ++be) {
        const auto bu = static_cast<size_t>(be);
        Mat<T> raw = -X[bu] - X[bu] * dZ[bu] * Zinv[bu];
        if (nu != 0) raw += nu * Zinv[bu];
        if (Kc) raw -= (*Kc)[bu] * Zinv[bu];
        dX[bu] = ((raw + raw.transpose()) / T(2)).eval();
      }
    };

    auto step_bound = [&](const std::vector<Eigen::LLT<Mat<T>>>& llt,
                          const std::vector<Mat<T>>& d) {
      T a = std::numeric_limits<T>::infinity();
      for (size_t bu = 0; bu < d.size(); ++bu)
        a = std::min(a, max_step<T>(llt[bu], d[bu]));
      return a;
    };

    // predictor
    std::vector<Mat<T>> dXa, dZa;
    Vec<T> dya;
    solve_direction(T(0), nullptr, dXa, dya, dZa);
    const T tau = T(0.98);
    T ap = std::min(T(1), tau * step_bound(lltX, dXa));
    T ad = std::min(T(1), tau * step_bound(lltZ, dZa));

    T gap_aff = 0;
    for (int be = 0; be < nb; ++be) {
      const auto bu = static_cast<size_t>(be);
      gap_aff += ((X[bu] + ap * dXa[bu]).cwiseProduct(Z[bu] + ad * dZa[bu])).sum();
    }
    T sigma = gap > 0 ? std::pow(std::max(T(0), gap_aff / gap), T(3)) : T(0);
    sigma = std::min(T(1), sigma);
    const T nu = sigma * gap / T(P.total);

    // corrector
    std::vector<Mat<T>> Kc(static_cast<size_t>(nb));
    for (int be = 0; be < nb; ++be) {
      const auto bu = static_cast<size_t>(be);
      Kc[bu] = dXa[bu] * dZa[bu];
    }
    std::vector<Mat<T>> dX, dZ;
    Vec<T> dy;
    solve_direction(nu, &Kc, dX, dy, dZ);

    ap = std::min(T(1), tau * step_bound(lltX, dX));
    ad = std::min(T(1), tau * step_bound(lltZ, dZ));

    bool bad = !std::isfinite(static_cast<double>(ap)) ||
               !std::isfinite(static_cast<double>(ad));
    for (int i = 0; i < m && !bad; ++i)
      if (!std::isfinite(static_cast<double>(dy(i)))) bad = true;
    if (bad) {
      out.kind = CoreKind::Breakdown;
      out.note = "non-finite direction at iteration " + std::to_string(it);
      return out;
    }

    if (ap < T(1e-10) && ad < T(1e-10)) {
      if (++stall >= 5) {
        out.kind = CoreKind::IterationLimit;
        out.note = "step sizes collapsed at iteration " + std::to_string(it);
        return out;
      }
    } else {
      stall = 0;
    }

    for (int be = 0; be < nb; ++be) {
      const auto bu = static_cast<size_t>(be);
      X[bu] = ((X[bu] + ap * dX[bu] + (X[bu] + ap * dX[bu]).transpose()) / T(2)).eval();
      Z[bu] = ((Z[bu] + ad * dZ[bu] + (Z[bu] + ad * dZ[bu]).transpose()) / T(2)).eval();
    }
    y += ad * dy;
  }

  out.kind = CoreKind::IterationLimit;
  out.note = "iteration limit reached";
  return out;
}

}  // namespace

nlohmann::json Certificate::to_json() const {
  nlohmann::json j;
  j["values"] = assignment_to_json(values);
  j["lambda_max"] = lambda_max;
  j["lambda_max_full"] = lambda_max_full;
  j["margin"] = margin;
  j["stats"] = {{"iterations", stats.iterations},
                {"duality_gap", stats.duality_gap},
                {"primal_residual", stats.primal_residual},
                {"dual_residual", stats.dual_residual},
                {"early_exit", stats.early_exit},
                {"extended_precision", stats.extended_precision},
                {"note", stats.note}};
  return j;
}

Certificate Certificate::from_json(const nlohmann::json& j) {
  Certificate c;
  c.values = assignment_from_json(j.at("values"));
  c.lambda_max = j.at("lambda_max").get<double>();
  c.lambda_max_full = j.at("lambda_max_full").get<double>();
  c.margin = j.at("margin").get<double>();
  const auto& s = j.at("stats");
  c.stats.iterations = s.at("iterations").get<int>();
  c.stats.duality_gap = s.at("duality_gap").get<double>();
  c.stats.primal_residual = s.at("primal_residual").get<double>();
  c.stats.dual_residual = s.at("dual_residual").get<double>();
  c.stats.early_exit = s.at("early_exit").get<bool>();
  c.stats.extended_precision = s.at("extended_precision").get<bool>();
  c.stats.note = s.at("note").get<std::string>();
  return c;
}

FeasibilityOutcome solve_feasibility(const AffineLmi& lmi, const SolverSettings& settings) {
  FeasibilityProblem p;
  p.lmi = lmi;
  return solve_feasibility(p, settings);
}

FeasibilityOutcome solve_feasibility(const FeasibilityProblem& problem,
                                     const SolverSettings& settings) {
  const AffineLmi& lmi = problem.lmi;
  const int np = lmi.layout.param_count();
  if (static_cast<int>(lmi.coeffs.size()) != np)
    throw std::invalid_argument("solve_feasibility: malformed AffineLmi");
  const double mu = problem.resolved_margin();
  const double eps = problem.resolved_eps();

  FeasibilityOutcome out;

  if (np == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmi.constant, Eigen::EigenvaluesOnly);
    const double lmax = lmi.dim() ? es.eigenvalues().maxCoeff() : 0.0;
    out.best_lambda = lmax;
    if (lmax <= -mu) {
      out.status = FeasStatus::Feasible;
      Certificate c;
      c.lambda_max = c.lambda_max_full = lmax;
      c.margin = mu;
      out.certificate = std::move(c);
    } else if (lmax >= mu) {
      out.status = FeasStatus::Infeasible;
    }
    out.message = "no decision variables";
    return out;
  }

  const Reduction red = reduce_lmi(lmi);
  const int Nr = static_cast<int>(red.keep.size());
  const bool homogeneous = lmi.constant.norm() == 0.0;
  const auto& vars = lmi.layout.variables();

  if (Nr == 0) {
    // every row is structurally zero: any assignment meeting the floors works
    Certificate c;
    for (const auto& v : vars)
      c.values.emplace(v.name, Eigen::MatrixXd::Identity(v.dim, v.dim));
    c.lambda_max = 0.0;
    c.lambda_max_full = 0.0;
    c.margin = mu;
    c.stats.note = "constraint matrix is structurally zero";
    out.status = FeasStatus::Feasible;
    out.message = c.stats.note;
    out.certificate = std::move(c);
    return out;
  }

  // variable floors; homogeneous problems are normalized to unit scale
  std::vector<double> floor_of(vars.size());
  for (size_t v = 0; v < vars.size(); ++v) {
    if (vars[v].kind == VarKind::SymmetricMatrix)
      floor_of[v] = homogeneous ? 1.0 : eps;
    else
      floor_of[v] = homogeneous ? 1.0 : 0.0;
  }

  // coefficient scaling
  Eigen::VectorXd scale(np);
  for (int p = 0; p < np; ++p) {
    const double nrm = red.coeffs[static_cast<size_t>(p)].norm();
    scale(p) = nrm > 0 ? 1.0 / nrm : 1.0;
  }

  // standard form: blocks are [lmi slack][one per variable][trace budget]
  StdForm<double> form;
  form.dims.push_back(Nr);
  form.C.push_back(-red.constant);
  for (size_t v = 0; v < vars.size(); ++v) {
    form.dims.push_back(vars[v].dim);
    form.C.push_back(-floor_of[v] *
                     Eigen::MatrixXd::Identity(vars[v].dim, vars[v].dim));
  }
  form.dims.push_back(1);
  form.C.push_back(Eigen::MatrixXd::Constant(1, 1, settings.trace_budget));
  const int budget_block = static_cast<int>(form.dims.size()) - 1;

  form.cons.resize(static_cast<size_t>(np) + 1);
  for (int p = 0; p < np; ++p) {
    auto& parts = form.cons[static_cast<size_t>(p)];
    if (red.coeffs[static_cast<size_t>(p)].norm() > 0)
      parts.push_back({0, scale(p) * red.coeffs[static_cast<size_t>(p)]});
    const int v = lmi.layout.var_of_param(p);
    parts.push_back({1 + v, -scale(p) * lmi.layout.basis(p)});
    if (lmi.layout.is_diagonal_param(p))
      parts.push_back({budget_block, Eigen::MatrixXd::Constant(1, 1, scale(p))});
  }
  form.cons[static_cast<size_t>(np)].push_back(
      {0, -Eigen::MatrixXd::Identity(Nr, Nr)});
  form.b = Eigen::VectorXd::Zero(np + 1);
  form.b(np) = -1.0;
  form.finish();

  // explicit feasibility check on an iterate, in original variable units
  auto unscale = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd theta(np);
    for (int p = 0; p < np; ++p) theta(p) = scale(p) * y(p);
    return theta;
  };
  auto explicit_ok = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd theta = unscale(y);
    Eigen::MatrixXd F = red.constant;
    for (int p = 0; p < np; ++p)
      if (theta(p) != 0.0) F += theta(p) * red.coeffs[static_cast<size_t>(p)];
    if (Nr > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F, Eigen::EigenvaluesOnly);
      const double lmax = es.eigenvalues().maxCoeff();
      if (lmax > -std::max(mu, 1e-12 * (1.0 + F.norm()))) return false;
    }
    const Assignment a = lmi.layout.unpack(theta);
    for (const auto& v : vars) {
      const Eigen::MatrixXd& Xv = a.at(v.name);
      if (v.kind == VarKind::SymmetricMatrix && v.positive_definite) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Xv, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < 0.9 * eps) return false;
      } else if (Xv(0, 0) < 0) {
        return false;
      }
    }
    return true;
  };

  auto finish_feasible = [&](const Eigen::VectorXd& y, const CoreOutcome& core,
                             bool extended) {
    const Eigen::VectorXd theta = unscale(y);
    Certificate c;
    c.values = lmi.layout.unpack(theta);
    Eigen::MatrixXd Fr = red.constant;
    for (int p = 0; p < np; ++p)
      if (theta(p) != 0.0) Fr += theta(p) * red.coeffs[static_cast<size_t>(p)];
    c.lambda_max =
        Nr > 0 ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Fr, Eigen::EigenvaluesOnly)
                     .eigenvalues()
                     .maxCoeff()
               : 0.0;
    const Eigen::MatrixXd Ff = lmi.evaluate(theta);
    c.lambda_max_full =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Ff, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .maxCoeff();
    c.margin = mu;
    c.stats.iterations = core.iterations;
    c.stats.duality_gap = core.rel_gap;
    c.stats.primal_residual = core.rp_rel;
    c.stats.dual_residual = core.rd_rel;
    c.stats.early_exit = core.kind == CoreKind::EarlyFeasible;
    c.stats.extended_precision = extended;
    c.stats.note = core.note;
    out.best_lambda = c.lambda_max;
    out.stats = c.stats;
    out.status = FeasStatus::Feasible;
    out.certificate = std::move(c);
  };

  auto classify = [&](const CoreOutcome& core, bool extended) {
    out.stats.iterations = core.iterations;
    out.stats.duality_gap = core.rel_gap;
    out.stats.primal_residual = core.rp_rel;
    out.stats.dual_residual = core.rd_rel;
    out.stats.extended_precision = extended;
    out.stats.note = core.note;

    if (core.kind == CoreKind::EarlyFeasible) {
      finish_feasible(core.y, core, extended);
      out.message = "feasible by explicit check";
      return;
    }
    const double t = core.y(np);
    out.best_lambda = t;
    if (core.kind == CoreKind::Converged) {
      if (t <= -mu) {
        if (explicit_ok(core.y)) {
          finish_feasible(core.y, core, extended);
          out.message = "feasible at convergence";
          return;
        }
        if (homogeneous) {
          // scale the certificate up to restore the floors
          const Eigen::VectorXd theta = unscale(core.y);
          const Assignment a = lmi.layout.unpack(theta);
          double c = 1.0;
          bool scalable = true;
          for (const auto& v : vars) {
            const Eigen::MatrixXd& Xv = a.at(v.name);
            double lmin;
            if (v.kind == VarKind::SymmetricMatrix) {
              lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                         Xv, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .minCoeff();
            } else {
              lmin = Xv(0, 0);
            }
            if (lmin <= 0) {
              scalable = false;
              break;
            }
            c = std::max(c, eps / lmin);
          }
          if (scalable) {
            Eigen::VectorXd ys = core.y * c;
            if (explicit_ok(ys)) {
              finish_feasible(ys, core, extended);
              out.message = "feasible after homogeneous rescale";
              return;
            }
          }
        }
        out.status = FeasStatus::Inconclusive;
        out.message = "dual optimum is negative but the iterate fails the explicit check";
        return;
      }
      if (t >= mu) {
        out.status = FeasStatus::Infeasible;
        out.message = "minimized eigenvalue bound " + std::to_string(t) +
                      " exceeds the margin";
        return;
      }
      out.status = FeasStatus::Inconclusive;
      out.message = "optimum lies inside the (-margin, margin) band";
      return;
    }
    out.status = FeasStatus::Inconclusive;
    out.message = core.note.empty() ? "no conclusion" : core.note;
  };

  CoreOutcome core = run_core<double>(form, settings, explicit_ok);
  classify(core, false);

  if (out.status == FeasStatus::Inconclusive && settings.retry_long_double) {
    StdForm<long double> lform = cast_form<long double>(form);
    CoreOutcome lcore = run_core<long double>(lform, settings, explicit_ok);
    FeasibilityOutcome first = out;
    out = FeasibilityOutcome{};
    classify(lcore, true);
    if (out.status == FeasStatus::Inconclusive) {
      out.message += " (double pass: " + first.message + ")";
    }
  }
  return out;
}

VerifyReport verify_certificate(const AffineLmi& lmi, const Assignment& values,
                                double eps) {
  VerifyReport rep;
  const Eigen::MatrixXd F = lmi.evaluate(values);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F, Eigen::EigenvaluesOnly);
  rep.lambda_max = es.eigenvalues().maxCoeff();
  rep.scale = 1.0 + F.norm();
  bool ok = rep.lambda_max <= 1e-8 * rep.scale;
  if (!ok)
    rep.failures.push_back("lmi eigenvalue " + std::to_string(rep.lambda_max) +
                           " above tolerance");
  for (const auto& v : lmi.layout.variables()) {
    auto it = values.find(v.name);
    if (it == values.end()) {
      rep.failures.push_back("missing variable " + v.name);
      ok = false;
      continue;
    }
    double lmin;
    if (v.kind == VarKind::SymmetricMatrix) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ev(it->second,
                                                        Eigen::EigenvaluesOnly);
      lmin = ev.eigenvalues().minCoeff();
    } else {
      lmin = it->second(0, 0);
    }
    rep.variable_min_eig[v.name] = lmin;
    if (v.kind == VarKind::SymmetricMatrix && v.positive_definite) {
      if (lmin < eps / 2) {
        rep.failures.push_back("variable " + v.name + " is not positive definite");
        ok = false;
      }
    } else if (lmin < 0) {
      rep.failures.push_back("variable " + v.name + " is negative");
      ok = false;
    }
  }
  rep.pass = ok;
  return rep;
}

}  // namespace artdelay
