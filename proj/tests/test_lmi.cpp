#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "artdelay/lmi.hpp"
#include "artdelay/model.hpp"
#include "artdelay/synthesis.hpp"
#include "fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace artdelay;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = u(rng);
  return 0.5 * (M + M.transpose());
}

Assignment random_assignment(const DecisionLayout& layout, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Assignment a;
  for (const auto& v : layout.variables()) {
    if (v.kind == VarKind::SymmetricMatrix)
      a[v.name] = random_symmetric(v.dim, rng);
    else
      a[v.name] = Eigen::MatrixXd::Constant(1, 1, u(rng));
  }
  return a;
}

// Direct dense reconstruction of the periodic condition for SISO plants,
// written independently of the library assembler.
Eigen::MatrixXd phi_direct(const LtiPlant& plant, const SampledController& ctrl,
                           double alpha, const Assignment& v, double sigma = -1) {
  const int n = plant.n();
  const int r = ctrl.r();
  const double h = ctrl.h;
  const double pi = std::numbers::pi;
  REQUIRE(plant.m() == 1);
  REQUIRE(plant.l() == 1);

  Eigen::MatrixXd Cbar = stacked_output_map(plant, r);
  Eigen::MatrixXd M = build_M(h, ctrl.q, r, 1);
  Eigen::MatrixXd Kfull(1, r);
  for (int i = 0; i < r; ++i) Kfull(0, i) = ctrl.K[static_cast<size_t>(i)](0, 0);
  Eigen::MatrixXd D = plant.A + plant.B * Kfull * M * Cbar;
  Eigen::MatrixXd CA = plant.C * plant.A;
  Eigen::MatrixXd CArm1 = plant.C;
  for (int i = 0; i < r - 1; ++i) CArm1 = CArm1 * plant.A;

  const Eigen::MatrixXd& P = v.at("P");
  std::vector<double> W(static_cast<size_t>(r)), R(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) W[static_cast<size_t>(i)] = v.at("W" + std::to_string(i))(0, 0);
  for (int i = 1; i < r; ++i) R[static_cast<size_t>(i)] = v.at("R" + std::to_string(i))(0, 0);

  std::vector<double> qh(static_cast<size_t>(r), 0.0);
  for (int i = 1; i < r; ++i) qh[static_cast<size_t>(i)] = ctrl.q[static_cast<size_t>(i - 1)] * h;
  double H = 0;
  for (int i = 1; i < r; ++i)
    H += std::pow(qh[static_cast<size_t>(i)], r) * Kfull(0, i) * Kfull(0, i) *
         R[static_cast<size_t>(i)];

  double fact_r = 1;
  for (int i = 2; i <= r; ++i) fact_r *= i;

  const int N = n + r + (r - 1) + 1;
  const bool ev = sigma >= 0;
  const int Ne = ev ? N + 2 : N;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(Ne, Ne);

  Eigen::MatrixXd F11 = P * D + D.transpose() * P + 2 * alpha * P;
  for (int i = 0; i < r; ++i)
    F11 += h * h * std::exp(2 * alpha * h) * W[static_cast<size_t>(i)] * Kfull(0, i) *
           Kfull(0, i) * CA.transpose() * CA;
  F.block(0, 0, n, n) = F11;

  for (int i = 0; i < r; ++i) {
    F.block(0, n + i, n, 1) = P * plant.B;
    F.block(n + i, 0, 1, n) = (P * plant.B).transpose();
    F(n + i, n + i) = -(pi * pi / 4.0) * std::exp(-2 * alpha * qh[static_cast<size_t>(i)]) *
                      W[static_cast<size_t>(i)];
  }
  for (int i = 1; i < r; ++i) {
    const int at = n + r + (i - 1);
    F.block(0, at, n, 1) = P * plant.B;
    F.block(at, 0, 1, n) = (P * plant.B).transpose();
    F(at, at) = -fact_r * fact_r * std::exp(-2 * alpha * qh[static_cast<size_t>(i)]) /
                std::pow(qh[static_cast<size_t>(i)], r) * R[static_cast<size_t>(i)];
  }
  const int sc = n + r + (r - 1);
  F.block(0, sc, n, 1) = (CArm1 * D).transpose() * H;
  F.block(sc, 0, 1, n) = F.block(0, sc, n, 1).transpose();
  const double cab = (CArm1 * plant.B)(0, 0);
  for (int i = 0; i < r + (r - 1); ++i) {
    F(n + i, sc) = cab * H;
    F(sc, n + i) = cab * H;
  }
  F(sc, sc) = -H;

  if (ev) {
    const double Om = v.at("Omega")(0, 0);
    Eigen::MatrixXd KMC = Kfull * M * Cbar;  // 1 x n
    const int er = N, th = N + 1;
    F.block(0, er, n, 1) = P * plant.B;
    F.block(er, 0, 1, n) = (P * plant.B).transpose();
    F(sc, er) = F(er, sc) = H * cab;
    F(er, er) = -Om;
    F.block(0, th, n, 1) = sigma * KMC.transpose() * Om;
    F.block(th, 0, 1, n) = F.block(0, th, n, 1).transpose();
    for (int i = 0; i < r + (r - 1); ++i) F(n + i, th) = F(th, n + i) = sigma * Om;
    F(th, th) = -sigma * Om;
  }
  return F;
}

// Direct dense reconstruction of the PID condition.
Eigen::MatrixXd psi_direct(const PidPlant& pl, const SampledPidController& c,
                           double alpha, const Assignment& v) {
  const double kp = c.kp, ki = c.ki, kd = c.kd, h = c.h, sigma = c.sigma;
  const double qh = c.q * h;
  const double pi = std::numbers::pi;
  Eigen::Matrix3d A;
  A << 0, 1, 0, -pl.a2 + pl.b * (kp + kd), -pl.a1 - qh * pl.b * kd, pl.b * ki, 1, 0, 0;
  Eigen::Matrix3d Av;
  Av << 0, 0, 0, pl.b * kp, 0, pl.b * ki, 1, 0, 0;
  Eigen::Vector3d B(0, pl.b, 0);
  Eigen::Matrix3d Lam = Eigen::Vector3d(0, 1, 0).asDiagonal();

  const Eigen::MatrixXd& P = v.at("P");
  const Eigen::MatrixXd& S = v.at("S");
  const double W = v.at("W")(0, 0), R = v.at("R")(0, 0), om = v.at("omega")(0, 0);

  const double e2ah = std::exp(2 * alpha * h);
  const double sh = std::sqrt(h);
  Eigen::Matrix3d G = h * h * e2ah * S + Lam * (R * kd * kd * qh * qh);

  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(13, 13);
  auto put = [&](int i, int j, const Eigen::MatrixXd& M) {
    F.block(i, j, M.rows(), M.cols()) = M;
    F.block(j, i, M.cols(), M.rows()) = M.transpose();
  };
  put(0, 0, Eigen::MatrixXd(P * A + A.transpose() * P + 2 * alpha * P +
                            Lam * (W * kd * kd * h * h * e2ah)));
  put(0, 3, Eigen::MatrixXd(P * Av * sh));
  put(0, 6, Eigen::MatrixXd(P * B));
  put(0, 7, Eigen::MatrixXd(P * B));
  put(0, 8, Eigen::MatrixXd(P * B));
  put(0, 9, Eigen::MatrixXd(Eigen::Vector3d(kp + kd, -qh * kd, ki) * om * sigma));
  put(0, 10, Eigen::MatrixXd(A.transpose() * G));
  put(3, 3, Eigen::MatrixXd(-(pi * pi / 4.0) * h * S));
  put(3, 9, Eigen::MatrixXd(Eigen::Vector3d(kp, 0, ki) * om * sigma * sh));
  put(3, 10, Eigen::MatrixXd(Av.transpose() * G * sh));
  F(6, 6) = -W * (pi * pi / 4.0) * std::exp(-2 * alpha * qh);
  F(6, 9) = F(9, 6) = om * sigma;
  put(6, 10, Eigen::MatrixXd(B.transpose() * G));
  F(7, 7) = -R * (4.0 / (qh * qh)) * std::exp(-2 * alpha * qh);
  F(7, 9) = F(9, 7) = om * sigma;
  put(7, 10, Eigen::MatrixXd(B.transpose() * G));
  F(8, 8) = -om;
  put(8, 10, Eigen::MatrixXd(B.transpose() * G));
  F(9, 9) = -om * sigma;
  put(10, 10, Eigen::MatrixXd(-G));
  return F;
}

}  // namespace

TEST_CASE("DecisionLayout maps variables to a flat parameter vector") {
  DecisionLayout layout({{"P", 3, VarKind::SymmetricMatrix, true},
                         {"w", 1, VarKind::Scalar, false}});
  CHECK(layout.param_count() == 7);  // 6 upper-triangle entries + 1 scalar
  CHECK(layout.offset(0) == 0);
  CHECK(layout.offset(1) == 6);
  CHECK(layout.span(0) == 6);
  CHECK(layout.var_of_param(5) == 0);
  CHECK(layout.var_of_param(6) == 1);

  auto [a0, b0] = layout.entry(0);
  CHECK(a0 == 0);
  CHECK(b0 == 0);
  CHECK(layout.is_diagonal_param(0));
  auto [a1, b1] = layout.entry(1);
  CHECK(a1 == 0);
  CHECK(b1 == 1);
  CHECK_FALSE(layout.is_diagonal_param(1));

  // off-diagonal basis carries both symmetric entries
  Eigen::MatrixXd E = layout.basis(1);
  CHECK(E(0, 1) == 1.0);
  CHECK(E(1, 0) == 1.0);
  CHECK(E(0, 0) == 0.0);

  Assignment a = random_assignment(layout, 7);
  Eigen::VectorXd p = layout.pack(a);
  Assignment back = layout.unpack(p);
  CHECK((back.at("P") - a.at("P")).norm() == 0.0);
  CHECK(back.at("w")(0, 0) == a.at("w")(0, 0));
}

TEST_CASE("affine_from_assembler reproduces an affine map exactly") {
  DecisionLayout layout({{"X", 2, VarKind::SymmetricMatrix, true}});
  Eigen::Matrix2d A;
  A << -1, 1, 0, -2;
  auto lmi = affine_from_assembler(
      layout, {2}, {"x"}, [&](const Assignment& v) -> Eigen::MatrixXd {
        return A.transpose() * v.at("X") + v.at("X") * A;
      });
  CHECK(lmi.dim() == 2);
  CHECK(lmi.constant.norm() == 0.0);

  Assignment a = random_assignment(layout, 3);
  Eigen::MatrixXd direct = A.transpose() * a.at("X") + a.at("X") * A;
  CHECK((lmi.evaluate(a) - direct).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("affine_from_assembler rejects asymmetric assemblers") {
  DecisionLayout layout({{"x", 1, VarKind::Scalar, false}});
  CHECK_THROWS(affine_from_assembler(layout, {2}, {"b"},
                                     [](const Assignment& v) -> Eigen::MatrixXd {
                                       Eigen::Matrix2d M;
                                       M << 0, v.at("x")(0, 0), 0, 0;
                                       return M;
                                     }));
}

TEST_CASE("periodic condition matches an independent reconstruction") {
  auto plant = fixtures::triple_integrator();
  auto ctrl = map_gains(fixtures::triple_integrator_gains(), 0.044, {30, 60});
  const double alpha = 1e-3;
  AffineLmi lmi = build_phi(plant, ctrl, alpha);

  CHECK(lmi.dim() == 9);
  CHECK(lmi.block_dims == std::vector<int>{3, 1, 1, 1, 1, 1, 1});
  CHECK(lmi.layout.variables().size() == 6);  // P, W0..W2, R1, R2

  for (unsigned seed : {1u, 2u, 3u}) {
    Assignment a = random_assignment(lmi.layout, seed);
    Eigen::MatrixXd got = lmi.evaluate(a);
    Eigen::MatrixXd want = phi_direct(plant, ctrl, alpha, a);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((got - got.transpose()).norm() == 0.0);
  }
}

TEST_CASE("periodic condition unit-assignment diagonals") {
  auto plant = fixtures::triple_integrator();
  auto ctrl = map_gains(fixtures::triple_integrator_gains(), 0.044, {30, 60});
  const double alpha = 1e-3;
  AffineLmi lmi = build_phi(plant, ctrl, alpha);

  Assignment a;
  for (const auto& v : lmi.layout.variables())
    a[v.name] = Eigen::MatrixXd::Zero(v.dim, v.dim);
  a["W1"] = Eigen::MatrixXd::Constant(1, 1, 1.0);
  Eigen::MatrixXd F = lmi.evaluate(a);
  const double pi = std::numbers::pi;
  CHECK(F(4, 4) == doctest::Approx(-(pi * pi / 4) * std::exp(-2 * alpha * 30 * 0.044))
                       .epsilon(1e-12));

  a["W1"].setZero();
  a["R2"] = Eigen::MatrixXd::Constant(1, 1, 1.0);
  F = lmi.evaluate(a);
  const double qh = 60 * 0.044;
  CHECK(F(7, 7) ==
        doctest::Approx(-36.0 * std::exp(-2 * alpha * qh) / std::pow(qh, 3)).epsilon(1e-12));
  // schur diagonal carries -(q h)^r K_2^2 R_2
  const double k2 = ctrl.K[2](0, 0);
  CHECK(F(8, 8) == doctest::Approx(-std::pow(qh, 3) * k2 * k2).epsilon(1e-12));
}

TEST_CASE("event condition matches an independent reconstruction") {
  auto plant = fixtures::triple_integrator();
  auto ctrl = map_gains(fixtures::triple_integrator_gains(), 0.042, {30, 60});
  const double alpha = 1e-3, sigma = 2e-3;
  AffineLmi lmi = build_phi_e(plant, ctrl, alpha, sigma);

  CHECK(lmi.dim() == 11);
  CHECK(lmi.layout.variables().size() == 7);  // + Omega

  for (unsigned seed : {4u, 5u}) {
    Assignment a = random_assignment(lmi.layout, seed);
    Eigen::MatrixXd got = lmi.evaluate(a);
    Eigen::MatrixXd want = phi_direct(plant, ctrl, alpha, a, sigma);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("event condition at sigma=0 degenerates to the periodic core") {
  auto plant = fixtures::triple_integrator();
  auto ctrl = map_gains(fixtures::triple_integrator_gains(), 0.044, {30, 60});
  const double alpha = 1e-3;
  AffineLmi phie = build_phi_e(plant, ctrl, alpha, 0.0);
  AffineLmi phi = build_phi(plant, ctrl, alpha);

  Assignment a = random_assignment(phie.layout, 11);
  Eigen::MatrixXd Fe = phie.evaluate(a);

  // threshold row/column is structurally zero
  const int th = phie.dim() - 1;
  CHECK(Fe.row(th).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Fe.col(th).cwiseAbs().maxCoeff() == 0.0);

  // top-left block equals the periodic condition at the same variables
  Assignment core = a;
  core.erase("Omega");
  Eigen::MatrixXd F = phi.evaluate(core);
  CHECK((Fe.topLeftCorner(phi.dim(), phi.dim()) - F).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("PID sampled state space") {
  auto pl = fixtures::servo();
  auto c = map_pid_gains(fixtures::servo_gains(), 4.7e-3, 7);
  PidStateSpace ss = pid_sampled_state_space(pl, c);
  // the proportional/derivative split recombines to the ideal gain here
  CHECK(ss.A(1, 0) == doctest::Approx(-pl.a2 + pl.b * -10.0).epsilon(1e-12));
  CHECK(ss.A(1, 1) == doctest::Approx(-pl.a1 - 7 * 4.7e-3 * pl.b * c.kd).epsilon(1e-12));
  CHECK(ss.A(1, 2) == doctest::Approx(pl.b * c.ki).epsilon(1e-12));
  CHECK(ss.A(0, 1) == 1.0);
  CHECK(ss.A(2, 0) == 1.0);
  CHECK(ss.Av(1, 0) == doctest::Approx(pl.b * c.kp).epsilon(1e-12));
  CHECK(ss.Av(1, 2) == doctest::Approx(pl.b * c.ki).epsilon(1e-12));
  CHECK(ss.B(1) == pl.b);
}

TEST_CASE("PID condition matches an independent reconstruction") {
  auto pl = fixtures::servo();
  const double alpha = 5.0;
  for (auto [h, sigma] : {std::pair{4.7e-3, 0.0}, std::pair{4e-3, 9e-3}}) {
    auto c = map_pid_gains(fixtures::servo_gains(), h, 7, sigma);
    AffineLmi lmi = build_psi(pl, c, alpha);
    CHECK(lmi.dim() == 13);
    for (unsigned seed : {6u, 7u}) {
      Assignment a = random_assignment(lmi.layout, seed);
      Eigen::MatrixXd got = lmi.evaluate(a);
      Eigen::MatrixXd want = psi_direct(pl, c, alpha, a);
      CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("PID condition at sigma=0 has a structurally zero threshold row") {
  auto c = map_pid_gains(fixtures::servo_gains(), 4.7e-3, 7, 0.0);
  AffineLmi lmi = build_psi(fixtures::servo(), c, 5.0);
  Assignment a = random_assignment(lmi.layout, 21);
  Eigen::MatrixXd F = lmi.evaluate(a);
  CHECK(F.row(9).cwiseAbs().maxCoeff() == 0.0);
  CHECK(F.col(9).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("AffineLmi JSON round-trip is exact") {
  auto plant = fixtures::triple_integrator();
  auto ctrl = map_gains(fixtures::triple_integrator_gains(), 0.044, {30, 60});
  AffineLmi lmi = build_phi(plant, ctrl, 1e-3);

  AffineLmi back = AffineLmi::from_json(lmi.to_json());
  CHECK(back.dim() == lmi.dim());
  CHECK(back.block_dims == lmi.block_dims);
  CHECK(back.block_names == lmi.block_names);
  CHECK(back.layout.param_count() == lmi.layout.param_count());
  CHECK((back.constant - lmi.constant).norm() == 0.0);
  REQUIRE(back.coeffs.size() == lmi.coeffs.size());
  for (size_t p = 0; p < lmi.coeffs.size(); ++p)
    CHECK((back.coeffs[p] - lmi.coeffs[p]).norm() == 0.0);

  Assignment a = random_assignment(lmi.layout, 9);
  CHECK((back.evaluate(a) - lmi.evaluate(a)).norm() == 0.0);
}

TEST_CASE("assignment JSON round-trip is exact") {
  DecisionLayout layout({{"P", 2, VarKind::SymmetricMatrix, true},
                         {"s", 1, VarKind::Scalar, false}});
  Assignment a = random_assignment(layout, 13);
  Assignment back = assignment_from_json(assignment_to_json(a));
  CHECK((back.at("P") - a.at("P")).norm() == 0.0);
  CHECK(back.at("s")(0, 0) == a.at("s")(0, 0));
}

TEST_CASE("coefficient_dynamic_range flags the scale spread") {
  auto plant = fixtures::triple_integrator();
  auto ctrl = map_gains(fixtures::triple_integrator_gains(), 0.044, {30, 60});
  AffineLmi lmi = build_phi(plant, ctrl, 1e-3);
  CHECK(lmi.coefficient_dynamic_range() >= 1.0);
}
