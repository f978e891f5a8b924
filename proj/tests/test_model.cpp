#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "artdelay/model.hpp"
#include "fixtures.hpp"

#include <complex>
#include <stdexcept>

using namespace artdelay;

TEST_CASE("triple integrator has relative degree 3") {
  auto plant = fixtures::triple_integrator();
  auto r = relative_degree(plant, plant.n());
  REQUIRE(r.has_value());
  CHECK(*r == 3);
}

TEST_CASE("direct feedthrough to y' gives relative degree 1") {
  Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, 0, 0;
  B << 0, 1;
  C << 0, 1;  // measures velocity; CB = 1
  auto r = relative_degree(LtiPlant(A, B, C), 2);
  REQUIRE(r.has_value());
  CHECK(*r == 1);
}

TEST_CASE("full-state measurement on a double integrator") {
  Eigen::MatrixXd A(2, 2), B(2, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(2, 2);
  auto r = relative_degree(LtiPlant(A, B, C), 2);
  REQUIRE(r.has_value());
  CHECK(*r == 1);  // CB = (0,1) != 0
}

TEST_CASE("nilpotent output path yields no relative degree") {
  Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, 0, 0;
  B << 1, 0;  // input feeds the measured integrator chain from the top
  C << 0, 1;  // C B = 0, C A B = 0
  CHECK_FALSE(relative_degree(LtiPlant(A, B, C), 2).has_value());
}

TEST_CASE("Markov parameter in the ambiguous band throws") {
  Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, 0, 0;
  B << 0, 1;
  C << 1, 3e-9;  // CB = 3e-9, inside (tol, 10 tol) with tol = 2e-9
  CHECK_THROWS_AS((void)relative_degree(LtiPlant(A, B, C), 2), std::runtime_error);
}

TEST_CASE("clearly scaled Markov parameters resolve without ambiguity") {
  Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, 0, 0;
  B << 0, 1;
  C << 1, 1e-7;  // CB = 1e-7 >= 10 tol: decisive nonzero
  auto r = relative_degree(LtiPlant(A, B, C), 2);
  REQUIRE(r.has_value());
  CHECK(*r == 1);
}

TEST_CASE("stacked output map of the triple integrator is the identity") {
  auto plant = fixtures::triple_integrator();
  CHECK((stacked_output_map(plant, 3) - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("decay_rate of scalar x' = -x is 1") {
  Eigen::MatrixXd M(1, 1);
  M << -1;
  CHECK(decay_rate(M) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ideal closed loop of the triple integrator") {
  auto plant = fixtures::triple_integrator();
  auto ideal = fixtures::triple_integrator_gains();
  Eigen::MatrixXd D = ideal_closed_loop(plant, ideal);
  Eigen::MatrixXd Dref(3, 3);
  Dref << 0, 1, 0, 0, 0, 1, -2e-4, -0.06, -0.342;
  CHECK((D - Dref).norm() < 1e-15);
  // slowest mode sets the decay rate
  CHECK(decay_rate(D) == doctest::Approx(0.0033988).epsilon(1e-3));
}

TEST_CASE("ideal PID closed loop decays at about 10.4") {
  const double a = decay_rate(pid_ideal_closed_loop(fixtures::servo(), fixtures::servo_gains()));
  CHECK(a == doctest::Approx(10.422839).epsilon(1e-5));
}

TEST_CASE("pid_ideal_closed_loop matrix entries") {
  auto M = pid_ideal_closed_loop(fixtures::servo(), fixtures::servo_gains());
  CHECK(M(0, 1) == 1.0);
  CHECK(M(1, 0) == doctest::Approx(-0.0 + 35.71 * -10.0));
  CHECK(M(1, 1) == doctest::Approx(-8.4 + 35.71 * -0.65));
  CHECK(M(1, 2) == doctest::Approx(35.71 * -40.0));
  CHECK(M(2, 0) == 1.0);
}

TEST_CASE("construction validates dimensions") {
  Eigen::MatrixXd A(2, 2), Bbad(3, 1), C(1, 2);
  A << 0, 1, 0, 0;
  Bbad << 0, 1, 0;
  C << 1, 0;
  CHECK_THROWS(LtiPlant(A, Bbad, C));

  Eigen::MatrixXd Cbad(1, 3);
  Cbad << 1, 0, 0;
  Eigen::MatrixXd B(2, 1);
  B << 0, 1;
  CHECK_THROWS(LtiPlant(A, B, Cbad));

  CHECK_THROWS(PidPlant(1.0, 1.0, 0.0));

  std::vector<Eigen::MatrixXd> K{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(2, 1)};
  CHECK_THROWS(DerivativeController(K));
  CHECK_THROWS(DerivativeController({}));
}

TEST_CASE("relative_degree respects r_max") {
  auto plant = fixtures::triple_integrator();
  CHECK_FALSE(relative_degree(plant, 2).has_value());
}
