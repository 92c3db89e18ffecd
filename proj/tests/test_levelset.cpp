#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "hmcf/errors.hpp"
#include "hmcf/frame.hpp"
#include "hmcf/levelset.hpp"
#include "hmcf/pde.hpp"
#include "hmcf/polynomial.hpp"
#include "hmcf/scalar_field.hpp"

using namespace hmcf;

namespace {

// u = x1^2 + x2^2 - 1 on R^n (circle / cylinder data)
ScalarField ring_field(int n) {
  Polynomial p(n, {{1.0, [n] {
                      std::vector<int> e(static_cast<std::size_t>(n), 0);
                      e[0] = 2;
                      return e;
                    }()},
                   {1.0, [n] {
                      std::vector<int> e(static_cast<std::size_t>(n), 0);
                      e[1] = 2;
                      return e;
                    }()},
                   {-1.0, std::vector<int>(static_cast<std::size_t>(n), 0)}});
  return ScalarField::polynomial(p);
}

ScalarField plane_field() {
  return ScalarField::polynomial(Polynomial::variable(3, 2));  // u = x3
}

}  // namespace

TEST_CASE("horizontal gradient of the vertical coordinate on the heisenberg frame") {
  Frame f = Frame::heisenberg1();
  ScalarField u = plane_field();
  Eigen::VectorXd x(3);
  x << 0.0, 2.0, 0.0;
  Eigen::VectorXd g = horizontal_gradient(f, u, 0.0, x);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == -1.0);  // X1 u = -x2/2
  CHECK(g[1] == 0.0);   // X2 u = x1/2
  Eigen::VectorXd n = horizontal_normal(f, u, 0.0, x);
  CHECK(n[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(n[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("approximated gradient converges to the horizontal one as epsilon shrinks") {
  // sphere level set: Du has a nonzero third component, so the tail is visible
  Polynomial sphere = Polynomial::variable(3, 0) * Polynomial::variable(3, 0) +
                      Polynomial::variable(3, 1) * Polynomial::variable(3, 1) +
                      Polynomial::variable(3, 2) * Polynomial::variable(3, 2) +
                      Polynomial::constant(3, -1.0);
  ScalarField u = ScalarField::polynomial(sphere);
  Eigen::VectorXd x(3);
  x << 0.8, 0.3, 0.2;
  Frame base = Frame::heisenberg1();
  Eigen::VectorXd gh = horizontal_gradient(base, u, 0.0, x);
  double prev = 1e300;
  for (double eps : {1.0, 0.5, 0.25, 0.125}) {
    EpsilonFrame ef(base, eps);
    Eigen::VectorXd ge = approx_gradient(ef, u, 0.0, x);
    REQUIRE(ge.size() == 3);
    // first m entries agree exactly; the tail is epsilon-scaled
    CHECK(ge[0] == gh[0]);
    CHECK(ge[1] == gh[1]);
    const double tail = std::abs(ge[2]);
    CHECK(tail < prev);
    prev = tail;
  }
}

TEST_CASE("unit normals have unit norm at generic points") {
  ScalarField u = ring_field(3);
  Frame base = Frame::heisenberg1();
  EpsilonFrame ef(base, 0.5);
  Eigen::VectorXd x(3);
  x << 0.6, -0.4, 0.3;
  CHECK(horizontal_normal(base, u, 0.0, x).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(approx_normal(ef, u, 0.0, x).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("characteristic points are flagged and the operator refuses them") {
  Frame f = Frame::heisenberg1();
  ScalarField u = plane_field();  // sigma Du = (-x2/2, x1/2) vanishes on the axis
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(3);
  CHECK(is_characteristic(f, u, 0.0, origin));
  Eigen::VectorXd off(3);
  off << 0.0, 2.0, 0.0;
  CHECK_FALSE(is_characteristic(f, u, 0.0, off));

  Eigen::VectorXd du(3);
  du << 0.0, 0.0, 1.0;
  Eigen::MatrixXd d2u = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(mcf_operator(f, origin, du, d2u), characteristic_point_error);
}

TEST_CASE("characteristic classification is scale invariant") {
  Frame f = Frame::heisenberg1();
  Eigen::VectorXd x(3);
  x << 0.0, 1e-11, 0.0;
  // u = x3: sigma Du = (-x2/2, 0) is tiny relative to |Du| = 1 here
  for (double scale : {1.0, 1e6, 1e-6}) {
    Polynomial p = Polynomial::variable(3, 2) * scale;
    ScalarField u = ScalarField::polynomial(p);
    CHECK(is_characteristic(f, u, 0.0, x));
  }
}

TEST_CASE("operator value on the euclidean shrinking circle") {
  Frame f = Frame::euclidean(2);
  Eigen::VectorXd x(2), du(2);
  x << 1.0, 0.0;
  du << 2.0, 0.0;
  Eigen::MatrixXd d2u = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  // B = D2u, n = e1: F = -tr(B) + <B n, n> = -4 + 2 = -2
  CHECK(mcf_operator(f, x, du, d2u) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("operator value on the heisenberg cylinder matches the euclidean circle") {
  Frame f = Frame::heisenberg1();
  Eigen::VectorXd x(3), du(3);
  x << 1.0, 0.0, 0.0;
  du << 2.0, 0.0, 0.0;
  Eigen::MatrixXd d2u = Eigen::MatrixXd::Zero(3, 3);
  d2u(0, 0) = 2.0;
  d2u(1, 1) = 2.0;
  CHECK(mcf_operator(f, x, du, d2u) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("envelopes bracket the operator and hit the eigenvalue extremes") {
  Frame f = Frame::euclidean(2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd du = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd d2u(2, 2);
  d2u << 1.0, 0.0, 0.0, -1.0;
  OperatorEnvelopes env = mcf_envelopes(f, x, du, d2u);
  CHECK(env.upper == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(env.lower == doctest::Approx(-1.0).epsilon(1e-13));

  // at a noncharacteristic point the operator sits inside the envelope
  du << 3.0, 0.5;
  env = mcf_envelopes(f, x, du, d2u);
  const double val = mcf_operator(f, x, du, d2u);
  CHECK(val <= env.upper + 1e-13);
  CHECK(val >= env.lower - 1e-13);
}

TEST_CASE("completed operator at epsilon 1 on the euclidean frame is classical") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  Eigen::VectorXd x(2), du(2);
  x << 1.0, 0.0;
  du << 2.0, 0.0;
  Eigen::MatrixXd d2u = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  // full-rank frame: no completion rows, sigma_eps = I, classical operator
  CHECK(mcf_operator_eps(ef, x, du, d2u) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("completed operator rejects only a vanishing full gradient") {
  EpsilonFrame ef(Frame::heisenberg1(), 0.5);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd du(3);
  du << 0.0, 0.0, 1.0;  // characteristic for the base frame, fine here
  Eigen::MatrixXd d2u = Eigen::MatrixXd::Zero(3, 3);
  CHECK_NOTHROW(mcf_operator_eps(ef, x, du, d2u));
  CHECK_THROWS_AS(mcf_operator_eps(ef, x, Eigen::VectorXd::Zero(3), d2u),
                  zero_gradient_error);
}

TEST_CASE("approximated curvature of the unit circle, cylinder and plane") {
  // euclidean circle of radius r: curvature 1/r
  {
    EpsilonFrame ef(Frame::euclidean(2), 1.0);
    ScalarField u = ring_field(2);
    Eigen::VectorXd x(2);
    x << 1.0, 0.0;
    CHECK(approx_curvature(ef, u, 0.0, x) == doctest::Approx(1.0).epsilon(1e-12));
    x << 0.5, 0.0;  // level set through radius 1/2
    CHECK(approx_curvature(ef, u, 0.0, x) == doctest::Approx(2.0).epsilon(1e-12));
  }
  // heisenberg cylinder: horizontal curvature of the r-cylinder is 1/r,
  // independent of epsilon at points where the normal is horizontal
  {
    for (double eps : {1.0, 0.5, 0.25}) {
      EpsilonFrame ef(Frame::heisenberg1(), eps);
      ScalarField u = ring_field(3);
      Eigen::VectorXd x(3);
      x << 1.0, 0.0, 0.7;
      CHECK(approx_curvature(ef, u, 0.0, x) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  // vertical plane u = x1 - 0.3: flat, zero curvature
  {
    EpsilonFrame ef(Frame::heisenberg1(), 0.5);
    Polynomial p = Polynomial::variable(3, 0) - Polynomial::constant(3, 0.3);
    ScalarField u = ScalarField::polynomial(p);
    Eigen::VectorXd x(3);
    x << 0.3, 0.4, -0.2;
    CHECK(approx_curvature(ef, u, 0.0, x) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("jets bundle the same gradient and hessian the scalar calls produce") {
  Frame base = Frame::heisenberg1();
  EpsilonFrame ef(base, 0.5);
  ScalarField u = ring_field(3);
  Eigen::VectorXd x(3);
  x << 0.7, -0.2, 0.4;
  HorizontalJet hj = horizontal_jet(base, u, 0.0, x);
  CHECK((hj.gradient - horizontal_gradient(base, u, 0.0, x)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((hj.hessian - sym_horizontal_hessian(base, u, 0.0, x)).cwiseAbs().maxCoeff() == 0.0);
  ApproxJet aj = approx_jet(ef, u, 0.0, x);
  CHECK((aj.gradient - approx_gradient(ef, u, 0.0, x)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((aj.hessian - sym_horizontal_hessian(ef, u, 0.0, x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetrized horizontal hessian is symmetric and frame-consistent") {
  Frame base = Frame::heisenberg1();
  ScalarField u = ring_field(3);
  Eigen::VectorXd x(3);
  x << 0.5, 0.3, -0.1;
  Eigen::MatrixXd s = sym_horizontal_hessian(base, u, 0.0, x);
  REQUIRE(s.rows() == 2);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // against the definition: sigma D2u sigma^T + A(x, Du); A = 0 on heisenberg
  Eigen::MatrixXd sig = sigma(base, x);
  Eigen::MatrixXd expect = sig * u.hessian(0.0, x) * sig.transpose();
  CHECK((s - expect).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("stabilized right-hand side matches the raw operator away from degeneracy") {
  EpsilonFrame ef(Frame::heisenberg1(), 0.5);
  Eigen::VectorXd x(3), du(3);
  x << 1.0, 0.0, 0.0;
  du << 2.0, 0.0, 0.0;
  Eigen::MatrixXd d2u = Eigen::MatrixXd::Zero(3, 3);
  d2u(0, 0) = 2.0;
  d2u(1, 1) = 2.0;
  bool enveloped = true;
  const double rhs = rhs_stabilized(ef, x, du, d2u, &enveloped);
  CHECK_FALSE(enveloped);
  CHECK(rhs == doctest::Approx(-mcf_operator_eps(ef, x, du, d2u)).epsilon(1e-14));

  // at a vanishing gradient the envelope branch takes over without throwing
  bool env2 = false;
  const double rhs0 = rhs_stabilized(ef, x, Eigen::VectorXd::Zero(3), d2u, &env2);
  CHECK(env2);
  CHECK(std::isfinite(rhs0));
}
