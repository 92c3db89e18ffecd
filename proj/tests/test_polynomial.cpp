#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "hmcf/polynomial.hpp"

using namespace hmcf;

namespace {

Eigen::VectorXd rand_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

}  // namespace

TEST_CASE("evaluation and partial derivatives of a fixed polynomial") {
  // p(x, y) = 3 x^2 y + 2 y
  Polynomial p(2, {{3.0, {2, 1}}, {2.0, {0, 1}}});
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  CHECK(p.eval(x) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(p.derivative(0).eval(x) == doctest::Approx(12.0).epsilon(1e-15));  // 6xy
  CHECK(p.derivative(1).eval(x) == doctest::Approx(5.0).epsilon(1e-15));   // 3x^2 + 2
  CHECK(p.degree() == 3);
}

TEST_CASE("constant and variable factories") {
  Polynomial c = Polynomial::constant(3, 4.5);
  Polynomial v = Polynomial::variable(3, 2);
  Eigen::VectorXd x(3);
  x << -1.0, 0.5, 7.0;
  CHECK(c.eval(x) == 4.5);
  CHECK(v.eval(x) == 7.0);
  CHECK(c.degree() == 0);
  CHECK(v.degree() == 1);
  CHECK(c.derivative(0).is_zero());
  CHECK(v.derivative(2).eval(x) == 1.0);
  CHECK(v.derivative(0).is_zero());
}

TEST_CASE("duplicate monomials merge and exact cancellation empties the term list") {
  Polynomial p(2, {{1.0, {1, 0}}, {2.0, {1, 0}}});
  CHECK(p.terms().size() == 1);
  Eigen::VectorXd x(2);
  x << 3.0, 0.0;
  CHECK(p.eval(x) == 9.0);
  Polynomial q = p - p;
  CHECK(q.is_zero());
  CHECK(q.eval(x) == 0.0);
}

TEST_CASE("ring operations agree with pointwise arithmetic at random points") {
  Polynomial x0 = Polynomial::variable(2, 0);
  Polynomial x1 = Polynomial::variable(2, 1);
  Polynomial sum = x0 + x1;
  Polynomial diff = x0 - x1;
  Polynomial prod = sum * diff;  // x^2 - y^2
  Polynomial scaled = prod * 3.0;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x = rand_point(rng, 2);
    const double expect = x[0] * x[0] - x[1] * x[1];
    CHECK(prod.eval(x) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(scaled.eval(x) == doctest::Approx(3.0 * expect).epsilon(1e-13));
    CHECK(sum.eval(x) == doctest::Approx(x[0] + x[1]).epsilon(1e-13));
    CHECK(diff.eval(x) == doctest::Approx(x[0] - x[1]).epsilon(1e-13));
  }
}

TEST_CASE("derivative is linear and obeys the product rule at random points") {
  std::mt19937_64 rng(11);
  Polynomial a(3, {{2.0, {1, 2, 0}}, {-1.0, {0, 0, 3}}});
  Polynomial b(3, {{1.0, {2, 0, 1}}, {4.0, {0, 1, 0}}});
  Polynomial prod = a * b;
  for (int axis = 0; axis < 3; ++axis) {
    Polynomial lhs = prod.derivative(axis);
    Polynomial rhs = a.derivative(axis) * b + a * b.derivative(axis);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd x = rand_point(rng, 3);
      CHECK(lhs.eval(x) == doctest::Approx(rhs.eval(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("vector field evaluation and exact jacobian") {
  // X(x) = (x1, 1) on R^2 — the second frame field of the worked custom frame.
  Polynomial comp0 = Polynomial::variable(2, 0);
  Polynomial comp1 = Polynomial::constant(2, 1.0);
  PolyVectorField f(std::vector<Polynomial>{comp0, comp1});
  CHECK(f.dim() == 2);
  CHECK_FALSE(f.is_constant());
  Eigen::VectorXd x(2);
  x << 0.7, -0.3;
  Eigen::VectorXd v = f.eval(x);
  CHECK(v[0] == 0.7);
  CHECK(v[1] == 1.0);
  Eigen::MatrixXd j = f.jacobian(x);
  CHECK(j(0, 0) == 1.0);
  CHECK(j(0, 1) == 0.0);
  CHECK(j(1, 0) == 0.0);
  CHECK(j(1, 1) == 0.0);
}

TEST_CASE("jacobian matches central differences on a quadratic field") {
  Polynomial q(2, {{1.0, {2, 0}}, {2.0, {1, 1}}});     // x^2 + 2xy
  Polynomial r(2, {{-1.0, {0, 2}}, {0.5, {1, 0}}});    // -y^2 + x/2
  PolyVectorField f(std::vector<Polynomial>{q, r});
  std::mt19937_64 rng(13);
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x = rand_point(rng, 2);
    Eigen::MatrixXd j = f.jacobian(x);
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      Eigen::VectorXd fd = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
      for (int rr = 0; rr < 2; ++rr)
        CHECK(j(rr, c) == doctest::Approx(fd[rr]).epsilon(1e-7));
    }
  }
}

TEST_CASE("is_constant and is_zero classify fields correctly") {
  PolyVectorField zero(2);
  CHECK(zero.is_zero());
  CHECK(zero.is_constant());
  PolyVectorField ones(std::vector<Polynomial>{Polynomial::constant(2, 1.0),
                                               Polynomial::constant(2, -2.0)});
  CHECK(ones.is_constant());
  CHECK_FALSE(ones.is_zero());
}
