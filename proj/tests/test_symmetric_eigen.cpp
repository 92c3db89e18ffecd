#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "hmcf/symmetric_eigen.hpp"

using namespace hmcf;

TEST_CASE("2x2 with known spectrum") {
  Eigen::MatrixXd s(2, 2);
  s << 2.0, 1.0, 1.0, 2.0;
  SymmetricEigen e = symmetric_eigen(s);
  REQUIRE(e.values.size() == 2);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("diagonal input returns sorted eigenvalues and coordinate vectors") {
  Eigen::MatrixXd s = Eigen::Vector3d(3.0, -1.0, 2.0).asDiagonal();
  SymmetricEigen e = symmetric_eigen(s);
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(2.0));
  CHECK(e.values[2] == doctest::Approx(3.0));
  // top eigenvector is +/- e1
  Eigen::VectorXd top = e.vectors.col(2);
  CHECK(std::abs(top[0]) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(top[1]) < 1e-13);
  CHECK(std::abs(top[2]) < 1e-13);
}

TEST_CASE("reconstruction and orthonormality on random symmetric matrices") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);  // 2..5
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        s(i, j) = u(rng);
        s(j, i) = s(i, j);
      }
    SymmetricEigen e = symmetric_eigen(s);
    // ascending order
    for (int i = 1; i < n; ++i) CHECK(e.values[i] >= e.values[i - 1]);
    // V^T V = I
    Eigen::MatrixXd vtv = e.vectors.transpose() * e.vectors;
    CHECK((vtv - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    // V diag(values) V^T = S
    Eigen::MatrixXd rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((rec - s).cwiseAbs().maxCoeff() < 1e-11 * (1.0 + s.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("trace and determinant invariants") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd s(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      s(i, j) = u(rng);
      s(j, i) = s(i, j);
    }
  SymmetricEigen e = symmetric_eigen(s);
  CHECK(e.values.sum() == doctest::Approx(s.trace()).epsilon(1e-12));
  CHECK(e.values.prod() == doctest::Approx(s.determinant()).epsilon(1e-10));
}

TEST_CASE("already-diagonal and near-degenerate matrices stay stable") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
  SymmetricEigen e = symmetric_eigen(s);
  for (int i = 0; i < 4; ++i) CHECK(e.values[i] == doctest::Approx(1.0).epsilon(1e-14));

  // tiny off-diagonal perturbation of a double eigenvalue
  Eigen::MatrixXd t(2, 2);
  t << 1.0, 1e-14, 1e-14, 1.0;
  SymmetricEigen et = symmetric_eigen(t);
  CHECK(et.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(et.values[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1x1 matrix") {
  Eigen::MatrixXd s(1, 1);
  s << -7.5;
  SymmetricEigen e = symmetric_eigen(s);
  CHECK(e.values[0] == -7.5);
  CHECK(std::abs(e.vectors(0, 0)) == 1.0);
}
