#pragma once

#include <Eigen/Dense>

namespace hmcf {

// Eigendecomposition of a small dense symmetric matrix by cyclic Jacobi
// rotations. Sweeps stop once the off-diagonal Frobenius norm drops below
// tol * (1 + ||S||_F). Eigenvalues come back ascending, vectors[:, k] is the
// unit eigenvector for values[k].
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& s, double tol = 1e-12,
                               int max_sweeps = 64);

double lambda_max(const Eigen::MatrixXd& s);
double lambda_min(const Eigen::MatrixXd& s);

// Largest eigenvalue of sigma * sigma^T, i.e. the squared spectral norm.
double spectral_norm_sq(const Eigen::MatrixXd& sigma);

}  // namespace hmcf
