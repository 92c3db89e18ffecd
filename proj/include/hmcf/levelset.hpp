#pragma once

#include <Eigen/Dense>

#include "hmcf/frame.hpp"
#include "hmcf/scalar_field.hpp"

namespace hmcf {

// Degeneracy threshold used everywhere a gradient magnitude is tested:
// relative in the Euclidean gradient so that rescaling u leaves the
// classification alone for any field that is not borderline.
inline double tol_char(double du_norm) { return 1e-10 * (1.0 + du_norm); }

// sigma(x) Du: components of the gradient along the frame fields.
Eigen::VectorXd horizontal_gradient(const Frame& frame, const ScalarField& u, double t,
                                    const Eigen::VectorXd& x);

// sigma_eps(x) Du: same, along the completed family.
Eigen::VectorXd approx_gradient(const EpsilonFrame& frame, const ScalarField& u, double t,
                                const Eigen::VectorXd& x);

// Symmetrized second-order matrix 0.5 (X_i(X_j u) + X_j(X_i u)), expanded as
// sigma D2u sigma^T plus the symmetrized connection matrix applied to Du.
Eigen::MatrixXd sym_horizontal_hessian(const Frame& frame, const ScalarField& u, double t,
                                       const Eigen::VectorXd& x);  // m x m
Eigen::MatrixXd sym_horizontal_hessian(const EpsilonFrame& frame, const ScalarField& u,
                                       double t, const Eigen::VectorXd& x);  // N x N

bool is_characteristic(const Frame& frame, const ScalarField& u, double t,
                       const Eigen::VectorXd& x);

// Unit horizontal normal; throws characteristic_point_error when the
// horizontal gradient magnitude falls below tol_char.
Eigen::VectorXd horizontal_normal(const Frame& frame, const ScalarField& u, double t,
                                  const Eigen::VectorXd& x);

// Unit normal for the completed family; only a vanishing Euclidean gradient
// is an error here (sigma_eps is invertible).
Eigen::VectorXd approx_normal(const EpsilonFrame& frame, const ScalarField& u, double t,
                              const Eigen::VectorXd& x);

// Divergence of the approximate unit normal along the completed family:
//   (trace(S) - n^T S n) / |sigma_eps Du|,  S the symmetrized matrix above.
double approx_curvature(const EpsilonFrame& frame, const ScalarField& u, double t,
                        const Eigen::VectorXd& x);

struct HorizontalJet {
  Eigen::VectorXd gradient;  // m
  Eigen::MatrixXd hessian;   // m x m
  bool characteristic = false;
};

struct ApproxJet {
  Eigen::VectorXd gradient;  // N
  Eigen::MatrixXd hessian;   // N x N
  bool degenerate = false;   // Euclidean gradient below tol_char
};

HorizontalJet horizontal_jet(const Frame& frame, const ScalarField& u, double t,
                             const Eigen::VectorXd& x);
ApproxJet approx_jet(const EpsilonFrame& frame, const ScalarField& u, double t,
                     const Eigen::VectorXd& x);

}  // namespace hmcf
