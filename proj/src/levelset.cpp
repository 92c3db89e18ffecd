#include "hmcf/levelset.hpp"

#include "hmcf/errors.hpp"

namespace hmcf {

Eigen::VectorXd horizontal_gradient(const Frame& frame, const ScalarField& u, double t,
                                    const Eigen::VectorXd& x) {
  return frame.apply_sigma(x, u.gradient(t, x));
}

Eigen::VectorXd approx_gradient(const EpsilonFrame& frame, const ScalarField& u, double t,
                                const Eigen::VectorXd& x) {
  return frame.apply_sigma_eps(x, u.gradient(t, x));
}

Eigen::MatrixXd sym_horizontal_hessian(const Frame& frame, const ScalarField& u, double t,
                                       const Eigen::VectorXd& x) {
  const Eigen::MatrixXd s = frame.sigma(x);
  const Eigen::VectorXd du = u.gradient(t, x);
  const Eigen::MatrixXd d2u = u.hessian(t, x);
  return s * d2u * s.transpose() + covariant_matrix(frame, x, du);
}

Eigen::MatrixXd sym_horizontal_hessian(const EpsilonFrame& frame, const ScalarField& u,
                                       double t, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd s = frame.sigma_eps(x);
  const Eigen::VectorXd du = u.gradient(t, x);
  const Eigen::MatrixXd d2u = u.hessian(t, x);
  return s * d2u * s.transpose() + covariant_matrix_eps(frame, x, du);
}

bool is_characteristic(const Frame& frame, const ScalarField& u, double t,
                       const Eigen::VectorXd& x) {
  const Eigen::VectorXd du = u.gradient(t, x);
  return frame.apply_sigma(x, du).norm() < tol_char(du.norm());
}

Eigen::VectorXd horizontal_normal(const Frame& frame, const ScalarField& u, double t,
                                  const Eigen::VectorXd& x) {
  const Eigen::VectorXd du = u.gradient(t, x);
  const Eigen::VectorXd hg = frame.apply_sigma(x, du);
  const double norm = hg.norm();
  if (norm < tol_char(du.norm()))
    throw characteristic_point_error("horizontal gradient vanishes at the requested point");
  return hg / norm;
}

Eigen::VectorXd approx_normal(const EpsilonFrame& frame, const ScalarField& u, double t,
                              const Eigen::VectorXd& x) {
  const Eigen::VectorXd du = u.gradient(t, x);
  if (du.norm() < tol_char(du.norm()))
    throw zero_gradient_error("Euclidean gradient vanishes at the requested point");
  const Eigen::VectorXd ag = frame.apply_sigma_eps(x, du);
  return ag / ag.norm();
}

double approx_curvature(const EpsilonFrame& frame, const ScalarField& u, double t,
                        const Eigen::VectorXd& x) {
  const Eigen::VectorXd du = u.gradient(t, x);
  const Eigen::VectorXd ag = frame.apply_sigma_eps(x, du);
  const double norm = ag.norm();
  if (norm < tol_char(du.norm()))
    throw zero_gradient_error("gradient vanishes; curvature undefined");
  const Eigen::MatrixXd s = sym_horizontal_hessian(frame, u, t, x);
  const Eigen::VectorXd n = ag / norm;
  return (s.trace() - n.dot(s * n)) / norm;
}

HorizontalJet horizontal_jet(const Frame& frame, const ScalarField& u, double t,
                             const Eigen::VectorXd& x) {
  HorizontalJet jet;
  jet.gradient = horizontal_gradient(frame, u, t, x);
  jet.hessian = sym_horizontal_hessian(frame, u, t, x);
  jet.characteristic = is_characteristic(frame, u, t, x);
  return jet;
}

ApproxJet approx_jet(const EpsilonFrame& frame, const ScalarField& u, double t,
                     const Eigen::VectorXd& x) {
  ApproxJet jet;
  jet.gradient = approx_gradient(frame, u, t, x);
  jet.hessian = sym_horizontal_hessian(frame, u, t, x);
  const Eigen::VectorXd du = u.gradient(t, x);
  jet.degenerate = du.norm() < tol_char(du.norm());
  return jet;
}

}  // namespace hmcf
