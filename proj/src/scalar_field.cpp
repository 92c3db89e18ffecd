#include "hmcf/scalar_field.hpp"

#include <cmath>

#include "hmcf/errors.hpp"

namespace hmcf {

ScalarField ScalarField::polynomial(const Polynomial& p) {
  const int n = p.nvars();
  std::vector<Polynomial> grad(n);
  std::vector<std::vector<Polynomial>> hess(n, std::vector<Polynomial>(n));
  for (int i = 0; i < n; ++i) {
    grad[i] = p.derivative(i);
    for (int j = 0; j < n; ++j) hess[i][j] = grad[i].derivative(j);
  }
  auto value = [p](double, const Eigen::VectorXd& x) { return p.eval(x); };
  auto gradient = [grad, n](double, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = grad[i].eval(x);
    return g;
  };
  auto hessian = [hess, n](double, const Eigen::VectorXd& x) {
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) = hess[i][j].eval(x);
    return h;
  };
  return ScalarField(n, FieldSource::analytic, value, gradient, hessian);
}

TerminalCost cost_sphere(int dim, double r0, double cap) {
  if (dim < 1 || r0 <= 0.0) throw config_error("sphere cost needs dim >= 1, r0 > 0");
  TerminalCost c;
  c.name = "sphere";
  c.dim = dim;
  c.lower = -r0 * r0;
  c.upper = cap;
  c.bound = std::max(std::abs(c.lower), std::abs(c.upper));
  c.lipschitz = 2.0 * std::sqrt(cap + r0 * r0);
  c.value = [r0, cap](const Eigen::VectorXd& x) {
    return std::min(x.squaredNorm() - r0 * r0, cap);
  };
  c.gradient = [r0, cap, dim](const Eigen::VectorXd& x) {
    if (x.squaredNorm() - r0 * r0 >= cap) return Eigen::VectorXd::Zero(dim).eval();
    return (2.0 * x).eval();
  };
  return c;
}

TerminalCost cost_cylinder(int dim, double r0, double cap) {
  if (dim < 2 || r0 <= 0.0) throw config_error("cylinder cost needs dim >= 2, r0 > 0");
  TerminalCost c;
  c.name = "cylinder";
  c.dim = dim;
  c.lower = -r0 * r0;
  c.upper = cap;
  c.bound = std::max(std::abs(c.lower), std::abs(c.upper));
  c.lipschitz = 2.0 * std::sqrt(cap + r0 * r0);
  c.value = [r0, cap](const Eigen::VectorXd& x) {
    return std::min(x[0] * x[0] + x[1] * x[1] - r0 * r0, cap);
  };
  c.gradient = [r0, cap, dim](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    if (x[0] * x[0] + x[1] * x[1] - r0 * r0 < cap) {
      g[0] = 2.0 * x[0];
      g[1] = 2.0 * x[1];
    }
    return g;
  };
  return c;
}

TerminalCost cost_plane(int dim, double clamp) {
  if (dim < 1 || clamp <= 0.0) throw config_error("plane cost needs dim >= 1, clamp > 0");
  TerminalCost c;
  c.name = "plane";
  c.dim = dim;
  c.lower = -clamp;
  c.upper = clamp;
  c.bound = clamp;
  c.lipschitz = 1.0;
  const int axis = dim - 1;
  c.value = [axis, clamp](const Eigen::VectorXd& x) {
    return std::max(-clamp, std::min(x[axis], clamp));
  };
  c.gradient = [axis, clamp, dim](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    if (std::abs(x[axis]) < clamp) g[axis] = 1.0;
    return g;
  };
  return c;
}

TerminalCost cost_clamped_distance(int dim, double r0, double cap) {
  if (dim < 1 || r0 <= 0.0) throw config_error("clamped-distance cost needs dim >= 1, r0 > 0");
  TerminalCost c;
  c.name = "clamped-distance";
  c.dim = dim;
  c.lower = -r0;
  c.upper = cap;
  c.bound = std::max(std::abs(c.lower), std::abs(c.upper));
  c.lipschitz = 1.0;
  c.value = [r0, cap](const Eigen::VectorXd& x) { return std::min(x.norm() - r0, cap); };
  c.gradient = [r0, cap, dim](const Eigen::VectorXd& x) {
    const double r = x.norm();
    if (r == 0.0 || r - r0 >= cap) return Eigen::VectorXd::Zero(dim).eval();
    return (x / r).eval();
  };
  return c;
}

}  // namespace hmcf
