#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>

#include "hmcf/polynomial.hpp"

namespace hmcf {

enum class FieldSource { analytic, grid_sampled };

// Scalar function of (t, x) with first and second space derivatives.
// Analytic fields carry exact derivatives; grid-backed fields (built in
// grid.hpp) differentiate their samples and tag themselves accordingly.
class ScalarField {
 public:
  using ValueFn = std::function<double(double, const Eigen::VectorXd&)>;
  using GradFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
  using HessFn = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;

  ScalarField() = default;
  ScalarField(int dim, FieldSource source, ValueFn value, GradFn grad, HessFn hess)
      : dim_(dim),
        source_(source),
        value_(std::move(value)),
        grad_(std::move(grad)),
        hess_(std::move(hess)) {}

  // Static-in-time polynomial with exact differentiation.
  static ScalarField polynomial(const Polynomial& p);

  int dim() const { return dim_; }
  FieldSource source() const { return source_; }

  double value(double t, const Eigen::VectorXd& x) const { return value_(t, x); }
  Eigen::VectorXd gradient(double t, const Eigen::VectorXd& x) const { return grad_(t, x); }
  Eigen::MatrixXd hessian(double t, const Eigen::VectorXd& x) const { return hess_(t, x); }

 private:
  int dim_ = 0;
  FieldSource source_ = FieldSource::analytic;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
};

// Terminal cost: globally bounded by construction, with declared bound and
// Lipschitz constant and an analytic gradient where one exists (used by the
// feedback control policy; zero on flat or clamped regions).
struct TerminalCost {
  std::string name;
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  double bound = 0.0;      // sup |g|
  double lower = 0.0;      // inf g
  double upper = 0.0;      // sup g
  double lipschitz = 0.0;
};

// min(|x|^2 - r0^2, cap)
TerminalCost cost_sphere(int dim, double r0, double cap);
// min(x1^2 + x2^2 - r0^2, cap)
TerminalCost cost_cylinder(int dim, double r0, double cap);
// x_dim clamped to [-clamp, clamp]
TerminalCost cost_plane(int dim, double clamp);
// min(|x| - r0, cap)
TerminalCost cost_clamped_distance(int dim, double r0, double cap);

}  // namespace hmcf
