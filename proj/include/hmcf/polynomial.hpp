#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace hmcf {

// Multivariate polynomial with exact coefficient arithmetic on doubles.
// Vector fields with polynomial components keep their Jacobians exact,
// which is what the connection terms and bracket computations rely on.

struct Monomial {
  double coeff = 0.0;
  std::vector<int> exps;  // one exponent per variable
};

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}
  Polynomial(int nvars, std::vector<Monomial> terms);

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int axis);  // x_axis (0-based)

  int nvars() const { return nvars_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  double eval(const Eigen::VectorXd& x) const;

  Polynomial derivative(int axis) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double c) const;

 private:
  void normalize();

  int nvars_ = 0;
  std::vector<Monomial> terms_;
};

// Polynomial vector field on R^n (n components, n variables).
class PolyVectorField {
 public:
  PolyVectorField() = default;
  explicit PolyVectorField(int n);
  explicit PolyVectorField(std::vector<Polynomial> comps);

  int dim() const { return static_cast<int>(comps_.size()); }
  const Polynomial& component(int i) const { return comps_[i]; }
  Polynomial& component(int i) { return comps_[i]; }

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;

  // J(r, c) = d(component r) / d(x_c), evaluated exactly.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  bool is_constant() const;
  bool is_zero() const;

 private:
  void build_jacobian_table();

  std::vector<Polynomial> comps_;
  std::vector<std::vector<Polynomial>> jac_;  // [r][c]
};

// Lie bracket of polynomial vector fields: [F, G] = J_G F - J_F G,
// computed symbolically so iterated brackets stay exact.
PolyVectorField lie_bracket_field(const PolyVectorField& F, const PolyVectorField& G);

// Directional derivative X f = sum_i X^i d_i f, kept symbolic.
Polynomial apply_field(const PolyVectorField& X, const Polynomial& f);

}  // namespace hmcf
