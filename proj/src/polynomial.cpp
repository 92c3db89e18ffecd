#include "hmcf/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "hmcf/errors.hpp"

namespace hmcf {

Polynomial::Polynomial(int nvars, std::vector<Monomial> terms)
    : nvars_(nvars), terms_(std::move(terms)) {
  for (auto& t : terms_) {
    if (static_cast<int>(t.exps.size()) != nvars_)
      throw dimension_error("monomial exponent vector has wrong length");
    for (int e : t.exps)
      if (e < 0) throw dimension_error("negative exponent in monomial");
  }
  normalize();
}

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  if (c != 0.0) p.terms_.push_back({c, std::vector<int>(nvars, 0)});
  return p;
}

Polynomial Polynomial::variable(int nvars, int axis) {
  if (axis < 0 || axis >= nvars) throw dimension_error("variable axis out of range");
  Polynomial p(nvars);
  Monomial m{1.0, std::vector<int>(nvars, 0)};
  m.exps[axis] = 1;
  p.terms_.push_back(std::move(m));
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms_) {
    int s = 0;
    for (int e : t.exps) s += e;
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::eval(const Eigen::VectorXd& x) const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (int i = 0; i < nvars_; ++i) {
      const int e = t.exps[i];
      if (e == 0) continue;
      double b = x[i];
      for (int k = 0; k < e; ++k) v *= b;
    }
    acc += v;
  }
  return acc;
}

Polynomial Polynomial::derivative(int axis) const {
  Polynomial out(nvars_);
  for (const auto& t : terms_) {
    const int e = t.exps[axis];
    if (e == 0) continue;
    Monomial m = t;
    m.coeff *= e;
    m.exps[axis] = e - 1;
    out.terms_.push_back(std::move(m));
  }
  out.normalize();
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (nvars_ == 0 && terms_.empty()) nvars_ = o.nvars_;
  if (o.nvars_ != nvars_) throw dimension_error("polynomial variable count mismatch");
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  normalize();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) { return *this += o * -1.0; }

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  r += o;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial r = *this;
  r -= o;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.nvars_ != nvars_) throw dimension_error("polynomial variable count mismatch");
  Polynomial out(nvars_);
  out.terms_.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_) {
    for (const auto& b : o.terms_) {
      Monomial m;
      m.coeff = a.coeff * b.coeff;
      m.exps.resize(nvars_);
      for (int i = 0; i < nvars_; ++i) m.exps[i] = a.exps[i] + b.exps[i];
      out.terms_.push_back(std::move(m));
    }
  }
  out.normalize();
  return out;
}

Polynomial Polynomial::operator*(double c) const {
  Polynomial out(nvars_);
  if (c == 0.0) return out;
  out.terms_ = terms_;
  for (auto& t : out.terms_) t.coeff *= c;
  return out;
}

void Polynomial::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Monomial& a, const Monomial& b) { return a.exps < b.exps; });
  std::vector<Monomial> merged;
  for (auto& t : terms_) {
    if (!merged.empty() && merged.back().exps == t.exps)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(std::move(t));
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Monomial& m) { return m.coeff == 0.0; }),
               merged.end());
  terms_ = std::move(merged);
}

PolyVectorField::PolyVectorField(int n) : comps_(n, Polynomial(n)) { build_jacobian_table(); }

PolyVectorField::PolyVectorField(std::vector<Polynomial> comps) : comps_(std::move(comps)) {
  const int n = dim();
  for (const auto& c : comps_)
    if (c.nvars() != n) throw dimension_error("vector field components need n variables");
  build_jacobian_table();
}

void PolyVectorField::build_jacobian_table() {
  const int n = dim();
  jac_.assign(n, std::vector<Polynomial>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) jac_[r][c] = comps_[r].derivative(c);
}

Eigen::VectorXd PolyVectorField::eval(const Eigen::VectorXd& x) const {
  const int n = dim();
  if (x.size() != n) throw dimension_error("point dimension mismatch");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = comps_[i].eval(x);
  return v;
}

Eigen::MatrixXd PolyVectorField::jacobian(const Eigen::VectorXd& x) const {
  const int n = dim();
  if (x.size() != n) throw dimension_error("point dimension mismatch");
  Eigen::MatrixXd J(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) J(r, c) = jac_[r][c].eval(x);
  return J;
}

bool PolyVectorField::is_constant() const {
  for (const auto& c : comps_)
    if (c.degree() > 0) return false;
  return true;
}

bool PolyVectorField::is_zero() const {
  for (const auto& c : comps_)
    if (!c.is_zero()) return false;
  return true;
}

PolyVectorField lie_bracket_field(const PolyVectorField& F, const PolyVectorField& G) {
  const int n = F.dim();
  if (G.dim() != n) throw dimension_error("bracket of fields with different dimensions");
  std::vector<Polynomial> comps(n, Polynomial(n));
  for (int i = 0; i < n; ++i) {
    Polynomial acc(n);
    for (int j = 0; j < n; ++j) {
      acc += F.component(j) * G.component(i).derivative(j);
      acc -= G.component(j) * F.component(i).derivative(j);
    }
    comps[i] = std::move(acc);
  }
  return PolyVectorField(std::move(comps));
}

Polynomial apply_field(const PolyVectorField& X, const Polynomial& f) {
  const int n = X.dim();
  if (f.nvars() != n) throw dimension_error("field and function live on different spaces");
  Polynomial acc(n);
  for (int j = 0; j < n; ++j) acc += X.component(j) * f.derivative(j);
  return acc;
}

}  // namespace hmcf
