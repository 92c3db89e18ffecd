#include "hmcf/frame.hpp"

#include <Eigen/QR>

#include "hmcf/errors.hpp"

namespace hmcf {

Frame::Frame(FrameKind kind, int n, int m, std::vector<PolyVectorField> fields)
    : kind_(kind), n_(n), m_(m), fields_(std::move(fields)) {
  if (n_ < 1) throw dimension_error("ambient dimension must be at least 1");
  if (m_ < 1 || m_ > n_) throw dimension_error("frame rank must satisfy 1 <= m <= N");
  if (static_cast<int>(fields_.size()) != m_)
    throw dimension_error("frame needs exactly m fields");
  for (const auto& f : fields_)
    if (f.dim() != n_) throw dimension_error("field dimension differs from ambient dimension");
  collect_warnings();
}

Frame Frame::heisenberg1() {
  const int n = 3;
  Polynomial zero(n);
  Polynomial one = Polynomial::constant(n, 1.0);
  Polynomial x1 = Polynomial::variable(n, 0);
  Polynomial x2 = Polynomial::variable(n, 1);
  PolyVectorField X1({one, zero, x2 * -0.5});
  PolyVectorField X2({zero, one, x1 * 0.5});
  return Frame(FrameKind::heisenberg1, n, 2, {X1, X2});
}

Frame Frame::euclidean(int n) {
  std::vector<PolyVectorField> fields;
  fields.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Polynomial> comps(n, Polynomial(n));
    comps[i] = Polynomial::constant(n, 1.0);
    fields.emplace_back(std::move(comps));
  }
  return Frame(FrameKind::euclidean, n, n, std::move(fields));
}

Frame Frame::custom(int n, int m, std::vector<PolyVectorField> fields) {
  return Frame(FrameKind::custom, n, m, std::move(fields));
}

void Frame::collect_warnings() {
  if (kind_ != FrameKind::custom) return;
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < m_; ++j) {
      const Polynomial& c = fields_[i].component(j);
      const bool want_one = (i == j);
      const bool is_one = c.degree() == 0 && c.terms().size() == 1 && c.terms()[0].coeff == 1.0;
      const bool is_zero = c.is_zero();
      if ((want_one && !is_one) || (!want_one && !is_zero)) {
        warnings_.push_back("field " + std::to_string(i + 1) +
                            ": leading block is not the identity pattern");
        j = m_;  // one note per field is enough
      }
    }
    for (int j = m_; j < n_; ++j) {
      for (const auto& t : fields_[i].component(j).terms()) {
        for (int v = m_; v < n_; ++v) {
          if (t.exps[v] != 0) {
            warnings_.push_back("field " + std::to_string(i + 1) + " component " +
                                std::to_string(j + 1) +
                                ": polynomial depends on coordinates beyond the first m");
            v = n_;
            break;
          }
        }
        if (!warnings_.empty() && warnings_.back().find("component " + std::to_string(j + 1)) !=
                                      std::string::npos)
          break;
      }
    }
  }
}

bool Frame::sigma_constant() const {
  for (const auto& f : fields_)
    if (!f.is_constant()) return false;
  return true;
}

Eigen::VectorXd Frame::eval_field(int i, const Eigen::VectorXd& x) const {
  if (i < 0 || i >= m_) throw dimension_error("field index out of range");
  return fields_[i].eval(x);
}

Eigen::MatrixXd Frame::sigma(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw dimension_error("point dimension mismatch");
  Eigen::MatrixXd s(m_, n_);
  for (int i = 0; i < m_; ++i) s.row(i) = fields_[i].eval(x).transpose();
  return s;
}

Eigen::VectorXd Frame::apply_sigma(const Eigen::VectorXd& x, const Eigen::VectorXd& p) const {
  if (x.size() != n_ || p.size() != n_) throw dimension_error("point dimension mismatch");
  Eigen::VectorXd out(m_);
  switch (kind_) {
    case FrameKind::euclidean:
      out = p;
      break;
    case FrameKind::heisenberg1:
      out[0] = p[0] - 0.5 * x[1] * p[2];
      out[1] = p[1] + 0.5 * x[0] * p[2];
      break;
    case FrameKind::custom:
      for (int i = 0; i < m_; ++i) out[i] = fields_[i].eval(x).dot(p);
      break;
  }
  return out;
}

Eigen::VectorXd Frame::apply_sigma_transpose(const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& w) const {
  if (x.size() != n_ || w.size() != m_) throw dimension_error("dimension mismatch");
  Eigen::VectorXd out(n_);
  switch (kind_) {
    case FrameKind::euclidean:
      out = w;
      break;
    case FrameKind::heisenberg1:
      out[0] = w[0];
      out[1] = w[1];
      out[2] = 0.5 * (x[0] * w[1] - x[1] * w[0]);
      break;
    case FrameKind::custom:
      out.setZero();
      for (int i = 0; i < m_; ++i) out += w[i] * fields_[i].eval(x);
      break;
  }
  return out;
}

EpsilonFrame::EpsilonFrame(Frame base, double epsilon) : base_(std::move(base)), eps_(epsilon) {
  if (!(epsilon > 0.0)) throw dimension_error("epsilon must be positive");
}

Eigen::VectorXd EpsilonFrame::eval_field(int i, const Eigen::VectorXd& x) const {
  const int n = ambient_dim();
  const int m = rank();
  if (i < 0 || i >= n) throw dimension_error("field index out of range");
  if (i < m) return base_.eval_field(i, x);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[i] = eps_;
  return v;
}

Eigen::MatrixXd EpsilonFrame::sigma_eps(const Eigen::VectorXd& x) const {
  const int n = ambient_dim();
  const int m = rank();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  s.topRows(m) = base_.sigma(x);
  for (int i = m; i < n; ++i) s(i, i) = eps_;
  return s;
}

Eigen::VectorXd EpsilonFrame::apply_sigma_eps(const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& p) const {
  const int n = ambient_dim();
  const int m = rank();
  Eigen::VectorXd out(n);
  out.head(m) = base_.apply_sigma(x, p);
  for (int i = m; i < n; ++i) out[i] = eps_ * p[i];
  return out;
}

Eigen::VectorXd EpsilonFrame::apply_sigma_eps_transpose(const Eigen::VectorXd& x,
                                                        const Eigen::VectorXd& w) const {
  const int n = ambient_dim();
  const int m = rank();
  if (w.size() != n) throw dimension_error("dimension mismatch");
  Eigen::VectorXd out = base_.apply_sigma_transpose(x, w.head(m));
  for (int i = m; i < n; ++i) out[i] += eps_ * w[i];
  return out;
}

Eigen::MatrixXd sigma(const Frame& frame, const Eigen::VectorXd& x) { return frame.sigma(x); }

Eigen::MatrixXd sigma_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x) {
  return frame.sigma_eps(x);
}

Eigen::VectorXd lie_bracket(const Frame& frame, int i, int j, const Eigen::VectorXd& x) {
  const int m = frame.rank();
  if (i < 0 || i >= m || j < 0 || j >= m) throw dimension_error("field index out of range");
  const Eigen::VectorXd xi = frame.field(i).eval(x);
  const Eigen::VectorXd xj = frame.field(j).eval(x);
  return frame.field(j).jacobian(x) * xi - frame.field(i).jacobian(x) * xj;
}

HormanderResult hormander_check(const Frame& frame, const Eigen::VectorXd& x, int max_step) {
  const int n = frame.ambient_dim();
  const int m = frame.rank();
  if (max_step < 1) throw dimension_error("max_step must be at least 1");

  HormanderResult res;
  std::vector<PolyVectorField> layer;
  layer.reserve(m);
  for (int i = 0; i < m; ++i) layer.push_back(frame.field(i));

  Eigen::MatrixXd span(n, 0);
  auto rank_of = [&](const Eigen::MatrixXd& mat) {
    if (mat.cols() == 0) return 0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mat);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
  };

  for (int step = 1; step <= max_step; ++step) {
    for (const auto& f : layer) {
      span.conservativeResize(Eigen::NoChange, span.cols() + 1);
      span.col(span.cols() - 1) = f.eval(x);
    }
    const int r = rank_of(span);
    res.dim_reached = r;
    if (r == n) {
      res.satisfied = true;
      res.step = step;
      return res;
    }
    if (step == max_step) break;
    std::vector<PolyVectorField> next;
    next.reserve(layer.size() * m);
    for (const auto& f : layer) {
      for (int i = 0; i < m; ++i) {
        PolyVectorField b = lie_bracket_field(frame.field(i), f);
        if (!b.is_zero()) next.push_back(std::move(b));
      }
    }
    layer = std::move(next);
    if (layer.empty()) break;  // all further brackets vanish
  }
  res.satisfied = false;
  res.step = max_step;
  return res;
}

namespace {

Eigen::MatrixXd covariant_from_fields(int n, int count,
                                      const std::vector<Eigen::VectorXd>& values,
                                      const std::vector<Eigen::MatrixXd>& jacobians,
                                      const Eigen::VectorXd& p) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(count, count);
  for (int i = 0; i < count; ++i) {
    for (int j = i; j < count; ++j) {
      const Eigen::VectorXd nabla_ij = jacobians[j] * values[i];  // derivative of X_j along X_i
      const Eigen::VectorXd nabla_ji = jacobians[i] * values[j];
      const double v = 0.5 * (nabla_ij + nabla_ji).dot(p);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  (void)n;
  return a;
}

}  // namespace

Eigen::MatrixXd covariant_matrix(const Frame& frame, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& p) {
  const int n = frame.ambient_dim();
  const int m = frame.rank();
  if (x.size() != n || p.size() != n) throw dimension_error("dimension mismatch");
  std::vector<Eigen::VectorXd> values(m);
  std::vector<Eigen::MatrixXd> jacobians(m);
  for (int i = 0; i < m; ++i) {
    values[i] = frame.field(i).eval(x);
    jacobians[i] = frame.field(i).jacobian(x);
  }
  return covariant_from_fields(n, m, values, jacobians, p);
}

Eigen::MatrixXd covariant_matrix_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& p) {
  const int n = frame.ambient_dim();
  const int m = frame.rank();
  if (x.size() != n || p.size() != n) throw dimension_error("dimension mismatch");
  std::vector<Eigen::VectorXd> values(n);
  std::vector<Eigen::MatrixXd> jacobians(n);
  for (int i = 0; i < n; ++i) {
    values[i] = frame.eval_field(i, x);
    jacobians[i] =
        (i < m) ? frame.base().field(i).jacobian(x) : Eigen::MatrixXd::Zero(n, n);
  }
  return covariant_from_fields(n, n, values, jacobians, p);
}

}  // namespace hmcf
