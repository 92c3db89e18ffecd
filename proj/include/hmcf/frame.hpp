#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hmcf/polynomial.hpp"

namespace hmcf {

enum class FrameKind { heisenberg1, euclidean, custom };

// A family of m polynomial vector fields on R^N (m <= N), kept in symbolic
// form so Jacobians, connection terms and iterated brackets are exact.
class Frame {
 public:
  static Frame heisenberg1();
  static Frame euclidean(int n);
  // Custom frames are accepted as-is; structural oddities (first block not
  // the identity pattern, tail components depending on coordinates beyond
  // the first m) are reported as warnings, not rejected.
  static Frame custom(int n, int m, std::vector<PolyVectorField> fields);

  FrameKind kind() const { return kind_; }
  int ambient_dim() const { return n_; }
  int rank() const { return m_; }
  const PolyVectorField& field(int i) const { return fields_[i]; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // True when every field is constant in x (sigma does not vary).
  bool sigma_constant() const;

  Eigen::VectorXd eval_field(int i, const Eigen::VectorXd& x) const;

  // sigma(x): m x N, row i = field i evaluated at x.
  Eigen::MatrixXd sigma(const Eigen::VectorXd& x) const;

  // sigma(x) * p, length m.
  Eigen::VectorXd apply_sigma(const Eigen::VectorXd& x, const Eigen::VectorXd& p) const;

  // sigma(x)^T * w, length N.
  Eigen::VectorXd apply_sigma_transpose(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& w) const;

 private:
  Frame(FrameKind kind, int n, int m, std::vector<PolyVectorField> fields);
  void collect_warnings();

  FrameKind kind_ = FrameKind::euclidean;
  int n_ = 0;
  int m_ = 0;
  std::vector<PolyVectorField> fields_;
  std::vector<std::string> warnings_;
};

// Frame completed to full rank: the m base fields plus epsilon times the
// missing coordinate directions. epsilon must be positive.
class EpsilonFrame {
 public:
  EpsilonFrame(Frame base, double epsilon);

  const Frame& base() const { return base_; }
  double epsilon() const { return eps_; }
  int ambient_dim() const { return base_.ambient_dim(); }
  int rank() const { return base_.rank(); }

  // Field i of the completed family (i in [0, N)).
  Eigen::VectorXd eval_field(int i, const Eigen::VectorXd& x) const;

  // sigma_eps(x): N x N, first m rows from the base frame, remaining rows
  // epsilon * e_i. Invertible for epsilon > 0.
  Eigen::MatrixXd sigma_eps(const Eigen::VectorXd& x) const;

  Eigen::VectorXd apply_sigma_eps(const Eigen::VectorXd& x, const Eigen::VectorXd& p) const;
  Eigen::VectorXd apply_sigma_eps_transpose(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& w) const;

 private:
  Frame base_;
  double eps_;
};

// sigma as free functions, mirroring how the operators are written out.
Eigen::MatrixXd sigma(const Frame& frame, const Eigen::VectorXd& x);
Eigen::MatrixXd sigma_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x);

// [X_i, X_j](x) evaluated exactly from the symbolic fields.
Eigen::VectorXd lie_bracket(const Frame& frame, int i, int j, const Eigen::VectorXd& x);

struct HormanderResult {
  bool satisfied = false;
  int step = 0;         // first bracket depth at which the span fills R^N
  int dim_reached = 0;  // span dimension after max_step layers
};

// Iterated brackets up to max_step layers, evaluated at x, with the span
// dimension tracked layer by layer.
HormanderResult hormander_check(const Frame& frame, const Eigen::VectorXd& x, int max_step);

// Symmetrized connection matrix, flat connection (derivative of the target
// field along the source field): entry (i, j) is
//   0.5 * < J_{X_j}(x) X_i(x) + J_{X_i}(x) X_j(x), p >.
// The m x m version uses the base fields, the N x N version the completed
// family (completion fields are constant, so their Jacobians vanish).
Eigen::MatrixXd covariant_matrix(const Frame& frame, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& p);
Eigen::MatrixXd covariant_matrix_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& p);

}  // namespace hmcf
