#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hmcf/frame.hpp"
#include "hmcf/grid.hpp"

namespace hmcf {

// Pointwise operator values on raw jets (spatial gradient du, Hessian d2u).
// The operator is  F = -trace(B) + <B n, n>  with  B = sigma d2u sigma^T
// plus the symmetrized connection matrix, and n the unit horizontal normal.

struct OperatorEnvelopes {
  double upper = 0.0;  // -trace(B) + lambda_max(B)
  double lower = 0.0;  // -trace(B) + lambda_min(B)
};

// Horizontal operator (m x m matrix B). Throws characteristic_point_error
// when |sigma du| < tol_char(|du|).
double mcf_operator(const Frame& frame, const Eigen::VectorXd& x, const Eigen::VectorXd& du,
                    const Eigen::MatrixXd& d2u);
OperatorEnvelopes mcf_envelopes(const Frame& frame, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& du, const Eigen::MatrixXd& d2u);

// Completed-family operator (N x N matrix). Here only a vanishing Euclidean
// gradient is degenerate; that case throws zero_gradient_error.
double mcf_operator_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& du, const Eigen::MatrixXd& d2u);
OperatorEnvelopes mcf_envelopes_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& du, const Eigen::MatrixXd& d2u);

// Right-hand side used by the time stepper: u_t = trace(B) - <B n, n> away
// from degeneracy, switching to the upper-envelope value trace(B) - lambda_max
// as |du| falls below tol_char, with a linear blend on |du| between tol_char
// and 1e3 * tol_char so the field stays continuous. Never throws; `enveloped`
// reports whether the envelope branch contributed.
double rhs_stabilized(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& du, const Eigen::MatrixXd& d2u,
                      bool* enveloped = nullptr);

struct PdeOptions {
  double cfl_safety = 0.2;     // dt <= safety * h_min^2 / (N * max lambda_max(sigma sigma^T))
  int threads = 1;
  double snapshot_every = 0.0;  // cadence; 0 keeps only the initial and final fields
};

// Largest admissible explicit step for this frame on this grid. The scan
// evaluates lambda_max(sigma_eps sigma_eps^T) at every node unless the frame
// matrix is constant.
double cfl_dt_limit(const EpsilonFrame& frame, const GridSpec& grid, double safety);

struct StepDiagnostics {
  long step = 0;
  double t = 0.0;  // time after the step
  double umin = 0.0;
  double umax = 0.0;
  std::size_t envelope_nodes = 0;  // nodes where the envelope branch contributed
};

// Explicit Euler sweep over the grid. Owns the scratch buffer; one instance
// per evolution. Writes are disjoint per node, so results are independent of
// the thread count.
class ExplicitStepper {
 public:
  ExplicitStepper(EpsilonFrame frame, GridSpec grid, PdeOptions opts);

  double dt_limit() const { return dt_limit_; }
  const GridSpec& grid() const { return grid_; }

  // Advances u (flattened samples) by dt; returns the step diagnostics.
  // dt beyond the limit (plus roundoff slack) throws cfl_violation_error;
  // a non-finite result throws nan_detected_error.
  StepDiagnostics step(Eigen::VectorXd& u, long step_index, double t_next, double dt);

 private:
  EpsilonFrame frame_;
  GridSpec grid_;
  PdeOptions opts_;
  double dt_limit_ = 0.0;
  Eigen::VectorXd scratch_;
  std::vector<std::vector<double>> coords_;  // per-axis node coordinates
};

struct EvolveResult {
  std::vector<LevelSetField> snapshots;  // initial field first, final field last
  std::vector<StepDiagnostics> diagnostics;
  double dt = 0.0;
  long steps = 0;
};

// Runs u from its initial samples to t_final with a uniform step chosen so
// every snapshot time is hit exactly: dt = cadence / ceil(cadence / limit).
// t_final must be an integer multiple of the cadence when one is given.
EvolveResult evolve(const EpsilonFrame& frame, const LevelSetField& u0, double t_final,
                    const PdeOptions& opts);

}  // namespace hmcf
