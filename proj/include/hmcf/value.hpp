#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hmcf/frame.hpp"
#include "hmcf/policy.hpp"
#include "hmcf/scalar_field.hpp"
#include "hmcf/sde.hpp"

namespace hmcf {

struct ValueEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long paths = 0;
  double order = 0.0;  // the p of the power mean; infinity marks the sup functional
  double shift = 0.0;  // bound added inside the power mean, 0 when unused
};

// Power-mean functional of the terminal cost over an ensemble's endpoints:
// (mean (g + shift)^p)^(1/p) - shift, with shift = declared bound when the
// cost's lower bound is negative (so the base is nonnegative) and 0 else.
// Integer p uses exact binary exponentiation, which keeps the functional
// monotone under pointwise-ordered costs. p = infinity gives the sample
// maximum; its statistical error is one-sided and reported as 0.
ValueEstimate cost_functional(const TerminalCost& g, const PathEnsemble& ensemble, double p);

// Value along a fixed policy from (t, x): simulate to the horizon, apply the
// functional. At t == horizon no paths are simulated and g(x) is returned
// exactly.
ValueEstimate estimate_value(const EpsilonFrame& frame, DynamicsMode mode, const Policy& policy,
                             const TerminalCost& g, const Eigen::VectorXd& x, double t,
                             double horizon, double p, double dt, long paths,
                             std::uint64_t seed, int threads);

struct PolicyCandidateResult {
  std::string policy_id;
  double value = 0.0;
  double std_error = 0.0;
};

// One estimate per constant candidate direction, all with the same seed
// (common random numbers), in candidate order. The budget-B search value is
// the minimum over the first B entries, so it cannot increase with B.
std::vector<PolicyCandidateResult> search_constant(
    const EpsilonFrame& frame, DynamicsMode mode, const std::vector<Eigen::VectorXd>& candidates,
    const TerminalCost& g, const Eigen::VectorXd& x, double t, double horizon, double p,
    double dt, long paths, std::uint64_t seed, int threads);

double best_over_prefix(const std::vector<PolicyCandidateResult>& entries, std::size_t budget);

// Index of the minimizing entry among the first `budget` (first wins ties).
std::size_t best_index_over_prefix(const std::vector<PolicyCandidateResult>& entries,
                                   std::size_t budget);

// Coordinate descent over the cells of a table policy: sweep cells in order,
// try each candidate direction, keep improvements, stop when the evaluation
// budget runs out or a full sweep yields no improvement. Returns the best
// value found; the table holds the corresponding entries.
double improve_table(const EpsilonFrame& frame, DynamicsMode mode, GridTablePolicy& table,
                     const std::vector<Eigen::VectorXd>& candidates, const TerminalCost& g,
                     const Eigen::VectorXd& x, double t, double horizon, double p, double dt,
                     long paths, std::uint64_t seed, int threads, long max_evaluations);

// ---- control Hamiltonian on second-order data ----

// W = sigma(x) S sigma(x)^T - A(x, p): the matrix whose extremal values over
// unit directions the Hamiltonian takes. Note the connection term enters
// with the opposite sign to the operator's matrix.
Eigen::MatrixXd hamiltonian_matrix(const Frame& frame, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& p, const Eigen::MatrixXd& s);
Eigen::MatrixXd hamiltonian_matrix_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& p, const Eigen::MatrixXd& s);

// -trace(W) + <W a, a> for one unit direction a.
double hamiltonian_value(const Eigen::MatrixXd& w, const Eigen::VectorXd& a);

// sup over unit a, i.e. -trace(W) + lambda_max(W), via the eigensolver.
double hamiltonian_closed(const Eigen::MatrixXd& w);

struct BruteForceExtremum {
  double value = 0.0;       // after local refinement
  double grid_value = 0.0;  // best over the raw direction grid alone
  Eigen::VectorXd argmax;
};

// Pure enumeration, independent of any eigensolver: evaluate a direction
// grid, then refine shrinking local grids around the strongest candidates.
BruteForceExtremum hamiltonian_bruteforce(const Eigen::MatrixXd& w, int directions,
                                          int refine_levels = 4);

// sup over unit a of  -(p-1)/z (|q|^2 - <q,a>^2) + trace(M) - <M a, a>,
// closed form via lambda_max((p-1)/z q q^T - M). Requires p > 1, z > 0.
double hamiltonian_power(double p, double z, const Eigen::VectorXd& q, const Eigen::MatrixXd& m);

// Same after the anisotropic scaling q -> D q, M -> D M D with
// D = diag(I_rank, eps I).
double hamiltonian_power_eps(double p, double z, const Eigen::VectorXd& q,
                             const Eigen::MatrixXd& m, double eps, int rank);

struct EigenDerivativeCheck {
  double finite_difference = 0.0;  // central difference of lambda_max(S + t H)
  double inner_product = 0.0;      // <H a, a> with a the top eigenvector of S
  double agreement = 0.0;          // |fd - ip| / max(|ip|, 1)
  double gap = 0.0;                // lambda_1 - lambda_2 of S
};

// Derivative of the top eigenvalue along a symmetric perturbation, two ways.
// Throws eigen_gap_error when the top eigenvalue of S is within 1e-6 of the
// next one (the derivative stops being well defined there).
EigenDerivativeCheck lambda_max_derivative(const Eigen::MatrixXd& s, const Eigen::MatrixXd& h,
                                           double delta = 1e-5);

}  // namespace hmcf
