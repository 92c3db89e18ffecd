#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hmcf/frame.hpp"
#include "hmcf/policy.hpp"
#include "hmcf/polynomial.hpp"

namespace hmcf {

// Which dynamics a simulation integrates:
//   horizontal       dxi = sum_i X_i(xi) o dB^i          (m-dimensional noise)
//   controlled_sub   dxi = sqrt(2) sigma(xi)^T nu o dB   (m-dimensional noise)
//   controlled_eps   dxi = sqrt(2) sigma_eps(xi)^T nu o dB  (N-dimensional noise)
// with nu = I - a a^T and the control direction a frozen over each step.
enum class DynamicsMode { horizontal, controlled_sub, controlled_eps };

struct SdeOptions {
  int threads = 1;
  bool record_paths = false;  // keep whole trajectories, not just endpoints
};

struct PathEnsemble {
  double t0 = 0.0;
  double t1 = 0.0;
  double dt = 0.0;
  long steps = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd terminal;            // N x K endpoints
  std::vector<Eigen::MatrixXd> paths;  // when recorded: K blocks of N x (steps+1)
};

// Stratonovich integration uses the Heun predictor-corrector; every path k
// draws from its own generator seeded by (seed, k), so results depend neither
// on the thread count nor on the order paths are processed in.

PathEnsemble simulate_horizontal(const Frame& frame, const Eigen::VectorXd& x0, double t0,
                                 double t1, double dt, long paths, std::uint64_t seed,
                                 const SdeOptions& opts);

PathEnsemble simulate_controlled(const EpsilonFrame& frame, DynamicsMode mode,
                                 const Policy& policy, const Eigen::VectorXd& x0, double t0,
                                 double t1, double dt, long paths, std::uint64_t seed,
                                 const SdeOptions& opts);

// Single-step weak consistency of the controlled dynamics against the
// symbolic generator sum_{rs} nu_rs X_s(X_r phi) at a point, for a list of
// step sizes sharing one draw per sample pair (antithetic +/-Z). The control
// variate subtracts the exactly-known fluctuating part, so the bias of the
// scheme is visible at modest sample counts.
struct GeneratorOrderRow {
  double dt = 0.0;
  double estimate_plain = 0.0;
  double stderr_plain = 0.0;
  double error_plain = 0.0;
  double estimate_cv = 0.0;
  double stderr_cv = 0.0;
  double error_cv = 0.0;
};

struct GeneratorOrderResult {
  double reference = 0.0;  // symbolic generator value at x0
  std::vector<GeneratorOrderRow> rows;
  double observed_order = 0.0;  // min log2 error ratio over consecutive halvings
};

GeneratorOrderResult generator_weak_order(const EpsilonFrame& frame, bool completed,
                                          const Polynomial& phi, const Eigen::VectorXd& x0,
                                          const Eigen::VectorXd& control,
                                          const std::vector<double>& dts, long pairs,
                                          std::uint64_t seed, int threads);

}  // namespace hmcf
