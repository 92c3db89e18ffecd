#include "hmcf/value.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "hmcf/errors.hpp"
#include "hmcf/symmetric_eigen.hpp"

namespace hmcf {

namespace {

bool is_sup_order(double p) { return std::isinf(p) && p > 0.0; }

// x^p for integer p >= 1 by binary exponentiation: every operation is a
// multiplication, so the map stays monotone on nonnegative inputs.
double int_pow(double x, long p) {
  double acc = 1.0;
  double base = x;
  long e = p;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

double power_of(double x, double p) {
  const long ip = std::lround(p);
  if (ip >= 1 && p == static_cast<double>(ip)) return int_pow(x, ip);
  return std::pow(x, p);
}

}  // namespace

ValueEstimate cost_functional(const TerminalCost& g, const PathEnsemble& ensemble, double p) {
  const Eigen::Index paths = ensemble.terminal.cols();
  if (paths < 1) throw config_error("functional needs at least one path");
  if (g.dim != ensemble.terminal.rows())
    throw dimension_error("cost dimension does not match the ensemble");

  ValueEstimate est;
  est.paths = paths;
  est.order = p;

  if (is_sup_order(p)) {
    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd xk(ensemble.terminal.rows());
    for (Eigen::Index k = 0; k < paths; ++k) {
      xk = ensemble.terminal.col(k);
      best = std::max(best, g.value(xk));
    }
    est.value = best;
    est.std_error = 0.0;  // sample maxima are biased low; no symmetric error bar
    return est;
  }

  if (!(p >= 1.0)) throw config_error("power-mean order must be >= 1 or infinity");
  const double shift = (g.lower < 0.0) ? g.bound : 0.0;
  est.shift = shift;

  Eigen::VectorXd y(paths);
  Eigen::VectorXd xk(ensemble.terminal.rows());
  double mean = 0.0;
  for (Eigen::Index k = 0; k < paths; ++k) {
    xk = ensemble.terminal.col(k);
    y[k] = power_of(g.value(xk) + shift, p);
    mean += y[k];
  }
  mean /= static_cast<double>(paths);
  est.value = std::pow(mean, 1.0 / p) - shift;

  if (paths > 1) {
    double ss = 0.0;
    for (Eigen::Index k = 0; k < paths; ++k) {
      const double d = y[k] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(paths - 1));
    if (sd > 0.0 && mean > 0.0) {
      est.std_error = (1.0 / p) * std::pow(mean, 1.0 / p - 1.0) * sd /
                      std::sqrt(static_cast<double>(paths));
    }
  }
  return est;
}

ValueEstimate estimate_value(const EpsilonFrame& frame, DynamicsMode mode, const Policy& policy,
                             const TerminalCost& g, const Eigen::VectorXd& x, double t,
                             double horizon, double p, double dt, long paths,
                             std::uint64_t seed, int threads) {
  if (g.dim != frame.ambient_dim())
    throw dimension_error("cost dimension does not match the frame");
  if (t > horizon) throw config_error("query time lies beyond the horizon");
  if (std::abs(horizon - t) <= 1e-12 * std::max(1.0, std::abs(horizon))) {
    ValueEstimate est;
    est.value = g.value(x);
    est.std_error = 0.0;
    est.paths = 0;
    est.order = p;
    return est;
  }
  SdeOptions opts;
  opts.threads = threads;
  const PathEnsemble ens = simulate_controlled(frame, mode, policy, x, t, horizon, dt, paths,
                                               seed, opts);
  return cost_functional(g, ens, p);
}

std::vector<PolicyCandidateResult> search_constant(
    const EpsilonFrame& frame, DynamicsMode mode, const std::vector<Eigen::VectorXd>& candidates,
    const TerminalCost& g, const Eigen::VectorXd& x, double t, double horizon, double p,
    double dt, long paths, std::uint64_t seed, int threads) {
  if (candidates.empty()) throw config_error("candidate list is empty");
  std::vector<PolicyCandidateResult> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "dir%04zu", i);
    ConstantPolicy pol(candidates[i], id);
    const ValueEstimate est =
        estimate_value(frame, mode, pol, g, x, t, horizon, p, dt, paths, seed, threads);
    out.push_back({id, est.value, est.std_error});
  }
  return out;
}

double best_over_prefix(const std::vector<PolicyCandidateResult>& entries, std::size_t budget) {
  return entries[best_index_over_prefix(entries, budget)].value;
}

std::size_t best_index_over_prefix(const std::vector<PolicyCandidateResult>& entries,
                                   std::size_t budget) {
  if (entries.empty() || budget < 1) throw config_error("prefix budget must be positive");
  const std::size_t stop = std::min(budget, entries.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < stop; ++i)
    if (entries[i].value < entries[best].value) best = i;
  return best;
}

double improve_table(const EpsilonFrame& frame, DynamicsMode mode, GridTablePolicy& table,
                     const std::vector<Eigen::VectorXd>& candidates, const TerminalCost& g,
                     const Eigen::VectorXd& x, double t, double horizon, double p, double dt,
                     long paths, std::uint64_t seed, int threads, long max_evaluations) {
  if (candidates.empty()) throw config_error("candidate list is empty");
  if (max_evaluations < 1) throw config_error("evaluation budget must be positive");
  long evals = 0;
  double best =
      estimate_value(frame, mode, table, g, x, t, horizon, p, dt, paths, seed, threads).value;
  ++evals;
  bool improved = true;
  while (improved && evals < max_evaluations) {
    improved = false;
    for (std::size_t cell = 0; cell < table.cell_count(); ++cell) {
      for (const Eigen::VectorXd& cand : candidates) {
        if (evals >= max_evaluations) return best;
        const Eigen::VectorXd old = table.entry(cell);
        table.set_entry(cell, cand);
        const double v =
            estimate_value(frame, mode, table, g, x, t, horizon, p, dt, paths, seed, threads)
                .value;
        ++evals;
        if (v < best) {
          best = v;
          improved = true;
        } else {
          table.set_entry(cell, old);
        }
      }
    }
  }
  return best;
}

Eigen::MatrixXd hamiltonian_matrix(const Frame& frame, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& p, const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd sig = frame.sigma(x);
  return sig * s * sig.transpose() - covariant_matrix(frame, x, p);
}

Eigen::MatrixXd hamiltonian_matrix_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& p, const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd sig = frame.sigma_eps(x);
  return sig * s * sig.transpose() - covariant_matrix_eps(frame, x, p);
}

double hamiltonian_value(const Eigen::MatrixXd& w, const Eigen::VectorXd& a) {
  if (w.rows() != w.cols() || a.size() != w.rows())
    throw dimension_error("hamiltonian direction dimension mismatch");
  if (std::abs(a.norm() - 1.0) > 1e-8)
    throw config_error("hamiltonian direction must be a unit vector");
  return -w.trace() + a.dot(w * a);
}

double hamiltonian_closed(const Eigen::MatrixXd& w) { return -w.trace() + lambda_max(w); }

namespace {

double quad_form(const Eigen::MatrixXd& w, const Eigen::VectorXd& a) { return a.dot(w * a); }

// Shrinking local grids around a start direction; enumeration only.
Eigen::VectorXd refine_direction(const Eigen::MatrixXd& w, Eigen::VectorXd a, double radius,
                                 int levels, double* best_out) {
  const Eigen::Index d = w.rows();
  double best = quad_form(w, a);
  for (int level = 0; level < levels; ++level) {
    if (d == 2) {
      const double th0 = std::atan2(a[1], a[0]);
      double best_th = th0;
      for (int i = -8; i <= 8; ++i) {
        const double th = th0 + radius * i / 8.0;
        Eigen::VectorXd cand(2);
        cand << std::cos(th), std::sin(th);
        const double v = quad_form(w, cand);
        if (v > best) {
          best = v;
          best_th = th;
        }
      }
      a << std::cos(best_th), std::sin(best_th);
    } else {
      // Orthonormal pair spanning the tangent plane at a.
      int axis = 0;
      for (Eigen::Index i = 1; i < d; ++i)
        if (std::abs(a[i]) < std::abs(a[axis])) axis = static_cast<int>(i);
      Eigen::VectorXd e1 = Eigen::VectorXd::Unit(d, axis);
      e1 -= a * a.dot(e1);
      e1.normalize();
      Eigen::VectorXd e2(3);
      e2 << a[1] * e1[2] - a[2] * e1[1], a[2] * e1[0] - a[0] * e1[2],
          a[0] * e1[1] - a[1] * e1[0];
      Eigen::VectorXd best_a = a;
      for (int i = -6; i <= 6; ++i) {
        for (int j = -6; j <= 6; ++j) {
          Eigen::VectorXd cand = a + (radius * i / 6.0) * e1 + (radius * j / 6.0) * e2;
          cand.normalize();
          const double v = quad_form(w, cand);
          if (v > best) {
            best = v;
            best_a = cand;
          }
        }
      }
      a = best_a;
    }
    radius *= 0.25;
  }
  *best_out = best;
  return a;
}

}  // namespace

BruteForceExtremum hamiltonian_bruteforce(const Eigen::MatrixXd& w, int directions,
                                          int refine_levels) {
  if (w.rows() != w.cols()) throw dimension_error("hamiltonian matrix must be square");
  const int d = static_cast<int>(w.rows());
  const std::vector<Eigen::VectorXd> dirs = direction_grid(d, directions);

  std::vector<double> vals(dirs.size());
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    vals[i] = quad_form(w, dirs[i]);
    if (vals[i] > vals[best_idx]) best_idx = i;
  }
  const double tr = w.trace();

  BruteForceExtremum out;
  out.grid_value = -tr + vals[best_idx];

  // Refine around the strongest candidates, not only the best one: when two
  // eigenvalues are close the grid winner can sit in the wrong well.
  std::vector<std::size_t> order(dirs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
  const std::size_t tops = std::min<std::size_t>(order.size(), 40);
  const double radius = 6.0 / std::sqrt(static_cast<double>(directions));

  double best = vals[best_idx];
  Eigen::VectorXd best_a = dirs[best_idx];
  for (std::size_t r = 0; r < tops; ++r) {
    double v = 0.0;
    Eigen::VectorXd a = refine_direction(w, dirs[order[r]], radius, refine_levels, &v);
    if (v > best) {
      best = v;
      best_a = a;
    }
  }
  out.value = -tr + best;
  out.argmax = best_a;
  return out;
}

double hamiltonian_power(double p, double z, const Eigen::VectorXd& q, const Eigen::MatrixXd& m) {
  if (!(p > 1.0)) throw config_error("power-mean hamiltonian needs p > 1");
  if (!(z > 0.0)) throw config_error("power-mean hamiltonian needs z > 0");
  if (m.rows() != m.cols() || q.size() != m.rows())
    throw dimension_error("hamiltonian data dimension mismatch");
  const double c = (p - 1.0) / z;
  const Eigen::MatrixXd inner = c * (q * q.transpose()) - m;
  return m.trace() - c * q.squaredNorm() + lambda_max(inner);
}

double hamiltonian_power_eps(double p, double z, const Eigen::VectorXd& q,
                             const Eigen::MatrixXd& m, double eps, int rank) {
  if (!(eps > 0.0)) throw config_error("completion scale must be positive");
  const Eigen::Index n = q.size();
  if (rank < 0 || rank > n) throw dimension_error("rank exceeds the ambient dimension");
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = rank; i < n; ++i) d[i] = eps;
  const Eigen::VectorXd qs = d.asDiagonal() * q;
  const Eigen::MatrixXd ms = d.asDiagonal() * m * d.asDiagonal();
  return hamiltonian_power(p, z, qs, ms);
}

EigenDerivativeCheck lambda_max_derivative(const Eigen::MatrixXd& s, const Eigen::MatrixXd& h,
                                           double delta) {
  if (!(delta > 0.0)) throw config_error("finite-difference step must be positive");
  const SymmetricEigen es = symmetric_eigen(s);
  const Eigen::Index n = s.rows();
  if (n < 2) throw dimension_error("need at least a 2 x 2 matrix");
  if (h.rows() != n || h.cols() != n) throw dimension_error("perturbation dimension mismatch");

  EigenDerivativeCheck out;
  out.gap = es.values[n - 1] - es.values[n - 2];
  if (out.gap < 1e-6)
    throw eigen_gap_error("top eigenvalue is nearly degenerate; derivative ill-defined");
  const Eigen::VectorXd a = es.vectors.col(n - 1);
  out.inner_product = a.dot(h * a);
  out.finite_difference =
      (lambda_max(s + delta * h) - lambda_max(s - delta * h)) / (2.0 * delta);
  out.agreement = std::abs(out.finite_difference - out.inner_product) /
                  std::max(std::abs(out.inner_product), 1.0);
  return out;
}

}  // namespace hmcf
