#include "hmcf/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>

#include "hmcf/errors.hpp"
#include "hmcf/levelset.hpp"
#include "hmcf/parallel.hpp"
#include "hmcf/symmetric_eigen.hpp"

namespace hmcf {

namespace {

// Closed-form largest eigenvalue of a small symmetric matrix (row-major),
// allocation-free for the sweep's envelope branch.
inline double lambda_max_fixed2(const double* b) {
  const double half_tr = 0.5 * (b[0] + b[3]);
  const double half_df = 0.5 * (b[0] - b[3]);
  return half_tr + std::sqrt(half_df * half_df + b[1] * b[1]);
}

inline double lambda_max_fixed3(const double* b) {
  const double p1 = b[1] * b[1] + b[2] * b[2] + b[5] * b[5];
  if (p1 == 0.0) return std::max(b[0], std::max(b[4], b[8]));
  const double q = (b[0] + b[4] + b[8]) / 3.0;
  const double d0 = b[0] - q;
  const double d1 = b[4] - q;
  const double d2 = b[8] - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const double c00 = d0 / p, c11 = d1 / p, c22 = d2 / p;
  const double c01 = b[1] / p, c02 = b[2] / p, c12 = b[5] / p;
  double r = 0.5 * (c00 * (c11 * c22 - c12 * c12) - c01 * (c01 * c22 - c12 * c02) +
                    c02 * (c01 * c12 - c11 * c02));
  r = std::min(1.0, std::max(-1.0, r));
  return q + 2.0 * p * std::cos(std::acos(r) / 3.0);
}

template <int D>
inline double lambda_max_fixed(const double* b) {
  if constexpr (D == 2) return lambda_max_fixed2(b);
  else return lambda_max_fixed3(b);
}

// Blend weight between the envelope branch (0) and the regular branch (1)
// as a function of the Euclidean gradient magnitude.
inline double blend_weight(double g) {
  const double lo = tol_char(g);
  const double hi = 1e3 * lo;
  const double w = (g - lo) / (hi - lo);
  return std::min(1.0, std::max(0.0, w));
}

// trace(B) - blend of <B q, q>/|q|^2 and lambda_max(B); Eigen flavor shared
// by the pointwise API and the generic sweep.
double blended_value(const Eigen::MatrixXd& b, const Eigen::VectorXd& q, double g,
                     bool* enveloped) {
  const double tr = b.trace();
  const double w = blend_weight(g);
  if (enveloped) *enveloped = (w < 1.0);
  if (w >= 1.0) return tr - q.dot(b * q) / q.squaredNorm();
  const double env = tr - lambda_max(b);
  if (w <= 0.0) return env;
  const double reg = tr - q.dot(b * q) / q.squaredNorm();
  return w * reg + (1.0 - w) * env;
}

enum class FastSigma { identity, heisenberg };

struct StepAccum {
  double umin = std::numeric_limits<double>::infinity();
  double umax = -std::numeric_limits<double>::infinity();
  std::size_t envelope_nodes = 0;
  bool finite = true;
};

// Hot loop: explicit Euler sweep with compile-time dimension and closed-form
// frame matrices. The heisenberg fill is sigma rows (1,0,-x2/2), (0,1,x1/2),
// (0,0,eps); both supported frames have zero connection matrix.
template <int D, FastSigma Mode>
void sweep_fixed(const GridSpec& grid, const std::vector<std::vector<double>>& coords,
                 double eps, const double* uin, double* uout, double dt, int threads,
                 StepAccum& total) {
  int n[D];
  std::ptrdiff_t stride[D];
  double inv2h[D], invh2[D], inv4hh[D * D];
  for (int a = 0; a < D; ++a) {
    n[a] = grid.nodes[a];
    stride[a] = grid.stride(a);
    const double h = grid.spacing(a);
    inv2h[a] = 1.0 / (2.0 * h);
    invh2[a] = 1.0 / (h * h);
  }
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      inv4hh[a * D + b] = 1.0 / (4.0 * grid.spacing(a) * grid.spacing(b));

  std::mutex merge_mutex;
  parallel_for_blocks(grid.total(), threads, [&](std::size_t begin, std::size_t end) {
    StepAccum acc;
    int idx[D];
    {
      std::size_t rest = begin;
      for (int a = D - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rest % n[a]);
        rest /= n[a];
      }
    }
    double p[D], s[D * D];
    for (std::size_t flat = begin; flat < end; ++flat) {
      node_jet_fixed<D>(uin, flat, idx, n, stride, inv2h, invh2, inv4hh, p, s);

      double sig[D * D];
      if constexpr (Mode == FastSigma::heisenberg) {
        static_assert(D == 3);
        const double a01 = -0.5 * coords[1][idx[1]];
        const double a10 = 0.5 * coords[0][idx[0]];
        sig[0] = 1.0; sig[1] = 0.0; sig[2] = a01;
        sig[3] = 0.0; sig[4] = 1.0; sig[5] = a10;
        sig[6] = 0.0; sig[7] = 0.0; sig[8] = eps;
      }

      double b[D * D];
      double q[D];
      if constexpr (Mode == FastSigma::identity) {
        for (int i = 0; i < D * D; ++i) b[i] = s[i];
        for (int i = 0; i < D; ++i) q[i] = p[i];
      } else {
        double m[D * D];  // sigma * S
        for (int i = 0; i < D; ++i)
          for (int k = 0; k < D; ++k) {
            double acc_ik = 0.0;
            for (int l = 0; l < D; ++l) acc_ik += sig[i * D + l] * s[l * D + k];
            m[i * D + k] = acc_ik;
          }
        for (int i = 0; i < D; ++i)
          for (int j = 0; j < D; ++j) {
            double acc_ij = 0.0;
            for (int k = 0; k < D; ++k) acc_ij += m[i * D + k] * sig[j * D + k];
            b[i * D + j] = acc_ij;
          }
        for (int i = 0; i < D; ++i) {
          double acc_i = 0.0;
          for (int k = 0; k < D; ++k) acc_i += sig[i * D + k] * p[k];
          q[i] = acc_i;
        }
      }

      double g2 = 0.0;
      for (int i = 0; i < D; ++i) g2 += p[i] * p[i];
      const double g = std::sqrt(g2);
      const double w = blend_weight(g);

      double tr = 0.0;
      for (int i = 0; i < D; ++i) tr += b[i * D + i];

      double val;
      if (w >= 1.0) {
        double qq = 0.0, qbq = 0.0;
        for (int i = 0; i < D; ++i) {
          qq += q[i] * q[i];
          double bq = 0.0;
          for (int j = 0; j < D; ++j) bq += b[i * D + j] * q[j];
          qbq += q[i] * bq;
        }
        val = tr - qbq / qq;
      } else {
        ++acc.envelope_nodes;
        const double env = tr - lambda_max_fixed<D>(b);
        if (w <= 0.0) {
          val = env;
        } else {
          double qq = 0.0, qbq = 0.0;
          for (int i = 0; i < D; ++i) {
            qq += q[i] * q[i];
            double bq = 0.0;
            for (int j = 0; j < D; ++j) bq += b[i * D + j] * q[j];
            qbq += q[i] * bq;
          }
          val = w * (tr - qbq / qq) + (1.0 - w) * env;
        }
      }

      const double next = uin[flat] + dt * val;
      uout[flat] = next;
      if (!std::isfinite(next)) acc.finite = false;
      if (next < acc.umin) acc.umin = next;
      if (next > acc.umax) acc.umax = next;

      int a = D - 1;
      while (a >= 0 && ++idx[a] == n[a]) {
        idx[a] = 0;
        --a;
      }
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    total.umin = std::min(total.umin, acc.umin);
    total.umax = std::max(total.umax, acc.umax);
    total.envelope_nodes += acc.envelope_nodes;
    total.finite = total.finite && acc.finite;
  });
}

// Dynamic-dimension sweep for custom frames: full frame matrix and
// connection matrix per node. Slow but completely general.
void sweep_dynamic(const EpsilonFrame& frame, const GridSpec& grid, const double* uin,
                   double* uout, double dt, int threads, StepAccum& total) {
  std::mutex merge_mutex;
  parallel_for_blocks(grid.total(), threads, [&](std::size_t begin, std::size_t end) {
    StepAccum acc;
    std::vector<int> idx(grid.nodes.size());
    Eigen::VectorXd p;
    Eigen::MatrixXd s;
    for (std::size_t flat = begin; flat < end; ++flat) {
      grid.unflatten(flat, idx);
      const Eigen::VectorXd x = grid.point(idx);
      node_jet(grid, uin, idx, p, s);
      const Eigen::MatrixXd sig = frame.sigma_eps(x);
      const Eigen::MatrixXd b = sig * s * sig.transpose() + covariant_matrix_eps(frame, x, p);
      const Eigen::VectorXd q = sig * p;
      bool env = false;
      const double val = blended_value(b, q, p.norm(), &env);
      if (env) ++acc.envelope_nodes;
      const double next = uin[flat] + dt * val;
      uout[flat] = next;
      if (!std::isfinite(next)) acc.finite = false;
      if (next < acc.umin) acc.umin = next;
      if (next > acc.umax) acc.umax = next;
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    total.umin = std::min(total.umin, acc.umin);
    total.umax = std::max(total.umax, acc.umax);
    total.envelope_nodes += acc.envelope_nodes;
    total.finite = total.finite && acc.finite;
  });
}

}  // namespace

double mcf_operator(const Frame& frame, const Eigen::VectorXd& x, const Eigen::VectorXd& du,
                    const Eigen::MatrixXd& d2u) {
  const Eigen::MatrixXd sig = frame.sigma(x);
  const Eigen::VectorXd q = frame.apply_sigma(x, du);
  const double qn = q.norm();
  if (qn < tol_char(du.norm()))
    throw characteristic_point_error("horizontal gradient vanishes: operator undefined here");
  const Eigen::MatrixXd b = sig * d2u * sig.transpose() + covariant_matrix(frame, x, du);
  const Eigen::VectorXd nvec = q / qn;
  return -b.trace() + nvec.dot(b * nvec);
}

OperatorEnvelopes mcf_envelopes(const Frame& frame, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& du, const Eigen::MatrixXd& d2u) {
  const Eigen::MatrixXd sig = frame.sigma(x);
  const Eigen::MatrixXd b = sig * d2u * sig.transpose() + covariant_matrix(frame, x, du);
  const double tr = b.trace();
  return {-tr + lambda_max(b), -tr + lambda_min(b)};
}

double mcf_operator_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& du, const Eigen::MatrixXd& d2u) {
  const double g = du.norm();
  if (g < tol_char(g))
    throw zero_gradient_error("gradient vanishes: completed operator undefined here");
  const Eigen::MatrixXd sig = frame.sigma_eps(x);
  const Eigen::MatrixXd b = sig * d2u * sig.transpose() + covariant_matrix_eps(frame, x, du);
  const Eigen::VectorXd q = sig * du;
  const Eigen::VectorXd nvec = q / q.norm();
  return -b.trace() + nvec.dot(b * nvec);
}

OperatorEnvelopes mcf_envelopes_eps(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& du, const Eigen::MatrixXd& d2u) {
  const Eigen::MatrixXd sig = frame.sigma_eps(x);
  const Eigen::MatrixXd b = sig * d2u * sig.transpose() + covariant_matrix_eps(frame, x, du);
  const double tr = b.trace();
  return {-tr + lambda_max(b), -tr + lambda_min(b)};
}

double rhs_stabilized(const EpsilonFrame& frame, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& du, const Eigen::MatrixXd& d2u, bool* enveloped) {
  const Eigen::MatrixXd sig = frame.sigma_eps(x);
  const Eigen::MatrixXd b = sig * d2u * sig.transpose() + covariant_matrix_eps(frame, x, du);
  const Eigen::VectorXd q = sig * du;
  return blended_value(b, q, du.norm(), enveloped);
}

double cfl_dt_limit(const EpsilonFrame& frame, const GridSpec& grid, double safety) {
  grid.validate();
  if (!(safety > 0.0) || safety > 1.0)
    throw config_error("cfl safety factor must lie in (0, 1]");
  if (grid.dim() != frame.ambient_dim())
    throw dimension_error("grid dimension does not match the frame's ambient dimension");
  double lmax = 0.0;
  if (frame.base().sigma_constant()) {
    std::vector<int> idx(grid.nodes.size(), 0);
    lmax = lambda_max(frame.sigma_eps(grid.point(idx)) *
                      frame.sigma_eps(grid.point(idx)).transpose());
  } else {
    std::vector<int> idx(grid.nodes.size(), 0);
    const std::size_t tot = grid.total();
    for (std::size_t flat = 0; flat < tot; ++flat) {
      grid.unflatten(flat, idx);
      const Eigen::MatrixXd sig = frame.sigma_eps(grid.point(idx));
      const Eigen::MatrixXd g = sig * sig.transpose();
      double l;
      if (g.rows() == 2) l = lambda_max_fixed2(g.data());
      else if (g.rows() == 3) l = lambda_max_fixed3(g.data());
      else l = lambda_max(g);
      lmax = std::max(lmax, l);
    }
  }
  double hmin = grid.spacing(0);
  for (int a = 1; a < grid.dim(); ++a) hmin = std::min(hmin, grid.spacing(a));
  return safety * hmin * hmin / (grid.dim() * lmax);
}

ExplicitStepper::ExplicitStepper(EpsilonFrame frame, GridSpec grid, PdeOptions opts)
    : frame_(std::move(frame)), grid_(std::move(grid)), opts_(opts) {
  grid_.validate();
  if (grid_.dim() != frame_.ambient_dim())
    throw dimension_error("grid dimension does not match the frame's ambient dimension");
  dt_limit_ = cfl_dt_limit(frame_, grid_, opts_.cfl_safety);
  coords_.resize(grid_.dim());
  for (int a = 0; a < grid_.dim(); ++a) {
    coords_[a].resize(grid_.nodes[a]);
    for (int i = 0; i < grid_.nodes[a]; ++i) coords_[a][i] = grid_.lo[a] + i * grid_.spacing(a);
  }
}

StepDiagnostics ExplicitStepper::step(Eigen::VectorXd& u, long step_index, double t_next,
                                      double dt) {
  if (!(dt > 0.0)) throw config_error("time step must be positive");
  if (dt > dt_limit_ * (1.0 + 1e-9)) {
    char msg[128];
    std::snprintf(msg, sizeof(msg), "dt %.6e exceeds the stability limit %.6e", dt, dt_limit_);
    throw cfl_violation_error(msg);
  }
  if (u.size() != static_cast<Eigen::Index>(grid_.total()))
    throw dimension_error("field size does not match the grid");
  scratch_.resize(u.size());

  StepAccum acc;
  const FrameKind kind = frame_.base().kind();
  const int d = grid_.dim();
  if (kind == FrameKind::heisenberg1 && d == 3) {
    sweep_fixed<3, FastSigma::heisenberg>(grid_, coords_, frame_.epsilon(), u.data(),
                                          scratch_.data(), dt, opts_.threads, acc);
  } else if (kind == FrameKind::euclidean && d == 2) {
    sweep_fixed<2, FastSigma::identity>(grid_, coords_, frame_.epsilon(), u.data(),
                                        scratch_.data(), dt, opts_.threads, acc);
  } else if (kind == FrameKind::euclidean && d == 3) {
    sweep_fixed<3, FastSigma::identity>(grid_, coords_, frame_.epsilon(), u.data(),
                                        scratch_.data(), dt, opts_.threads, acc);
  } else {
    sweep_dynamic(frame_, grid_, u.data(), scratch_.data(), dt, opts_.threads, acc);
  }
  if (!acc.finite) {
    char msg[128];
    std::snprintf(msg, sizeof(msg), "non-finite field value after step %ld", step_index);
    throw nan_detected_error(msg);
  }
  u.swap(scratch_);
  StepDiagnostics diag;
  diag.step = step_index;
  diag.t = t_next;
  diag.umin = acc.umin;
  diag.umax = acc.umax;
  diag.envelope_nodes = acc.envelope_nodes;
  return diag;
}

EvolveResult evolve(const EpsilonFrame& frame, const LevelSetField& u0, double t_final,
                    const PdeOptions& opts) {
  u0.grid.validate();
  if (!(t_final >= 0.0)) throw config_error("final time must be nonnegative");
  if (u0.values.size() != static_cast<Eigen::Index>(u0.grid.total()))
    throw dimension_error("initial field size does not match the grid");
  if (t_final == 0.0) {
    EvolveResult res;
    res.snapshots.push_back(u0);
    res.snapshots.front().time = 0.0;
    return res;
  }

  double seg = t_final;
  long nseg = 1;
  if (opts.snapshot_every > 0.0) {
    const double ratio = t_final / opts.snapshot_every;
    nseg = std::lround(ratio);
    if (nseg < 1 || std::abs(nseg * opts.snapshot_every - t_final) > 1e-9 * std::max(1.0, t_final))
      throw config_error("final time must be a whole number of snapshot intervals");
    seg = opts.snapshot_every;
  }

  ExplicitStepper stepper(frame, u0.grid, opts);
  const long k = std::max<long>(1, static_cast<long>(std::ceil(seg / stepper.dt_limit() - 1e-9)));
  const double dt = seg / k;

  EvolveResult res;
  res.dt = dt;
  res.steps = nseg * k;
  res.snapshots.push_back(u0);
  res.snapshots.front().time = 0.0;
  res.diagnostics.reserve(static_cast<std::size_t>(res.steps));

  Eigen::VectorXd u = u0.values;
  long global = 0;
  for (long si = 1; si <= nseg; ++si) {
    for (long j = 1; j <= k; ++j) {
      ++global;
      const double tn = (si - 1) * seg + j * dt;
      res.diagnostics.push_back(stepper.step(u, global, tn, dt));
    }
    LevelSetField snap;
    snap.grid = u0.grid;
    snap.values = u;
    snap.time = si * seg;
    res.snapshots.push_back(std::move(snap));
  }
  return res;
}

}  // namespace hmcf
