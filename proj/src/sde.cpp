#include "hmcf/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmcf/errors.hpp"
#include "hmcf/parallel.hpp"
#include "hmcf/rng.hpp"

namespace hmcf {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488016887242097;

long resolve_steps(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw config_error("time step must be positive");
  if (t1 < t0) throw config_error("horizon must not precede the start time");
  const double span = t1 - t0;
  const long steps = std::lround(span / dt);
  if (std::abs(steps * dt - span) > 1e-9 * std::max(1.0, span))
    throw config_error("horizon is not a whole number of steps");
  return steps;
}

// sigma^T w = sum_r w_r X_r(y), specialized per frame so the inner loop is
// allocation-free for the built-in frames.
struct ApplyHeisenberg {
  double eps;
  bool completed;
  void operator()(const double* y, const double* w, double* out) const {
    out[0] = w[0];
    out[1] = w[1];
    out[2] = 0.5 * (y[0] * w[1] - y[1] * w[0]) + (completed ? eps * w[2] : 0.0);
  }
};

struct ApplyEuclidean {
  int d;
  void operator()(const double*, const double* w, double* out) const {
    for (int i = 0; i < d; ++i) out[i] = w[i];
  }
};

struct ApplyGenericBase {
  const Frame* frame;
  void operator()(const double* y, const double* w, double* out) const {
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y, frame->ambient_dim());
    const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w, frame->rank());
    const Eigen::VectorXd r = frame->apply_sigma_transpose(yv, wv);
    for (int i = 0; i < frame->ambient_dim(); ++i) out[i] = r[i];
  }
};

struct ApplyGenericEps {
  const EpsilonFrame* frame;
  void operator()(const double* y, const double* w, double* out) const {
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y, frame->ambient_dim());
    const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w, frame->ambient_dim());
    const Eigen::VectorXd r = frame->apply_sigma_eps_transpose(yv, wv);
    for (int i = 0; i < frame->ambient_dim(); ++i) out[i] = r[i];
  }
};

template <class Apply>
void run_ensemble(const Apply& apply, int state_dim, int noise_dim, double factor,
                  const Policy* policy, const Eigen::VectorXd& x0, double t0, double dt,
                  long steps, long paths, std::uint64_t seed, int threads, bool record,
                  PathEnsemble& out) {
  out.terminal.resize(state_dim, paths);
  if (record)
    out.paths.assign(static_cast<std::size_t>(paths), Eigen::MatrixXd(state_dim, steps + 1));

  const double sqrt_dt = std::sqrt(dt);
  parallel_for_blocks(static_cast<std::size_t>(paths), threads,
                      [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(state_dim), pred(state_dim);
    std::vector<double> drift0(state_dim), drift1(state_dim), db(noise_dim);
    Eigen::VectorXd actl(policy ? policy->dim() : 0);
    for (std::size_t k = begin; k < end; ++k) {
      NormalStream rng(path_seed(seed, k));
      for (int i = 0; i < state_dim; ++i) y[i] = x0[i];
      if (record) out.paths[k].col(0) = x0;
      for (long n = 0; n < steps; ++n) {
        for (int j = 0; j < noise_dim; ++j) db[j] = rng() * sqrt_dt;
        if (policy) {
          const double s = t0 + n * dt;
          policy->direction(s, Eigen::Map<const Eigen::VectorXd>(y.data(), state_dim), actl);
          double ad = 0.0;
          for (int j = 0; j < noise_dim; ++j) ad += actl[j] * db[j];
          for (int j = 0; j < noise_dim; ++j) db[j] -= actl[j] * ad;
        }
        apply(y.data(), db.data(), drift0.data());
        for (int i = 0; i < state_dim; ++i) pred[i] = y[i] + factor * drift0[i];
        apply(pred.data(), db.data(), drift1.data());
        for (int i = 0; i < state_dim; ++i) y[i] += factor * 0.5 * (drift0[i] + drift1[i]);
        if (record)
          for (int i = 0; i < state_dim; ++i) out.paths[k](i, n + 1) = y[i];
      }
      for (int i = 0; i < state_dim; ++i) out.terminal(i, k) = y[i];
    }
  });
}

void dispatch(const EpsilonFrame& frame, bool completed, double factor, const Policy* policy,
              const Eigen::VectorXd& x0, double t0, double dt, long steps, long paths,
              std::uint64_t seed, int threads, bool record, PathEnsemble& out) {
  const int n = frame.ambient_dim();
  const int noise = completed ? n : frame.rank();
  const FrameKind kind = frame.base().kind();
  if (kind == FrameKind::heisenberg1) {
    run_ensemble(ApplyHeisenberg{frame.epsilon(), completed}, n, noise, factor, policy, x0, t0,
                 dt, steps, paths, seed, threads, record, out);
  } else if (kind == FrameKind::euclidean) {
    run_ensemble(ApplyEuclidean{n}, n, noise, factor, policy, x0, t0, dt, steps, paths, seed,
                 threads, record, out);
  } else if (completed) {
    run_ensemble(ApplyGenericEps{&frame}, n, noise, factor, policy, x0, t0, dt, steps, paths,
                 seed, threads, record, out);
  } else {
    run_ensemble(ApplyGenericBase{&frame.base()}, n, noise, factor, policy, x0, t0, dt, steps,
                 paths, seed, threads, record, out);
  }
}

}  // namespace

PathEnsemble simulate_horizontal(const Frame& frame, const Eigen::VectorXd& x0, double t0,
                                 double t1, double dt, long paths, std::uint64_t seed,
                                 const SdeOptions& opts) {
  if (x0.size() != frame.ambient_dim())
    throw dimension_error("start point dimension does not match the frame");
  if (paths < 1) throw config_error("ensemble needs at least one path");
  const long steps = resolve_steps(t0, t1, dt);

  PathEnsemble out;
  out.t0 = t0;
  out.t1 = t1;
  out.dt = dt;
  out.steps = steps;
  out.seed = seed;
  const int n = frame.ambient_dim();
  const int noise = frame.rank();
  if (frame.kind() == FrameKind::heisenberg1) {
    run_ensemble(ApplyHeisenberg{0.0, false}, n, noise, 1.0, nullptr, x0, t0, dt, steps, paths,
                 seed, opts.threads, opts.record_paths, out);
  } else if (frame.kind() == FrameKind::euclidean) {
    run_ensemble(ApplyEuclidean{n}, n, noise, 1.0, nullptr, x0, t0, dt, steps, paths, seed,
                 opts.threads, opts.record_paths, out);
  } else {
    run_ensemble(ApplyGenericBase{&frame}, n, noise, 1.0, nullptr, x0, t0, dt, steps, paths,
                 seed, opts.threads, opts.record_paths, out);
  }
  return out;
}

PathEnsemble simulate_controlled(const EpsilonFrame& frame, DynamicsMode mode,
                                 const Policy& policy, const Eigen::VectorXd& x0, double t0,
                                 double t1, double dt, long paths, std::uint64_t seed,
                                 const SdeOptions& opts) {
  if (mode == DynamicsMode::horizontal)
    throw config_error("uncontrolled dynamics go through simulate_horizontal");
  const bool completed = (mode == DynamicsMode::controlled_eps);
  if (x0.size() != frame.ambient_dim())
    throw dimension_error("start point dimension does not match the frame");
  if (paths < 1) throw config_error("ensemble needs at least one path");
  const int noise = completed ? frame.ambient_dim() : frame.rank();
  if (policy.dim() != noise)
    throw dimension_error("policy direction dimension does not match the noise dimension");
  const long steps = resolve_steps(t0, t1, dt);

  PathEnsemble out;
  out.t0 = t0;
  out.t1 = t1;
  out.dt = dt;
  out.steps = steps;
  out.seed = seed;
  dispatch(frame, completed, kSqrt2, &policy, x0, t0, dt, steps, paths, seed, opts.threads,
           opts.record_paths, out);
  return out;
}

GeneratorOrderResult generator_weak_order(const EpsilonFrame& frame, bool completed,
                                          const Polynomial& phi, const Eigen::VectorXd& x0,
                                          const Eigen::VectorXd& control,
                                          const std::vector<double>& dts, long pairs,
                                          std::uint64_t seed, int threads) {
  const int n = frame.ambient_dim();
  const int m = frame.rank();
  const int noise = completed ? n : m;
  if (phi.nvars() != n) throw dimension_error("test function dimension does not match the frame");
  if (x0.size() != n) throw dimension_error("point dimension does not match the frame");
  if (control.size() != noise)
    throw dimension_error("control dimension does not match the noise dimension");
  if (std::abs(control.norm() - 1.0) > 1e-8)
    throw config_error("control direction must be a unit vector");
  if (dts.empty() || pairs < 2) throw config_error("need step sizes and at least two pairs");
  for (double dt : dts)
    if (!(dt > 0.0)) throw config_error("time step must be positive");

  // Completed field family as polynomial fields (the tail rows are constant).
  std::vector<PolyVectorField> fields;
  fields.reserve(static_cast<std::size_t>(noise));
  for (int r = 0; r < m; ++r) fields.push_back(frame.base().field(r));
  if (completed) {
    for (int r = m; r < n; ++r) {
      std::vector<Polynomial> comps(static_cast<std::size_t>(n), Polynomial(n));
      comps[static_cast<std::size_t>(r)] = Polynomial::constant(n, frame.epsilon());
      fields.push_back(PolyVectorField(std::move(comps)));
    }
  }

  const Eigen::MatrixXd nu =
      Eigen::MatrixXd::Identity(noise, noise) - control * control.transpose();

  // Symbolic generator value: sum_rs nu_rs X_s(X_r phi) at x0.
  double reference = 0.0;
  for (int r = 0; r < noise; ++r) {
    const Polynomial xr_phi = apply_field(fields[static_cast<std::size_t>(r)], phi);
    for (int s = 0; s < noise; ++s) {
      if (nu(s, r) == 0.0) continue;
      reference += nu(s, r) * apply_field(fields[static_cast<std::size_t>(s)], xr_phi).eval(x0);
    }
  }

  // Exact point data for the control variate.
  const double phi0 = phi.eval(x0);
  Eigen::VectorXd grad_phi(n);
  Eigen::MatrixXd hess_phi(n, n);
  for (int i = 0; i < n; ++i) {
    const Polynomial di = phi.derivative(i);
    grad_phi[i] = di.eval(x0);
    for (int j = 0; j < n; ++j) hess_phi(i, j) = di.derivative(j).eval(x0);
  }
  Eigen::MatrixXd cols(n, noise);  // X_r(x0)
  std::vector<Eigen::MatrixXd> jacs(static_cast<std::size_t>(noise));
  for (int r = 0; r < noise; ++r) {
    cols.col(r) = fields[static_cast<std::size_t>(r)].eval(x0);
    jacs[static_cast<std::size_t>(r)] = fields[static_cast<std::size_t>(r)].jacobian(x0);
  }

  const std::size_t ndt = dts.size();
  std::vector<std::vector<double>> plain(ndt, std::vector<double>(static_cast<std::size_t>(pairs)));
  std::vector<std::vector<double>> cv(ndt, std::vector<double>(static_cast<std::size_t>(pairs)));

  parallel_for_blocks(static_cast<std::size_t>(pairs), threads,
                      [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd z(noise), w(noise), yvec(n), jyv(n), u(n);
    Eigen::MatrixXd jy(n, n);
    Eigen::VectorXd dbv(noise), pred(n), y1(n), s0(n), s1(n);
    for (std::size_t k = begin; k < end; ++k) {
      NormalStream rng(path_seed(seed, k));
      for (int j = 0; j < noise; ++j) z[j] = rng();
      w.noalias() = nu * z;
      yvec.noalias() = kSqrt2 * (cols * w);
      jy.setZero();
      for (int r = 0; r < noise; ++r) jy += w[r] * jacs[static_cast<std::size_t>(r)];
      jy *= kSqrt2;
      u.noalias() = jy * yvec;
      const double a_k = 0.5 * grad_phi.dot(u) + 0.5 * yvec.dot(hess_phi * yvec);

      for (std::size_t idt = 0; idt < ndt; ++idt) {
        const double dt = dts[idt];
        const double sdt = std::sqrt(dt);
        double est_sum = 0.0;
        for (int sign = 0; sign < 2; ++sign) {
          const double sgn = sign == 0 ? 1.0 : -1.0;
          dbv = (sgn * sdt) * w;
          s0.noalias() = cols * dbv;  // sigma^T(x0) dbv
          pred = x0 + kSqrt2 * s0;
          s1.setZero();
          for (int r = 0; r < noise; ++r)
            s1 += dbv[r] * fields[static_cast<std::size_t>(r)].eval(pred);
          y1 = x0 + (kSqrt2 * 0.5) * (s0 + s1);
          est_sum += (phi.eval(y1) - phi0) / dt;
        }
        const double est_pair = 0.5 * est_sum;
        plain[idt][k] = est_pair;
        cv[idt][k] = est_pair - a_k;
      }
    }
  });

  GeneratorOrderResult res;
  res.reference = reference;
  res.rows.resize(ndt);
  for (std::size_t idt = 0; idt < ndt; ++idt) {
    GeneratorOrderRow& row = res.rows[idt];
    row.dt = dts[idt];
    double mp = 0.0, mc = 0.0;
    for (long k = 0; k < pairs; ++k) {
      mp += plain[idt][static_cast<std::size_t>(k)];
      mc += cv[idt][static_cast<std::size_t>(k)];
    }
    mp /= pairs;
    mc /= pairs;
    double vp = 0.0, vc = 0.0;
    for (long k = 0; k < pairs; ++k) {
      const double dp = plain[idt][static_cast<std::size_t>(k)] - mp;
      const double dc = cv[idt][static_cast<std::size_t>(k)] - mc;
      vp += dp * dp;
      vc += dc * dc;
    }
    vp /= (pairs - 1);
    vc /= (pairs - 1);
    row.estimate_plain = mp;
    row.stderr_plain = std::sqrt(vp / pairs);
    row.error_plain = std::abs(mp - reference);
    row.estimate_cv = reference + mc;
    row.stderr_cv = std::sqrt(vc / pairs);
    row.error_cv = std::abs(mc);
  }

  double order = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i + 1 < ndt; ++i) {
    if (std::abs(res.rows[i].dt / res.rows[i + 1].dt - 2.0) > 1e-9) continue;
    double r;
    if (res.rows[i + 1].error_cv == 0.0) r = 99.0;
    else r = std::log2(res.rows[i].error_cv / res.rows[i + 1].error_cv);
    if (std::isnan(order)) order = r;
    else order = std::min(order, r);
  }
  res.observed_order = std::isnan(order) ? 0.0 : order;
  return res;
}

}  // namespace hmcf
