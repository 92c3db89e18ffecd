#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hmcf/errors.hpp"
#include "hmcf/frame.hpp"
#include "hmcf/grid.hpp"
#include "hmcf/harness/zeroset.hpp"
#include "hmcf/pde.hpp"
#include "hmcf/scalar_field.hpp"

using namespace hmcf;
using harness::radial_profile;
using harness::zero_crossings;

namespace {

GridSpec box(int dim, double lo, double hi, int nodes) {
  GridSpec g;
  g.lo = Eigen::VectorXd::Constant(dim, lo);
  g.hi = Eigen::VectorXd::Constant(dim, hi);
  g.nodes.assign(static_cast<std::size_t>(dim), nodes);
  return g;
}

double ring(const Eigen::VectorXd& x) { return x[0] * x[0] + x[1] * x[1] - 1.0; }

}  // namespace

TEST_CASE("grid flatten/unflatten round trip and point lookup") {
  GridSpec g = box(3, -1.0, 2.0, 4);
  CHECK(g.total() == 64);
  CHECK(g.spacing(0) == doctest::Approx(1.0));
  std::vector<int> idx = {1, 2, 3};
  const std::size_t flat = g.flatten(idx);
  std::vector<int> back(3, -1);
  g.unflatten(flat, back);
  CHECK(back == idx);
  Eigen::VectorXd p = g.point(idx);
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(2.0));
  CHECK(g.contains(p));
  Eigen::VectorXd outside(3);
  outside << 0.0, 0.0, 2.5;
  CHECK_FALSE(g.contains(outside));
}

TEST_CASE("multilinear interpolation reproduces affine functions exactly") {
  GridSpec g = box(2, -1.0, 1.0, 11);
  LevelSetField f = LevelSetField::sample(
      g, [](const Eigen::VectorXd& x) { return 2.0 * x[0] - 3.0 * x[1] + 0.5; }, 1);
  Eigen::VectorXd x(2);
  x << 0.137, -0.612;
  CHECK(interpolate(f, x) == doctest::Approx(2.0 * x[0] - 3.0 * x[1] + 0.5).epsilon(1e-13));
}

TEST_CASE("cfl limit on the euclidean frame follows the explicit formula") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, 0.0, 1.0, 11);  // h = 0.1
  // identity frame matrix: lambda_max = 1; dt = safety h^2 / N
  CHECK(cfl_dt_limit(ef, g, 0.2) == doctest::Approx(0.2 * 0.01 / 2.0).epsilon(1e-12));
}

TEST_CASE("stepper rejects a step beyond the stability limit") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, -1.0, 1.0, 21);
  PdeOptions opts;
  ExplicitStepper stepper(ef, g, opts);
  LevelSetField u0 = LevelSetField::sample(g, ring, 1);
  Eigen::VectorXd u = u0.values;
  CHECK_THROWS_AS(stepper.step(u, 1, 2.0 * stepper.dt_limit(), 2.0 * stepper.dt_limit()),
                  cfl_violation_error);
}

TEST_CASE("zero final time returns the initial field only") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, -1.5, 1.5, 21);
  LevelSetField u0 = LevelSetField::sample(g, ring, 1);
  PdeOptions opts;
  EvolveResult res = evolve(ef, u0, 0.0, opts);
  REQUIRE(res.snapshots.size() == 1);
  CHECK(res.snapshots[0].time == 0.0);
  CHECK((res.snapshots[0].values - u0.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("negative final time is rejected") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, -1.0, 1.0, 11);
  LevelSetField u0 = LevelSetField::sample(g, ring, 1);
  PdeOptions opts;
  CHECK_THROWS_AS(evolve(ef, u0, -0.1, opts), config_error);
}

TEST_CASE("snapshot times land exactly on the requested cadence") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, -1.5, 1.5, 41);
  LevelSetField u0 = LevelSetField::sample(g, ring, 1);
  PdeOptions opts;
  opts.snapshot_every = 0.02;
  EvolveResult res = evolve(ef, u0, 0.1, opts);
  REQUIRE(res.snapshots.size() == 6);
  for (std::size_t i = 0; i < res.snapshots.size(); ++i)
    CHECK(res.snapshots[i].time ==
          doctest::Approx(0.02 * static_cast<double>(i)).epsilon(1e-12));
  // a final time off the cadence is rejected
  opts.snapshot_every = 0.03;
  CHECK_THROWS_AS(evolve(ef, u0, 0.1, opts), config_error);
}

TEST_CASE("euclidean circle shrinks at the mean-curvature rate") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, -1.5, 1.5, 81);
  LevelSetField u0 = LevelSetField::sample(g, ring, 1);
  PdeOptions opts;
  opts.snapshot_every = 0.05;
  EvolveResult res = evolve(ef, u0, 0.1, opts);
  REQUIRE(res.snapshots.size() == 3);
  for (std::size_t i = 1; i < res.snapshots.size(); ++i) {
    const double t = res.snapshots[i].time;
    harness::RadialProfile prof =
        radial_profile(res.snapshots[i], Eigen::VectorXd::Zero(2), 128);
    CHECK(prof.rays_hit > 100);
    CHECK(prof.radius == doctest::Approx(std::sqrt(1.0 - 2.0 * t)).epsilon(0.02));
  }
}

TEST_CASE("heisenberg cylinder shrinks like the euclidean circle") {
  EpsilonFrame ef(Frame::heisenberg1(), 0.5);
  GridSpec g = box(3, -1.5, 1.5, 41);
  LevelSetField u0 = LevelSetField::sample(
      g, [](const Eigen::VectorXd& x) { return x[0] * x[0] + x[1] * x[1] - 1.0; }, 1);
  PdeOptions opts;
  EvolveResult res = evolve(ef, u0, 0.1, opts);
  const LevelSetField& fin = res.snapshots.back();
  harness::RadialProfile prof = radial_profile(fin, Eigen::VectorXd::Zero(3), 64);
  CHECK(prof.rays_hit > 0);
  CHECK(prof.radius == doctest::Approx(std::sqrt(0.8)).epsilon(0.05));
}

TEST_CASE("cylinder interior extinguishes after the critical time") {
  // radius-0.5 cylinder vanishes at t = r^2/2 = 0.125
  EpsilonFrame ef(Frame::heisenberg1(), 0.5);
  GridSpec g = box(3, -0.8, 0.8, 33);
  LevelSetField u0 = LevelSetField::sample(
      g, [](const Eigen::VectorXd& x) { return x[0] * x[0] + x[1] * x[1] - 0.25; }, 1);
  PdeOptions opts;
  EvolveResult res = evolve(ef, u0, 0.18, opts);
  std::vector<Eigen::VectorXd> crossings = zero_crossings(res.snapshots.back());
  CHECK(crossings.empty());
  CHECK(res.snapshots.back().values.minCoeff() > 0.0);
}

TEST_CASE("plane data with zero horizontal curvature stays fixed in the interior") {
  EpsilonFrame ef(Frame::heisenberg1(), 0.5);
  GridSpec g = box(3, -1.0, 1.0, 21);
  LevelSetField u0 = LevelSetField::sample(
      g, [](const Eigen::VectorXd& x) { return x[2]; }, 1);
  PdeOptions opts;
  ExplicitStepper stepper(ef, g, opts);
  Eigen::VectorXd u = u0.values;
  const double dt = stepper.dt_limit();
  for (long s = 1; s <= 25; ++s) stepper.step(u, s, static_cast<double>(s) * dt, dt);
  double worst = 0.0;
  std::vector<int> idx(3);
  for (idx[0] = 1; idx[0] < 20; ++idx[0])
    for (idx[1] = 1; idx[1] < 20; ++idx[1])
      for (idx[2] = 1; idx[2] < 20; ++idx[2]) {
        const auto flat = static_cast<Eigen::Index>(g.flatten(idx));
        worst = std::max(worst, std::abs(u[flat] - u0.values[flat]));
      }
  // rounding residue from the interpolated coefficients only, no real motion
  CHECK(worst <= 1e-12);
}

TEST_CASE("interior updates are identical across epsilon for vertical-invariant data") {
  // cylinder data has no x3 dependence, so every epsilon-scaled term carries
  // a vanishing second difference and the right-hand side agrees bitwise
  GridSpec g = box(3, -1.2, 1.2, 17);
  LevelSetField u0 = LevelSetField::sample(
      g, [](const Eigen::VectorXd& x) { return x[0] * x[0] + x[1] * x[1] - 0.7; }, 1);
  PdeOptions opts;
  EpsilonFrame e1(Frame::heisenberg1(), 1.0);
  EpsilonFrame e2(Frame::heisenberg1(), 0.25);
  ExplicitStepper s1(e1, g, opts);
  ExplicitStepper s2(e2, g, opts);
  const double dt = std::min(s1.dt_limit(), s2.dt_limit());
  Eigen::VectorXd ua = u0.values, ub = u0.values;
  for (long s = 1; s <= 10; ++s) {
    s1.step(ua, s, static_cast<double>(s) * dt, dt);
    s2.step(ub, s, static_cast<double>(s) * dt, dt);
  }
  std::vector<int> idx(3);
  for (idx[0] = 1; idx[0] < 16; ++idx[0])
    for (idx[1] = 1; idx[1] < 16; ++idx[1])
      for (idx[2] = 1; idx[2] < 16; ++idx[2]) {
        const auto flat = static_cast<Eigen::Index>(g.flatten(idx));
        CHECK(ua[flat] == ub[flat]);
      }
}

TEST_CASE("relabeling the initial data moves the front by less than one cell") {
  // the flow is geometric: u0 and 2 u0 share the same zero set evolution
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, -1.5, 1.5, 61);
  LevelSetField a = LevelSetField::sample(g, ring, 1);
  LevelSetField b = LevelSetField::sample(
      g, [](const Eigen::VectorXd& x) { return 2.0 * ring(x); }, 1);
  PdeOptions opts;
  const double T = 0.08;
  LevelSetField fa = evolve(ef, a, T, opts).snapshots.back();
  LevelSetField fb = evolve(ef, b, T, opts).snapshots.back();
  harness::RadialProfile pa = radial_profile(fa, Eigen::VectorXd::Zero(2), 64);
  harness::RadialProfile pb = radial_profile(fb, Eigen::VectorXd::Zero(2), 64);
  CHECK(std::abs(pa.radius - pb.radius) < g.spacing(0));
}

TEST_CASE("grid extrema are monotone for smooth euclidean data") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, -1.5, 1.5, 41);
  LevelSetField u0 = LevelSetField::sample(g, ring, 1);
  PdeOptions opts;
  EvolveResult res = evolve(ef, u0, 0.05, opts);
  double lo = u0.values.minCoeff(), hi = u0.values.maxCoeff();
  const double slack = 1e-12 * (hi - lo);
  for (const auto& d : res.diagnostics) {
    CHECK(d.umin >= lo - slack);
    CHECK(d.umax <= hi + slack);
    lo = std::max(lo, d.umin);  // min must keep rising, max keep falling
    hi = std::min(hi, d.umax);
  }
}

TEST_CASE("front-position error decays with at least first order under refinement") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  const double T = 0.1;
  const double exact = std::sqrt(1.0 - 2.0 * T);
  std::vector<double> errs;
  for (int nodes : {21, 41, 81}) {
    GridSpec g = box(2, -1.5, 1.5, nodes);
    LevelSetField u0 = LevelSetField::sample(g, ring, 1);
    PdeOptions opts;
    LevelSetField fin = evolve(ef, u0, T, opts).snapshots.back();
    harness::RadialProfile prof = radial_profile(fin, Eigen::VectorXd::Zero(2), 64);
    errs.push_back(std::abs(prof.radius - exact));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double order = std::log2(errs[i - 1] / errs[i]);
    CHECK(order >= 0.9);
  }
}

TEST_CASE("evolution diagnostics track steps and the chosen dt") {
  EpsilonFrame ef(Frame::euclidean(2), 1.0);
  GridSpec g = box(2, -1.0, 1.0, 21);
  LevelSetField u0 = LevelSetField::sample(g, ring, 1);
  PdeOptions opts;
  opts.snapshot_every = 0.01;
  EvolveResult res = evolve(ef, u0, 0.03, opts);
  CHECK(res.steps == static_cast<long>(res.diagnostics.size()));
  CHECK(res.dt * static_cast<double>(res.steps) == doctest::Approx(0.03).epsilon(1e-9));
  CHECK(res.dt <= cfl_dt_limit(ef, g, opts.cfl_safety) * (1.0 + 1e-12));
}
