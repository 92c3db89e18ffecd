#include "hmcf/harness/zeroset.hpp"

#include <cmath>
#include <limits>

#include "hmcf/errors.hpp"
#include "hmcf/policy.hpp"

namespace hmcf::harness {

std::vector<Eigen::VectorXd> zero_crossings(const LevelSetField& field) {
  const GridSpec& grid = field.grid;
  const int dim = grid.dim();
  const double* u = field.values.data();
  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  const std::size_t total = grid.total();
  for (std::size_t flat = 0; flat < total; ++flat) {
    double u0 = u[flat];
    Eigen::VectorXd x0 = grid.point(idx);
    if (u0 == 0.0) out.push_back(x0);
    for (int a = 0; a < dim; ++a) {
      if (idx[static_cast<std::size_t>(a)] + 1 >= grid.nodes[static_cast<std::size_t>(a)])
        continue;
      double u1 = u[flat + grid.stride(a)];
      // Strict sign change; exact zeros are reported at their own node.
      if ((u0 < 0.0 && u1 > 0.0) || (u0 > 0.0 && u1 < 0.0)) {
        double t = u0 / (u0 - u1);
        Eigen::VectorXd x = x0;
        x[a] += t * grid.spacing(a);
        out.push_back(std::move(x));
      }
    }
    // Advance the multi-index (last axis fastest, matching flatten()).
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < grid.nodes[static_cast<std::size_t>(a)]) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
  return out;
}

namespace {

// Largest step t >= 0 with center + t*dir still inside the grid box.
double exit_parameter(const GridSpec& grid, const Eigen::VectorXd& center,
                      const Eigen::VectorXd& dir) {
  double tmax = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid.dim(); ++a) {
    double d = dir[a];
    if (d > 1e-300)
      tmax = std::min(tmax, (grid.hi[a] - center[a]) / d);
    else if (d < -1e-300)
      tmax = std::min(tmax, (grid.lo[a] - center[a]) / d);
  }
  return tmax;
}

}  // namespace

RadialProfile radial_profile(const LevelSetField& field, const Eigen::VectorXd& center,
                             int rays) {
  const GridSpec& grid = field.grid;
  const int dim = grid.dim();
  if (center.size() != dim)
    throw dimension_error("radial profile center has wrong dimension");
  if (!grid.contains(center))
    throw config_error("radial profile center lies outside the grid");
  if (rays < 1) throw config_error("radial profile needs at least one ray");

  double hmin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim; ++a) hmin = std::min(hmin, grid.spacing(a));
  const double march = 0.5 * hmin;

  if (dim < 2) throw config_error("radial profiles need at least two dimensions");
  // Angular rays in the x1-x2 plane: the symmetry plane of the radial
  // built-ins, so cylinders report their horizontal radius.
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(rays));
  for (const Eigen::VectorXd& planar : direction_grid(2, rays)) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    d.head(2) = planar;
    dirs.push_back(std::move(d));
  }
  RadialProfile profile;
  profile.rays_total = rays;
  double sum = 0.0;
  for (int r = 0; r < rays; ++r) {
    const Eigen::VectorXd& dir = dirs[static_cast<std::size_t>(r)];
    const double tmax = exit_parameter(grid, center, dir);
    double t0 = 0.0;
    double f0 = interpolate(field, center);
    bool bracketed = false;
    double t1 = 0.0;
    const long nsteps = static_cast<long>(std::ceil(tmax / march));
    for (long k = 1; k <= nsteps; ++k) {
      double tc = std::min(static_cast<double>(k) * march, tmax);
      double fc = interpolate(field, center + tc * dir);
      if ((f0 <= 0.0 && fc > 0.0) || (f0 >= 0.0 && fc < 0.0)) {
        t1 = tc;
        bracketed = true;
        break;
      }
      t0 = tc;
      f0 = fc;
    }
    if (!bracketed) continue;
    for (int it = 0; it < 60 && t1 - t0 > 1e-14 * (1.0 + t1); ++it) {
      double tm = 0.5 * (t0 + t1);
      double fm = interpolate(field, center + tm * dir);
      if ((f0 <= 0.0 && fm > 0.0) || (f0 >= 0.0 && fm < 0.0)) {
        t1 = tm;
      } else {
        t0 = tm;
        f0 = fm;
      }
    }
    double tc = 0.5 * (t0 + t1);
    ++profile.rays_hit;
    sum += tc;
    profile.hits.push_back(center + tc * dir);
  }
  profile.radius = profile.rays_hit > 0
                       ? sum / profile.rays_hit
                       : std::numeric_limits<double>::quiet_NaN();
  return profile;
}

}  // namespace hmcf::harness
