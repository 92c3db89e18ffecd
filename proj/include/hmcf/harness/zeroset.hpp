#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hmcf/grid.hpp"

namespace hmcf::harness {

// Zero-level-set extraction from grid samples. Two complementary views:
// a point cloud of sign-change crossings along grid axes, and a radial
// profile for star-shaped fronts (mean first-crossing distance over a fan
// of rays from a center point). Both are deterministic and serial.

// Linear interpolation along every grid edge whose endpoint values change
// sign (or touch zero exactly, counted at the node once).
std::vector<Eigen::VectorXd> zero_crossings(const LevelSetField& field);

struct RadialProfile {
  double radius = 0.0;   // mean first-crossing distance; NaN when no ray hits
  int rays_hit = 0;      // rays with a bracketed sign change
  int rays_total = 0;
  std::vector<Eigen::VectorXd> hits;  // one crossing point per successful ray
};

// Marches each ray from the center in steps of half the smallest grid
// spacing until the multilinear interpolant changes sign, then bisects the
// bracket. Rays leaving the grid without a sign change are skipped; an
// empty zero set yields radius = NaN and rays_hit = 0. Directions come
// from the same deterministic generators as the policy search (uniform
// circle in 2d, Fibonacci sphere in 3d).
RadialProfile radial_profile(const LevelSetField& field, const Eigen::VectorXd& center,
                             int rays);

}  // namespace hmcf::harness
