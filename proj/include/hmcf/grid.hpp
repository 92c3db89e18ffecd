#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <vector>

#include "hmcf/scalar_field.hpp"

namespace hmcf {

// Uniform tensor grid. Flattening is row-major with the last axis fastest,
// and every axis needs at least three nodes so central stencils fit.
struct GridSpec {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<int> nodes;

  int dim() const { return static_cast<int>(nodes.size()); }
  double spacing(int axis) const { return (hi[axis] - lo[axis]) / (nodes[axis] - 1); }
  std::size_t total() const;
  std::ptrdiff_t stride(int axis) const;

  std::size_t flatten(const std::vector<int>& idx) const;
  void unflatten(std::size_t flat, std::vector<int>& idx) const;
  Eigen::VectorXd point(const std::vector<int>& idx) const;
  bool contains(const Eigen::VectorXd& x) const;

  void validate() const;  // throws config_error on malformed specs
};

// Scalar samples on a grid at a fixed time.
struct LevelSetField {
  GridSpec grid;
  Eigen::VectorXd values;
  double time = 0.0;

  static LevelSetField sample(const GridSpec& grid,
                              const std::function<double(const Eigen::VectorXd&)>& g,
                              int threads = 1);
};

// Gradient and Hessian at a node from second-order central differences.
// Boundary nodes reuse the edge value as a ghost (constant extrapolation),
// which turns the stencil one-sided there. This is the single definition
// of grid differentiation; the time stepper calls the same code.
void node_jet(const GridSpec& grid, const double* values, const std::vector<int>& idx,
              Eigen::VectorXd& p, Eigen::MatrixXd& s);

// Same arithmetic with compile-time dimension for the hot loop.
template <int D>
inline void node_jet_fixed(const double* u, std::size_t flat, const int* idx, const int* n,
                           const std::ptrdiff_t* stride, const double* inv2h,
                           const double* invh2, const double* inv4hh, double* p, double* s) {
  const double u0 = u[flat];
  std::ptrdiff_t dplus[D];
  std::ptrdiff_t dminus[D];
  for (int a = 0; a < D; ++a) {
    dplus[a] = (idx[a] + 1 < n[a]) ? stride[a] : 0;
    dminus[a] = (idx[a] > 0) ? -stride[a] : 0;
    const double up = u[flat + dplus[a]];
    const double um = u[flat + dminus[a]];
    p[a] = (up - um) * inv2h[a];
    s[a * D + a] = (up - 2.0 * u0 + um) * invh2[a];
  }
  for (int a = 0; a < D; ++a) {
    for (int b = a + 1; b < D; ++b) {
      const double upp = u[flat + dplus[a] + dplus[b]];
      const double upm = u[flat + dplus[a] + dminus[b]];
      const double ump = u[flat + dminus[a] + dplus[b]];
      const double umm = u[flat + dminus[a] + dminus[b]];
      const double v = (upp - upm - ump + umm) * inv4hh[a * D + b];
      s[a * D + b] = v;
      s[b * D + a] = v;
    }
  }
}

// Multilinear interpolation; points outside the box are clamped onto it.
double interpolate(const LevelSetField& field, const Eigen::VectorXd& x);

// View of the samples as a ScalarField: values by interpolation, derivatives
// from the stencil at the nearest node.
ScalarField grid_field(std::shared_ptr<const LevelSetField> field);

}  // namespace hmcf
