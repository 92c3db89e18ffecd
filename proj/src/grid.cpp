#include "hmcf/grid.hpp"

#include <algorithm>
#include <cmath>

#include "hmcf/errors.hpp"
#include "hmcf/parallel.hpp"

namespace hmcf {

std::size_t GridSpec::total() const {
  std::size_t t = 1;
  for (int n : nodes) t *= static_cast<std::size_t>(n);
  return t;
}

std::ptrdiff_t GridSpec::stride(int axis) const {
  std::ptrdiff_t s = 1;
  for (int a = dim() - 1; a > axis; --a) s *= nodes[a];
  return s;
}

std::size_t GridSpec::flatten(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim(); ++a) flat = flat * nodes[a] + idx[a];
  return flat;
}

void GridSpec::unflatten(std::size_t flat, std::vector<int>& idx) const {
  idx.resize(nodes.size());
  for (int a = dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % nodes[a]);
    flat /= nodes[a];
  }
}

Eigen::VectorXd GridSpec::point(const std::vector<int>& idx) const {
  Eigen::VectorXd x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = lo[a] + idx[a] * spacing(a);
  return x;
}

bool GridSpec::contains(const Eigen::VectorXd& x) const {
  for (int a = 0; a < dim(); ++a)
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  return true;
}

void GridSpec::validate() const {
  if (nodes.empty() || lo.size() != dim() || hi.size() != dim())
    throw config_error("grid axes inconsistent: lo/hi/nodes sizes differ");
  for (int a = 0; a < dim(); ++a) {
    if (nodes[a] < 3) throw config_error("grid axis needs at least 3 nodes");
    if (!(hi[a] > lo[a])) throw config_error("grid axis upper bound must exceed lower bound");
  }
}

LevelSetField LevelSetField::sample(const GridSpec& grid,
                                    const std::function<double(const Eigen::VectorXd&)>& g,
                                    int threads) {
  grid.validate();
  LevelSetField f;
  f.grid = grid;
  f.values.resize(static_cast<Eigen::Index>(grid.total()));
  double* out = f.values.data();
  parallel_for_blocks(grid.total(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<int> idx(grid.nodes.size());
    Eigen::VectorXd x(grid.dim());
    for (std::size_t i = begin; i < end; ++i) {
      grid.unflatten(i, idx);
      for (int a = 0; a < grid.dim(); ++a) x[a] = grid.lo[a] + idx[a] * grid.spacing(a);
      out[i] = g(x);
    }
  });
  return f;
}

void node_jet(const GridSpec& grid, const double* values, const std::vector<int>& idx,
              Eigen::VectorXd& p, Eigen::MatrixXd& s) {
  const int d = grid.dim();
  p.resize(d);
  s.resize(d, d);
  const std::size_t flat = grid.flatten(idx);
  const double u0 = values[flat];
  std::vector<std::ptrdiff_t> dplus(d), dminus(d);
  for (int a = 0; a < d; ++a) {
    const std::ptrdiff_t str = grid.stride(a);
    dplus[a] = (idx[a] + 1 < grid.nodes[a]) ? str : 0;
    dminus[a] = (idx[a] > 0) ? -str : 0;
    const double h = grid.spacing(a);
    const double up = values[flat + dplus[a]];
    const double um = values[flat + dminus[a]];
    p[a] = (up - um) / (2.0 * h);
    s(a, a) = (up - 2.0 * u0 + um) / (h * h);
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      const double upp = values[flat + dplus[a] + dplus[b]];
      const double upm = values[flat + dplus[a] + dminus[b]];
      const double ump = values[flat + dminus[a] + dplus[b]];
      const double umm = values[flat + dminus[a] + dminus[b]];
      const double v = (upp - upm - ump + umm) / (4.0 * grid.spacing(a) * grid.spacing(b));
      s(a, b) = v;
      s(b, a) = v;
    }
  }
}

double interpolate(const LevelSetField& field, const Eigen::VectorXd& x) {
  const GridSpec& g = field.grid;
  const int d = g.dim();
  std::vector<int> cell(d);
  std::vector<double> w(d);
  for (int a = 0; a < d; ++a) {
    const double h = g.spacing(a);
    double r = (x[a] - g.lo[a]) / h;
    int c = static_cast<int>(std::floor(r));
    c = std::max(0, std::min(c, g.nodes[a] - 2));
    cell[a] = c;
    w[a] = std::max(0.0, std::min(1.0, r - c));
  }
  double acc = 0.0;
  std::vector<int> idx(d);
  const unsigned corners = 1u << d;
  for (unsigned mask = 0; mask < corners; ++mask) {
    double weight = 1.0;
    for (int a = 0; a < d; ++a) {
      const bool high = (mask >> a) & 1u;
      idx[a] = cell[a] + (high ? 1 : 0);
      weight *= high ? w[a] : (1.0 - w[a]);
    }
    if (weight != 0.0) acc += weight * field.values[static_cast<Eigen::Index>(g.flatten(idx))];
  }
  return acc;
}

ScalarField grid_field(std::shared_ptr<const LevelSetField> field) {
  field->grid.validate();
  const int d = field->grid.dim();
  auto nearest = [field](const Eigen::VectorXd& x, std::vector<int>& idx) {
    const GridSpec& g = field->grid;
    idx.resize(g.nodes.size());
    for (int a = 0; a < g.dim(); ++a) {
      const double r = (x[a] - g.lo[a]) / g.spacing(a);
      idx[a] = std::max(0, std::min(static_cast<int>(std::lround(r)), g.nodes[a] - 1));
    }
  };
  ScalarField::ValueFn value = [field](double, const Eigen::VectorXd& x) {
    return interpolate(*field, x);
  };
  ScalarField::GradFn grad = [field, nearest](double, const Eigen::VectorXd& x) {
    std::vector<int> idx;
    nearest(x, idx);
    Eigen::VectorXd p;
    Eigen::MatrixXd s;
    node_jet(field->grid, field->values.data(), idx, p, s);
    return p;
  };
  ScalarField::HessFn hess = [field, nearest](double, const Eigen::VectorXd& x) {
    std::vector<int> idx;
    nearest(x, idx);
    Eigen::VectorXd p;
    Eigen::MatrixXd s;
    node_jet(field->grid, field->values.data(), idx, p, s);
    return s;
  };
  return ScalarField(d, FieldSource::grid_sampled, std::move(value), std::move(grad),
                     std::move(hess));
}

}  // namespace hmcf
