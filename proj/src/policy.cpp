#include "hmcf/policy.hpp"

#include <algorithm>
#include <cmath>

#include "hmcf/errors.hpp"
#include "hmcf/levelset.hpp"

namespace hmcf {

std::vector<Eigen::VectorXd> direction_grid(int dim, int count) {
  if (count < 1) throw config_error("direction count must be positive");
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * M_PI * i / count;
      Eigen::VectorXd a(2);
      a << std::cos(th), std::sin(th);
      dirs.push_back(std::move(a));
    }
  } else if (dim == 3) {
    // Fibonacci sphere: z stratified, azimuth stepped by the golden angle.
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = golden * i;
      Eigen::VectorXd a(3);
      a << r * std::cos(th), r * std::sin(th), z;
      dirs.push_back(std::move(a));
    }
  } else {
    throw config_error("direction grids are implemented for dimensions 2 and 3");
  }
  return dirs;
}

Eigen::MatrixXd extremal_control(const Eigen::VectorXd& a) {
  if (std::abs(a.norm() - 1.0) > 1e-8)
    throw config_error("control direction must be a unit vector");
  const Eigen::Index d = a.size();
  return Eigen::MatrixXd::Identity(d, d) - a * a.transpose();
}

ConstantPolicy::ConstantPolicy(Eigen::VectorXd a, std::string id)
    : a_(std::move(a)), id_(std::move(id)) {
  if (std::abs(a_.norm() - 1.0) > 1e-8)
    throw config_error("control direction must be a unit vector");
}

GridTablePolicy::GridTablePolicy(double t_lo, double t_hi, int t_cells, Eigen::VectorXd x_lo,
                                 Eigen::VectorXd x_hi, std::vector<int> x_cells,
                                 Eigen::VectorXd initial, std::string id)
    : t_lo_(t_lo),
      t_hi_(t_hi),
      t_cells_(t_cells),
      x_lo_(std::move(x_lo)),
      x_hi_(std::move(x_hi)),
      x_cells_(std::move(x_cells)),
      initial_dim_(initial.size()),
      id_(std::move(id)) {
  if (!(t_hi_ > t_lo_) || t_cells_ < 1) throw config_error("policy table needs a time interval");
  if (x_lo_.size() != x_hi_.size() ||
      x_cells_.size() != static_cast<std::size_t>(x_lo_.size()))
    throw config_error("policy table spatial axes inconsistent");
  std::size_t cells = static_cast<std::size_t>(t_cells_);
  for (std::size_t a = 0; a < x_cells_.size(); ++a) {
    if (x_cells_[a] < 1 || !(x_hi_[static_cast<Eigen::Index>(a)] > x_lo_[static_cast<Eigen::Index>(a)]))
      throw config_error("policy table spatial axes inconsistent");
    cells *= static_cast<std::size_t>(x_cells_[a]);
  }
  if (std::abs(initial.norm() - 1.0) > 1e-8)
    throw config_error("control direction must be a unit vector");
  entries_.assign(cells, initial);
}

std::size_t GridTablePolicy::cell_index(double s,
                                        const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const double tw = (t_hi_ - t_lo_) / t_cells_;
  int tc = static_cast<int>(std::floor((s - t_lo_) / tw));
  tc = std::max(0, std::min(tc, t_cells_ - 1));
  std::size_t cell = static_cast<std::size_t>(tc);
  for (std::size_t a = 0; a < x_cells_.size(); ++a) {
    const Eigen::Index ai = static_cast<Eigen::Index>(a);
    const double w = (x_hi_[ai] - x_lo_[ai]) / x_cells_[a];
    int c = static_cast<int>(std::floor((y[ai] - x_lo_[ai]) / w));
    c = std::max(0, std::min(c, x_cells_[a] - 1));
    cell = cell * static_cast<std::size_t>(x_cells_[a]) + static_cast<std::size_t>(c);
  }
  return cell;
}

void GridTablePolicy::direction(double s, const Eigen::Ref<const Eigen::VectorXd>& y,
                                Eigen::Ref<Eigen::VectorXd> a) const {
  a = entries_[cell_index(s, y)];
}

void GridTablePolicy::set_entry(std::size_t cell, const Eigen::VectorXd& a) {
  if (std::abs(a.norm() - 1.0) > 1e-8)
    throw config_error("control direction must be a unit vector");
  entries_[cell] = a;
}

GradientAlignedPolicy::GradientAlignedPolicy(EpsilonFrame frame, ScalarField phi, bool completed,
                                             std::string id)
    : frame_(std::move(frame)), phi_(std::move(phi)), completed_(completed), id_(std::move(id)) {
  if (phi_.dim() != frame_.ambient_dim())
    throw dimension_error("feedback field dimension does not match the frame");
}

void GradientAlignedPolicy::direction(double s, const Eigen::Ref<const Eigen::VectorXd>& y,
                                      Eigen::Ref<Eigen::VectorXd> a) const {
  const Eigen::VectorXd yv = y;
  const Eigen::VectorXd du = phi_.gradient(s, yv);
  const Eigen::VectorXd q = completed_ ? frame_.apply_sigma_eps(yv, du)
                                       : frame_.base().apply_sigma(yv, du);
  const double qn = q.norm();
  if (qn < tol_char(du.norm())) {
    a.setZero();
    a[a.size() - 1] = 1.0;
    return;
  }
  a = q / qn;
}

}  // namespace hmcf
