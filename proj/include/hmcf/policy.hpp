#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "hmcf/frame.hpp"
#include "hmcf/scalar_field.hpp"

namespace hmcf {

// Deterministic direction sets used both as control candidates and as
// quadrature-free sweeps over the unit sphere. Dimension 2 is the uniform
// circle, dimension 3 the Fibonacci sphere.
std::vector<Eigen::VectorXd> direction_grid(int dim, int count);

// Projection onto the complement of a unit direction: I - a a^T. The control
// enters the dynamics only through this matrix. `a` must be unit to 1e-8.
Eigen::MatrixXd extremal_control(const Eigen::VectorXd& a);

// A control policy: a unit direction as a function of time and state.
// Implementations must be const-thread-safe; the simulator calls direction()
// concurrently from worker threads with preallocated output storage.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int dim() const = 0;  // dimension of the control direction
  virtual const std::string& id() const = 0;
  virtual void direction(double s, const Eigen::Ref<const Eigen::VectorXd>& y,
                         Eigen::Ref<Eigen::VectorXd> a) const = 0;
};

// Fixed direction, independent of time and state.
class ConstantPolicy : public Policy {
 public:
  ConstantPolicy(Eigen::VectorXd a, std::string id);
  int dim() const override { return static_cast<int>(a_.size()); }
  const std::string& id() const override { return id_; }
  const Eigen::VectorXd& value() const { return a_; }
  void direction(double, const Eigen::Ref<const Eigen::VectorXd>&,
                 Eigen::Ref<Eigen::VectorXd> a) const override {
    a = a_;
  }

 private:
  Eigen::VectorXd a_;
  std::string id_;
};

// Piecewise-constant direction on a product of time intervals and spatial
// cells; lookups clamp to the nearest cell. Entries are mutable so a search
// can improve them in place.
class GridTablePolicy : public Policy {
 public:
  GridTablePolicy(double t_lo, double t_hi, int t_cells, Eigen::VectorXd x_lo,
                  Eigen::VectorXd x_hi, std::vector<int> x_cells, Eigen::VectorXd initial,
                  std::string id);

  int dim() const override { return static_cast<int>(initial_dim_); }
  const std::string& id() const override { return id_; }
  void direction(double s, const Eigen::Ref<const Eigen::VectorXd>& y,
                 Eigen::Ref<Eigen::VectorXd> a) const override;

  std::size_t cell_count() const { return entries_.size(); }
  std::size_t cell_index(double s, const Eigen::Ref<const Eigen::VectorXd>& y) const;
  const Eigen::VectorXd& entry(std::size_t cell) const { return entries_[cell]; }
  void set_entry(std::size_t cell, const Eigen::VectorXd& a);

 private:
  double t_lo_, t_hi_;
  int t_cells_;
  Eigen::VectorXd x_lo_, x_hi_;
  std::vector<int> x_cells_;
  Eigen::Index initial_dim_;
  std::vector<Eigen::VectorXd> entries_;
  std::string id_;
};

// Feedback direction aligned with the frame image of a scalar field's
// gradient: a(s, y) = sigma_eps(y) Dphi(y) / |...| (or the base-frame image
// when `completed` is false). Falls back to the last coordinate direction
// where the image vanishes.
class GradientAlignedPolicy : public Policy {
 public:
  GradientAlignedPolicy(EpsilonFrame frame, ScalarField phi, bool completed, std::string id);

  int dim() const override { return completed_ ? frame_.ambient_dim() : frame_.rank(); }
  const std::string& id() const override { return id_; }
  void direction(double s, const Eigen::Ref<const Eigen::VectorXd>& y,
                 Eigen::Ref<Eigen::VectorXd> a) const override;

 private:
  EpsilonFrame frame_;
  ScalarField phi_;
  bool completed_;
  std::string id_;
};

}  // namespace hmcf
