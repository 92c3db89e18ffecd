#pragma once

#include <stdexcept>
#include <string>

namespace hmcf {

// Contract violations detected at runtime. Each failure mode gets its own
// type so callers (and tests) can distinguish a degenerate input from a
// misconfigured run.

struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct dimension_error : std::invalid_argument {
  explicit dimension_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Horizontal gradient vanished where a horizontal normal was requested.
struct characteristic_point_error : std::domain_error {
  explicit characteristic_point_error(const std::string& msg) : std::domain_error(msg) {}
};

// Euclidean gradient vanished where a full normal was requested.
struct zero_gradient_error : std::domain_error {
  explicit zero_gradient_error(const std::string& msg) : std::domain_error(msg) {}
};

struct cfl_violation_error : std::runtime_error {
  explicit cfl_violation_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct nan_detected_error : std::runtime_error {
  explicit nan_detected_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Top eigenvalue too close to the second one for a stable derivative.
struct eigen_gap_error : std::domain_error {
  explicit eigen_gap_error(const std::string& msg) : std::domain_error(msg) {}
};

}  // namespace hmcf
