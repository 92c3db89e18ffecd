#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "hmcf/frame.hpp"
#include "hmcf/grid.hpp"
#include "hmcf/harness/config.hpp"
#include "hmcf/policy.hpp"
#include "hmcf/scalar_field.hpp"
#include "hmcf/sde.hpp"

namespace hmcf::harness {

struct StageContext {
  std::string out_dir;
  int threads = 1;
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
};

// Each stage validates its configuration sections strictly (unknown keys and
// sections are errors), takes an exclusive lock on the output directory,
// writes its CSV tables, and finishes with a manifest covering every emitted
// file. The return value is the stage's own verdict: only `compare` can
// return false (tolerance exceeded); the others either succeed or throw.
bool run_pde(const Config& config, const StageContext& ctx);
bool run_simulate(const Config& config, const StageContext& ctx);
bool run_value(const Config& config, const StageContext& ctx);
bool run_compare(const Config& config, const StageContext& ctx);
bool run_sweep(const Config& config, const StageContext& ctx);

// Shared configuration builders (also used by tests).
Frame parse_frame(const Config& config);
EpsilonFrame parse_epsilon_frame(const Config& config);
GridSpec parse_grid(const Config& config, int dim);
TerminalCost parse_cost(const Config& config, const std::string& section, int dim);
DynamicsMode parse_mode(const std::string& name);
// Builds the policy described by [policy]; `cost` supplies the scalar field
// for the feedback kind and may be null when that kind is not used.
std::shared_ptr<Policy> parse_policy(const Config& config, const EpsilonFrame& frame,
                                     DynamicsMode mode, const TerminalCost* cost);

// Wraps a terminal cost as a time-independent scalar field (zero Hessian;
// the costs are piecewise quadratic and the Hessian is never consumed by
// the policies that use this view).
ScalarField cost_scalar_field(const TerminalCost& g);

}  // namespace hmcf::harness
