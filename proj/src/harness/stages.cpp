#include "hmcf/harness/stages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

#include "hmcf/errors.hpp"
#include "hmcf/grid.hpp"
#include "hmcf/harness/csv.hpp"
#include "hmcf/harness/manifest.hpp"
#include "hmcf/harness/zeroset.hpp"
#include "hmcf/levelset.hpp"
#include "hmcf/pde.hpp"
#include "hmcf/value.hpp"
#include "hmcf/version.hpp"

namespace hmcf::harness {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488016887242097;

std::vector<std::string> coordinate_header(int dim, const std::vector<std::string>& prefix,
                                           const std::vector<std::string>& suffix) {
  std::vector<std::string> h = prefix;
  for (int i = 1; i <= dim; ++i) h.push_back("x" + std::to_string(i));
  for (const auto& s : suffix) h.push_back(s);
  return h;
}

std::uint64_t resolve_seed(const Config& cfg, const std::string& section,
                           const StageContext& ctx, std::string* source) {
  if (ctx.has_seed_override) {
    if (cfg.has_key(section, "seed")) cfg.get_integer(section, "seed");  // consume the key
    *source = "cli";
    return ctx.seed_override;
  }
  if (cfg.has_key(section, "seed")) {
    long long s = cfg.get_integer(section, "seed");
    if (s < 0) throw config_error("seed must be nonnegative");
    *source = "config";
    return static_cast<std::uint64_t>(s);
  }
  *source = "default";
  return 12345;
}

void stamp(RunManifest& man, const Config& cfg, const StageContext& ctx, const char* stage) {
  man.add("stage", stage);
  man.add("version", kVersion);
  man.add_integer("threads", ctx.threads);
  man.add_config_echo(cfg.lines());
}

void stamp_frame(RunManifest& man, const EpsilonFrame& ef) {
  const Frame& f = ef.base();
  const char* kind = f.kind() == FrameKind::heisenberg1  ? "heisenberg1"
                     : f.kind() == FrameKind::euclidean ? "euclidean"
                                                        : "custom";
  man.add("frame.kind", kind);
  man.add_integer("frame.ambient_dim", f.ambient_dim());
  man.add_integer("frame.rank", f.rank());
  man.add_number("frame.epsilon", ef.epsilon());
  const auto& warnings = f.warnings();
  for (std::size_t i = 0; i < warnings.size(); ++i)
    man.add("frame.warning." + std::to_string(i + 1), warnings[i]);
}

// Writes one grid snapshot as x1..xN,u in flat node order (last axis fastest).
std::string write_snapshot_csv(const std::string& out_dir, std::size_t index,
                               const LevelSetField& field) {
  char name[48];
  std::snprintf(name, sizeof(name), "snapshot_%03zu.csv", index);
  const GridSpec& grid = field.grid;
  const int dim = grid.dim();
  CsvWriter csv(out_dir + "/" + name, coordinate_header(dim, {}, {"u"}));
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  std::vector<std::string> cells(static_cast<std::size_t>(dim) + 1);
  const std::size_t total = grid.total();
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int a = 0; a < dim; ++a)
      cells[static_cast<std::size_t>(a)] =
          csv_number(grid.lo[a] + idx[static_cast<std::size_t>(a)] * grid.spacing(a));
    cells[static_cast<std::size_t>(dim)] = csv_number(field.values[static_cast<Eigen::Index>(flat)]);
    csv.row(cells);
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < grid.nodes[static_cast<std::size_t>(a)]) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
  csv.close();
  return name;
}

std::vector<std::string> point_cells(const Eigen::VectorXd& x) {
  std::vector<std::string> cells;
  cells.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) cells.push_back(csv_number(x[i]));
  return cells;
}

// Control dimension per dynamics mode.
int control_dim(const EpsilonFrame& ef, DynamicsMode mode) {
  return mode == DynamicsMode::controlled_eps ? ef.ambient_dim() : ef.rank();
}

struct SearchSpec {
  bool enabled = false;
  int directions = 0;
  long budget = 0;  // constant candidates considered; feedback extra
  bool include_feedback = false;
};

SearchSpec parse_search(const Config& cfg) {
  SearchSpec s;
  if (!cfg.has_section("search")) return s;
  s.enabled = true;
  s.directions = static_cast<int>(cfg.get_integer("search", "directions"));
  if (s.directions < 1) throw config_error("search needs at least one direction");
  s.budget = cfg.get_integer_or("search", "budget", s.directions);
  if (s.budget < 1 || s.budget > s.directions)
    throw config_error("search budget must lie in [1, directions]");
  s.include_feedback = cfg.get_bool_or("search", "include_feedback", false);
  return s;
}

struct BestValue {
  ValueEstimate estimate;
  std::string policy_id;
};

// Best estimate at one point: either the single configured policy or the
// minimum over the constant-direction family (plus the feedback policy when
// enabled), all under common random numbers.
BestValue value_at_point(const EpsilonFrame& ef, DynamicsMode mode, const Policy* single,
                         const SearchSpec& search, const TerminalCost& g,
                         const Eigen::VectorXd& x, double t, double horizon, double p, double dt,
                         long paths, std::uint64_t seed, int threads) {
  BestValue best;
  if (!search.enabled) {
    best.estimate = estimate_value(ef, mode, *single, g, x, t, horizon, p, dt, paths, seed,
                                   threads);
    best.policy_id = single->id();
    return best;
  }
  std::vector<Eigen::VectorXd> candidates = direction_grid(control_dim(ef, mode),
                                                           search.directions);
  std::vector<PolicyCandidateResult> entries =
      search_constant(ef, mode, candidates, g, x, t, horizon, p, dt, paths, seed, threads);
  std::size_t bi = best_index_over_prefix(entries, static_cast<std::size_t>(search.budget));
  best.estimate = estimate_value(ef, mode,
                                 ConstantPolicy(candidates[bi], entries[bi].policy_id), g, x, t,
                                 horizon, p, dt, paths, seed, threads);
  best.policy_id = entries[bi].policy_id;
  if (search.include_feedback) {
    GradientAlignedPolicy fb(ef, cost_scalar_field(g), mode == DynamicsMode::controlled_eps,
                             "feedback");
    ValueEstimate fe = estimate_value(ef, mode, fb, g, x, t, horizon, p, dt, paths, seed,
                                      threads);
    if (fe.value < best.estimate.value) {
      best.estimate = fe;
      best.policy_id = "feedback";
    }
  }
  return best;
}

void require_bounded_cost(const TerminalCost& g) {
  if (!(g.bound < 1e290))
    throw config_error(
        "the value stage needs a finite cap on the terminal cost (set cap in [cost])");
}

}  // namespace

Frame parse_frame(const Config& cfg) {
  std::string kind = cfg.get_string("frame", "kind");
  if (kind == "heisenberg1") return Frame::heisenberg1();
  if (kind == "euclidean") {
    int n = static_cast<int>(cfg.get_integer("frame", "dimension"));
    return Frame::euclidean(n);
  }
  if (kind != "custom")
    throw config_error("unknown frame kind '" + kind +
                       "' (expected heisenberg1, euclidean, or custom)");
  int n = static_cast<int>(cfg.get_integer("frame", "dimension"));
  int m = static_cast<int>(cfg.get_integer("frame", "rank"));
  if (n < 1 || m < 1 || m > n) throw config_error("custom frame needs 1 <= rank <= dimension");
  std::vector<std::vector<Polynomial>> comps(
      static_cast<std::size_t>(m),
      std::vector<Polynomial>(static_cast<std::size_t>(n), Polynomial(n)));
  auto rows = cfg.get_repeated_lists("frame", "monomial");
  if (rows.empty())
    throw config_error("custom frame needs monomial entries: [field, component, coeff, e1..eN]");
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != 3 + n)
      throw config_error("custom frame monomial rows need 3 + dimension entries");
    int fi = static_cast<int>(std::lround(row[0]));
    int ci = static_cast<int>(std::lround(row[1]));
    if (fi < 1 || fi > m || ci < 1 || ci > n)
      throw config_error("custom frame monomial indices out of range (1-based)");
    Monomial mono;
    mono.coeff = row[2];
    mono.exps.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      double e = row[static_cast<std::size_t>(3 + j)];
      int ei = static_cast<int>(std::lround(e));
      if (std::abs(e - ei) > 1e-12 || ei < 0)
        throw config_error("monomial exponents must be nonnegative integers");
      mono.exps[static_cast<std::size_t>(j)] = ei;
    }
    std::vector<Monomial> terms =
        comps[static_cast<std::size_t>(fi - 1)][static_cast<std::size_t>(ci - 1)].terms();
    terms.push_back(std::move(mono));
    comps[static_cast<std::size_t>(fi - 1)][static_cast<std::size_t>(ci - 1)] =
        Polynomial(n, std::move(terms));
  }
  std::vector<PolyVectorField> fields;
  fields.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) fields.emplace_back(comps[static_cast<std::size_t>(i)]);
  return Frame::custom(n, m, std::move(fields));
}

EpsilonFrame parse_epsilon_frame(const Config& cfg) {
  Frame base = parse_frame(cfg);
  double eps = cfg.get_number_or("frame", "epsilon", 1.0);
  return EpsilonFrame(std::move(base), eps);
}

GridSpec parse_grid(const Config& cfg, int dim) {
  auto broadcast = [&](std::vector<double> v, const char* what) {
    if (v.size() == 1) v.assign(static_cast<std::size_t>(dim), v[0]);
    if (static_cast<int>(v.size()) != dim)
      throw config_error(std::string("grid ") + what + " needs 1 or dimension entries");
    return v;
  };
  std::vector<double> lo = broadcast(cfg.get_list("grid", "lo"), "lo");
  std::vector<double> hi = broadcast(cfg.get_list("grid", "hi"), "hi");
  std::vector<double> nodes = broadcast(cfg.get_list("grid", "nodes"), "nodes");
  GridSpec grid;
  grid.lo.resize(dim);
  grid.hi.resize(dim);
  grid.nodes.resize(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    grid.lo[a] = lo[static_cast<std::size_t>(a)];
    grid.hi[a] = hi[static_cast<std::size_t>(a)];
    double n = nodes[static_cast<std::size_t>(a)];
    int ni = static_cast<int>(std::lround(n));
    if (std::abs(n - ni) > 1e-9) throw config_error("grid nodes must be integers");
    grid.nodes[static_cast<std::size_t>(a)] = ni;
  }
  grid.validate();
  return grid;
}

TerminalCost parse_cost(const Config& cfg, const std::string& section, int dim) {
  std::string kind = cfg.get_string(section, "kind");
  if (kind == "sphere")
    return cost_sphere(dim, cfg.get_number(section, "radius"),
                       cfg.get_number_or(section, "cap", 1e300));
  if (kind == "cylinder")
    return cost_cylinder(dim, cfg.get_number(section, "radius"),
                         cfg.get_number_or(section, "cap", 1e300));
  if (kind == "plane") return cost_plane(dim, cfg.get_number(section, "clamp"));
  if (kind == "distance")
    return cost_clamped_distance(dim, cfg.get_number(section, "radius"),
                                 cfg.get_number_or(section, "cap", 1e300));
  throw config_error("unknown cost kind '" + kind +
                     "' (expected sphere, cylinder, plane, or distance)");
}

DynamicsMode parse_mode(const std::string& name) {
  if (name == "horizontal") return DynamicsMode::horizontal;
  if (name == "controlled_sub") return DynamicsMode::controlled_sub;
  if (name == "controlled_eps") return DynamicsMode::controlled_eps;
  throw config_error("unknown dynamics mode '" + name +
                     "' (expected horizontal, controlled_sub, or controlled_eps)");
}

ScalarField cost_scalar_field(const TerminalCost& g) {
  int dim = g.dim;
  auto value = [g](double, const Eigen::VectorXd& x) { return g.value(x); };
  auto grad = [g](double, const Eigen::VectorXd& x) { return g.gradient(x); };
  auto hess = [dim](double, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(dim, dim).eval();
  };
  return ScalarField(dim, FieldSource::analytic, value, grad, hess);
}

std::shared_ptr<Policy> parse_policy(const Config& cfg, const EpsilonFrame& frame,
                                     DynamicsMode mode, const TerminalCost* cost) {
  if (mode == DynamicsMode::horizontal)
    throw config_error("horizontal dynamics take no policy");
  const int dim = control_dim(frame, mode);
  std::string kind = cfg.get_string("policy", "kind");
  if (kind == "constant") {
    Eigen::VectorXd a = cfg.get_vector("policy", "direction");
    if (a.size() != dim)
      throw config_error("policy direction dimension does not match the control dimension");
    double n = a.norm();
    if (!(n > 0.0)) throw config_error("policy direction must be nonzero");
    return std::make_shared<ConstantPolicy>(a / n, "constant");
  }
  if (kind == "feedback") {
    if (!cost)
      throw config_error("feedback policy needs a [cost] section for its scalar field");
    return std::make_shared<GradientAlignedPolicy>(
        frame, cost_scalar_field(*cost), mode == DynamicsMode::controlled_eps, "feedback");
  }
  if (kind == "table") {
    double t_lo = cfg.get_number("policy", "t_lo");
    double t_hi = cfg.get_number("policy", "t_hi");
    int t_cells = static_cast<int>(cfg.get_integer("policy", "t_cells"));
    Eigen::VectorXd x_lo = cfg.get_vector("policy", "x_lo");
    Eigen::VectorXd x_hi = cfg.get_vector("policy", "x_hi");
    std::vector<double> raw = cfg.get_list("policy", "x_cells");
    std::vector<int> x_cells;
    for (double v : raw) x_cells.push_back(static_cast<int>(std::lround(v)));
    Eigen::VectorXd a = cfg.get_vector("policy", "direction");
    if (a.size() != dim)
      throw config_error("policy direction dimension does not match the control dimension");
    double n = a.norm();
    if (!(n > 0.0)) throw config_error("policy direction must be nonzero");
    return std::make_shared<GridTablePolicy>(t_lo, t_hi, t_cells, std::move(x_lo),
                                             std::move(x_hi), std::move(x_cells), a / n,
                                             "table");
  }
  throw config_error("unknown policy kind '" + kind +
                     "' (expected constant, feedback, or table)");
}

bool run_pde(const Config& cfg, const StageContext& ctx) {
  OutputLock lock(ctx.out_dir);
  RunManifest man(ctx.out_dir);
  stamp(man, cfg, ctx, "pde");

  EpsilonFrame ef = parse_epsilon_frame(cfg);
  const int dim = ef.ambient_dim();
  GridSpec grid = parse_grid(cfg, dim);
  TerminalCost g = parse_cost(cfg, "initial", dim);
  const double t_final = cfg.get_number("pde", "final_time");
  PdeOptions opts;
  opts.snapshot_every = cfg.get_number_or("pde", "snapshot_every", 0.0);
  opts.cfl_safety = cfg.get_number_or("pde", "cfl_safety", 0.2);
  opts.threads = ctx.threads;
  const int rays = static_cast<int>(cfg.get_integer_or("pde", "rays", 256));
  Eigen::VectorXd center = cfg.get_vector_or("pde", "center", Eigen::VectorXd::Zero(dim));
  const bool write_snapshots = cfg.get_bool_or("pde", "write_snapshots", true);
  const bool write_cross = cfg.get_bool_or("pde", "write_crossings", true);
  const bool sample_geometry = cfg.get_bool_or("pde", "sample_geometry", false);
  cfg.ensure_all_consumed();

  stamp_frame(man, ef);
  for (int a = 0; a < dim; ++a) {
    man.add_number("grid.lo." + std::to_string(a + 1), grid.lo[a]);
    man.add_number("grid.hi." + std::to_string(a + 1), grid.hi[a]);
    man.add_integer("grid.nodes." + std::to_string(a + 1),
                    grid.nodes[static_cast<std::size_t>(a)]);
    man.add_number("grid.h." + std::to_string(a + 1), grid.spacing(a));
  }
  man.add("initial.kind", g.name);
  man.add_number("pde.final_time", t_final);
  man.add_number("pde.cfl_safety", opts.cfl_safety);
  man.add_number("derived.cfl_dt_limit", cfl_dt_limit(ef, grid, opts.cfl_safety));
  man.add_number("derived.tol_char_unit_gradient", tol_char(1.0));

  LevelSetField u0 = LevelSetField::sample(grid, g.value, ctx.threads);
  man.mark_timing("sample_initial");

  EvolveResult ev = evolve(ef, u0, t_final, opts);
  man.mark_timing("evolve");
  man.add_number("derived.dt", ev.dt);
  man.add_integer("derived.steps", ev.steps);
  std::size_t envelope_total = 0;
  for (const auto& d : ev.diagnostics) envelope_total += d.envelope_nodes;
  man.add_integer("derived.envelope_node_updates", static_cast<long long>(envelope_total));
  if (!ev.diagnostics.empty()) {
    man.add_number("diagnostics.final_umin", ev.diagnostics.back().umin);
    man.add_number("diagnostics.final_umax", ev.diagnostics.back().umax);
  }

  std::vector<std::string> files;
  if (write_snapshots) {
    for (std::size_t i = 0; i < ev.snapshots.size(); ++i)
      files.push_back(write_snapshot_csv(ctx.out_dir, i, ev.snapshots[i]));
  }

  {
    CsvWriter radius_csv(ctx.out_dir + "/radius.csv", {"t", "radius", "rays_hit"});
    for (const auto& snap : ev.snapshots) {
      RadialProfile prof = radial_profile(snap, center, rays);
      radius_csv.row({csv_number(snap.time), csv_number(prof.radius),
                      csv_integer(prof.rays_hit)});
    }
    radius_csv.close();
    files.push_back("radius.csv");
  }

  if (write_cross) {
    const LevelSetField& last = ev.snapshots.back();
    CsvWriter cross_csv(ctx.out_dir + "/crossings.csv", coordinate_header(dim, {}, {}));
    for (const Eigen::VectorXd& x : zero_crossings(last)) cross_csv.row(point_cells(x));
    cross_csv.close();
    files.push_back("crossings.csv");
  }

  if (sample_geometry) {
    const LevelSetField& last = ev.snapshots.back();
    auto shared = std::make_shared<LevelSetField>(last);
    ScalarField sf = grid_field(shared);
    RadialProfile prof = radial_profile(last, center, rays);
    CsvWriter geo(ctx.out_dir + "/geometry.csv",
                  coordinate_header(dim, {"t"}, {"quantity", "value"}));
    for (const Eigen::VectorXd& x : prof.hits) {
      std::vector<std::string> base = point_cells(x);
      base.insert(base.begin(), csv_number(last.time));
      try {
        Eigen::VectorXd n = approx_normal(ef, sf, last.time, x);
        for (Eigen::Index i = 0; i < n.size(); ++i) {
          std::vector<std::string> cells = base;
          cells.push_back("normal_" + std::to_string(i + 1));
          cells.push_back(csv_number(n[i]));
          geo.row(cells);
        }
        double kappa = approx_curvature(ef, sf, last.time, x);
        std::vector<std::string> cells = base;
        cells.push_back("curvature");
        cells.push_back(csv_number(kappa));
        geo.row(cells);
      } catch (const zero_gradient_error&) {
        // flat sample; no geometric quantities to report there
      }
    }
    geo.close();
    files.push_back("geometry.csv");
  }

  man.mark_timing("extract");
  for (const auto& f : files) man.add_file(f);
  man.write();
  return true;
}

bool run_simulate(const Config& cfg, const StageContext& ctx) {
  OutputLock lock(ctx.out_dir);
  RunManifest man(ctx.out_dir);
  stamp(man, cfg, ctx, "simulate");

  EpsilonFrame ef = parse_epsilon_frame(cfg);
  const int dim = ef.ambient_dim();
  DynamicsMode mode = parse_mode(cfg.get_string("simulate", "mode"));
  Eigen::VectorXd x0 = cfg.get_vector("simulate", "point");
  if (x0.size() != dim) throw config_error("simulate point has the wrong dimension");
  const double t0 = cfg.get_number_or("simulate", "t0", 0.0);
  const double t1 = cfg.get_number("simulate", "final_time");
  const double dt = cfg.get_number("simulate", "dt");
  const long paths = cfg.get_integer("simulate", "paths");
  std::string seed_source;
  const std::uint64_t seed = resolve_seed(cfg, "simulate", ctx, &seed_source);
  SdeOptions opts;
  opts.threads = ctx.threads;
  opts.record_paths = cfg.get_bool_or("simulate", "record_paths", false);

  PathEnsemble ens;
  if (mode == DynamicsMode::horizontal) {
    cfg.ensure_all_consumed();
    ens = simulate_horizontal(ef.base(), x0, t0, t1, dt, paths, seed, opts);
  } else {
    TerminalCost cost;
    bool has_cost = cfg.has_section("cost");
    if (has_cost) cost = parse_cost(cfg, "cost", dim);
    std::shared_ptr<Policy> policy = parse_policy(cfg, ef, mode, has_cost ? &cost : nullptr);
    cfg.ensure_all_consumed();
    ens = simulate_controlled(ef, mode, *policy, x0, t0, t1, dt, paths, seed, opts);
    man.add_number("derived.noise_factor", kSqrt2);
  }
  man.mark_timing("simulate");

  stamp_frame(man, ef);
  man.add("simulate.seed_source", seed_source);
  man.add_integer("simulate.seed", static_cast<long long>(seed));
  man.add_number("simulate.t0", ens.t0);
  man.add_number("simulate.final_time", ens.t1);
  man.add_number("simulate.dt", ens.dt);
  man.add_integer("simulate.steps", ens.steps);
  man.add_integer("simulate.paths", paths);

  const long K = static_cast<long>(ens.terminal.cols());
  for (int i = 0; i < dim; ++i) {
    double mean = 0.0;
    for (long k = 0; k < K; ++k) mean += ens.terminal(i, k);
    mean /= static_cast<double>(K);
    double var = 0.0;
    for (long k = 0; k < K; ++k) {
      double d = ens.terminal(i, k) - mean;
      var += d * d;
    }
    var /= static_cast<double>(std::max<long>(1, K - 1));
    man.add_number("terminal.mean." + std::to_string(i + 1), mean);
    man.add_number("terminal.var." + std::to_string(i + 1), var);
  }

  std::vector<std::string> files;
  {
    CsvWriter term(ctx.out_dir + "/terminal.csv", coordinate_header(dim, {"path"}, {}));
    for (long k = 0; k < K; ++k) {
      std::vector<std::string> cells = point_cells(ens.terminal.col(k));
      cells.insert(cells.begin(), csv_integer(k));
      term.row(cells);
    }
    term.close();
    files.push_back("terminal.csv");
  }
  if (opts.record_paths) {
    CsvWriter pcsv(ctx.out_dir + "/paths.csv", coordinate_header(dim, {"path", "step", "s"}, {}));
    for (std::size_t k = 0; k < ens.paths.size(); ++k) {
      const Eigen::MatrixXd& traj = ens.paths[k];
      for (Eigen::Index s = 0; s < traj.cols(); ++s) {
        std::vector<std::string> cells = point_cells(traj.col(s));
        cells.insert(cells.begin(),
                     csv_number(ens.t0 + static_cast<double>(s) * ens.dt));
        cells.insert(cells.begin(), csv_integer(static_cast<long long>(s)));
        cells.insert(cells.begin(), csv_integer(static_cast<long long>(k)));
        pcsv.row(cells);
      }
    }
    pcsv.close();
    files.push_back("paths.csv");
  }

  man.mark_timing("emit");
  for (const auto& f : files) man.add_file(f);
  man.write();
  return true;
}

bool run_value(const Config& cfg, const StageContext& ctx) {
  OutputLock lock(ctx.out_dir);
  RunManifest man(ctx.out_dir);
  stamp(man, cfg, ctx, "value");

  EpsilonFrame ef = parse_epsilon_frame(cfg);
  const int dim = ef.ambient_dim();
  TerminalCost g = parse_cost(cfg, "cost", dim);
  require_bounded_cost(g);
  DynamicsMode mode = parse_mode(cfg.get_string_or("value", "mode", "controlled_eps"));
  const double t = cfg.get_number_or("value", "t", 0.0);
  const double horizon = cfg.get_number("value", "final_time");
  const double dt = cfg.get_number("value", "dt");
  const long paths = cfg.get_integer("value", "paths");
  const double p = cfg.get_order("value", "p");
  std::string seed_source;
  const std::uint64_t seed = resolve_seed(cfg, "value", ctx, &seed_source);
  auto point_rows = cfg.get_repeated_lists("value", "point");
  if (point_rows.empty()) throw config_error("[value] needs at least one point");

  SearchSpec search = parse_search(cfg);
  std::shared_ptr<Policy> single;
  if (!search.enabled) single = parse_policy(cfg, ef, mode, &g);
  cfg.ensure_all_consumed();

  stamp_frame(man, ef);
  man.add("cost.kind", g.name);
  man.add_number("cost.bound", g.bound);
  man.add_number("value.t", t);
  man.add_number("value.final_time", horizon);
  man.add_number("value.dt", dt);
  man.add_integer("value.paths", paths);
  man.add_number("value.p", p);
  man.add("value.seed_source", seed_source);
  man.add_integer("value.seed", static_cast<long long>(seed));
  man.add_number("derived.noise_factor", kSqrt2);
  man.add_number("derived.shift", g.lower < 0.0 ? g.bound : 0.0);

  CsvWriter csv(ctx.out_dir + "/value.csv",
                coordinate_header(dim, {"t"},
                                  {"p", "estimate", "stderr", "policy_id", "K", "seed"}));
  for (std::size_t pi = 0; pi < point_rows.size(); ++pi) {
    if (static_cast<int>(point_rows[pi].size()) != dim)
      throw config_error("[value] point has the wrong dimension");
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = point_rows[pi][static_cast<std::size_t>(i)];
    BestValue best = value_at_point(ef, mode, single.get(), search, g, x, t, horizon, p, dt,
                                    paths, seed, ctx.threads);
    std::vector<std::string> cells = point_cells(x);
    cells.insert(cells.begin(), csv_number(t));
    cells.push_back(csv_number(p));
    cells.push_back(csv_number(best.estimate.value));
    cells.push_back(csv_number(best.estimate.std_error));
    cells.push_back(best.policy_id);
    cells.push_back(csv_integer(best.estimate.paths));
    cells.push_back(csv_integer(static_cast<long long>(seed)));
    csv.row(cells);
    man.add("value.best_policy." + std::to_string(pi + 1), best.policy_id);
  }
  csv.close();
  man.mark_timing("estimate");
  man.add_file("value.csv");
  man.write();
  return true;
}

bool run_compare(const Config& cfg, const StageContext& ctx) {
  OutputLock lock(ctx.out_dir);
  RunManifest man(ctx.out_dir);
  stamp(man, cfg, ctx, "compare");

  EpsilonFrame ef = parse_epsilon_frame(cfg);
  const int dim = ef.ambient_dim();
  GridSpec grid = parse_grid(cfg, dim);
  TerminalCost g = parse_cost(cfg, "cost", dim);
  require_bounded_cost(g);

  const double t_final = cfg.get_number("pde", "final_time");
  const double t = cfg.get_number_or("value", "t", 0.0);
  if (!(t >= 0.0) || !(t < t_final))
    throw config_error("comparison time must satisfy 0 <= t < final_time");
  const double target_time = t_final - t;
  PdeOptions pde_opts;
  pde_opts.cfl_safety = cfg.get_number_or("pde", "cfl_safety", 0.2);
  pde_opts.threads = ctx.threads;
  if (cfg.has_key("pde", "snapshot_every")) {
    pde_opts.snapshot_every = cfg.get_number("pde", "snapshot_every");
  } else if (t == 0.0) {
    pde_opts.snapshot_every = 0.0;  // initial and final snapshots suffice
  } else {
    throw config_error(
        "comparison at t > 0 needs an explicit snapshot_every dividing both the final time "
        "and final_time - t");
  }

  DynamicsMode mode = parse_mode(cfg.get_string_or("value", "mode", "controlled_eps"));
  const double dt = cfg.get_number("value", "dt");
  const long paths = cfg.get_integer("value", "paths");
  const double p = cfg.get_order("value", "p");
  if (!std::isfinite(p))
    throw config_error("[value] p must be finite here; the sup functional is always reported");
  std::string seed_source;
  const std::uint64_t seed = resolve_seed(cfg, "value", ctx, &seed_source);
  const double tolerance = cfg.get_number("compare", "tolerance");
  auto point_rows = cfg.get_repeated_lists("compare", "point");
  if (point_rows.empty()) throw config_error("[compare] needs at least one point");

  SearchSpec search = parse_search(cfg);
  std::shared_ptr<Policy> single;
  if (!search.enabled) single = parse_policy(cfg, ef, mode, &g);
  cfg.ensure_all_consumed();

  std::vector<Eigen::VectorXd> points;
  for (const auto& row : point_rows) {
    if (static_cast<int>(row.size()) != dim)
      throw config_error("[compare] point has the wrong dimension");
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = row[static_cast<std::size_t>(i)];
    if (!grid.contains(x))
      throw config_error("[compare] point lies outside the grid");
    points.push_back(std::move(x));
  }

  // PDE side first and alone: the deterministic column is fixed before any
  // stochastic machinery is even constructed.
  LevelSetField u0 = LevelSetField::sample(grid, g.value, ctx.threads);
  EvolveResult ev = evolve(ef, u0, t_final, pde_opts);
  man.mark_timing("pde");
  const LevelSetField* snap = nullptr;
  for (const auto& s : ev.snapshots)
    if (std::abs(s.time - target_time) <= 1e-9 * std::max(1.0, target_time)) snap = &s;
  if (!snap)
    throw config_error("no PDE snapshot lands on final_time - t; adjust snapshot_every");
  std::vector<double> pde_values;
  for (const auto& x : points) pde_values.push_back(interpolate(*snap, x));

  stamp_frame(man, ef);
  man.add("cost.kind", g.name);
  man.add_number("compare.tolerance", tolerance);
  man.add_number("compare.t", t);
  man.add_number("pde.final_time", t_final);
  man.add_number("derived.pde_dt", ev.dt);
  man.add_integer("derived.pde_steps", ev.steps);
  man.add_number("value.dt", dt);
  man.add_integer("value.paths", paths);
  man.add_number("value.p", p);
  man.add("value.seed_source", seed_source);
  man.add_integer("value.seed", static_cast<long long>(seed));
  man.add_number("derived.shift", g.lower < 0.0 ? g.bound : 0.0);

  const double inf = std::numeric_limits<double>::infinity();
  bool all_pass = true;
  double worst_gap = 0.0;
  CsvWriter csv(ctx.out_dir + "/compare.csv",
                coordinate_header(dim, {"t"},
                                  {"pde", "value_sup", "value_p", "gap_sup", "gap_p", "pass"}));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::VectorXd& x = points[i];
    BestValue vsup = value_at_point(ef, mode, single.get(), search, g, x, t, t_final, inf, dt,
                                    paths, seed, ctx.threads);
    BestValue vp = value_at_point(ef, mode, single.get(), search, g, x, t, t_final, p, dt,
                                  paths, seed, ctx.threads);
    const double gap_sup = std::abs(vsup.estimate.value - pde_values[i]);
    const double gap_p = std::abs(vp.estimate.value - pde_values[i]);
    const bool pass = gap_sup <= tolerance;
    all_pass = all_pass && pass;
    worst_gap = std::max(worst_gap, gap_sup);
    std::vector<std::string> cells = point_cells(x);
    cells.insert(cells.begin(), csv_number(t));
    cells.push_back(csv_number(pde_values[i]));
    cells.push_back(csv_number(vsup.estimate.value));
    cells.push_back(csv_number(vp.estimate.value));
    cells.push_back(csv_number(gap_sup));
    cells.push_back(csv_number(gap_p));
    cells.push_back(csv_integer(pass ? 1 : 0));
    csv.row(cells);
  }
  csv.close();
  man.mark_timing("value");
  man.add_number("compare.worst_gap", worst_gap);
  man.add("compare.verdict", all_pass ? "pass" : "fail");
  man.add_file("compare.csv");
  man.write();
  return all_pass;
}

namespace {

// One PDE run returning the final-snapshot radial profile (sweep helper).
double sweep_final_radius(const EpsilonFrame& ef, const GridSpec& grid, const TerminalCost& g,
                          double t_final, double safety, int rays, int threads) {
  PdeOptions opts;
  opts.cfl_safety = safety;
  opts.threads = threads;
  LevelSetField u0 = LevelSetField::sample(grid, g.value, threads);
  EvolveResult ev = evolve(ef, u0, t_final, opts);
  return radial_profile(ev.snapshots.back(), Eigen::VectorXd::Zero(ef.ambient_dim()), rays)
      .radius;
}

}  // namespace

bool run_sweep(const Config& cfg, const StageContext& ctx) {
  OutputLock lock(ctx.out_dir);
  RunManifest man(ctx.out_dir);
  stamp(man, cfg, ctx, "sweep");

  const std::string axis = cfg.get_string("sweep", "axis");
  std::vector<double> values = cfg.get_list("sweep", "values");
  if (values.empty()) throw config_error("[sweep] values must be nonempty");
  man.add("sweep.axis", axis);

  if (axis == "epsilon") {
    Frame base = parse_frame(cfg);
    if (cfg.has_key("frame", "epsilon"))
      throw config_error("epsilon comes from the sweep values; drop it from [frame]");
    GridSpec grid = parse_grid(cfg, base.ambient_dim());
    TerminalCost g = parse_cost(cfg, "initial", base.ambient_dim());
    const double t_final = cfg.get_number("pde", "final_time");
    const double safety = cfg.get_number_or("pde", "cfl_safety", 0.2);
    const int rays = static_cast<int>(cfg.get_integer_or("pde", "rays", 256));
    cfg.ensure_all_consumed();
    CsvWriter csv(ctx.out_dir + "/sweep.csv",
                  {"epsilon", "radius", "delta_vs_first"});
    double first = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      EpsilonFrame ef(base, values[i]);
      double r = sweep_final_radius(ef, grid, g, t_final, safety, rays, ctx.threads);
      if (i == 0) first = r;
      csv.row({csv_number(values[i]), csv_number(r), csv_number(std::abs(r - first))});
    }
    csv.close();
  } else if (axis == "h") {
    EpsilonFrame ef = parse_epsilon_frame(cfg);
    if (cfg.has_key("grid", "nodes"))
      throw config_error("grid nodes come from the sweep values; drop them from [grid]");
    const int dim = ef.ambient_dim();
    std::vector<double> lo_raw = cfg.get_list("grid", "lo");
    std::vector<double> hi_raw = cfg.get_list("grid", "hi");
    TerminalCost g = parse_cost(cfg, "initial", dim);
    const double t_final = cfg.get_number("pde", "final_time");
    const double safety = cfg.get_number_or("pde", "cfl_safety", 0.2);
    const int rays = static_cast<int>(cfg.get_integer_or("pde", "rays", 256));
    const double reference =
        cfg.get_number_or("sweep", "reference", std::numeric_limits<double>::quiet_NaN());
    cfg.ensure_all_consumed();
    CsvWriter csv(ctx.out_dir + "/sweep.csv", {"nodes", "h_max", "radius", "abs_err"});
    for (double v : values) {
      int n = static_cast<int>(std::lround(v));
      if (std::abs(v - n) > 1e-9 || n < 3)
        throw config_error("h sweep values are node counts (integers >= 3)");
      GridSpec grid;
      grid.lo.resize(dim);
      grid.hi.resize(dim);
      grid.nodes.assign(static_cast<std::size_t>(dim), n);
      auto fill = [&](const std::vector<double>& raw, Eigen::VectorXd& dst, const char* what) {
        if (raw.size() == 1)
          dst.setConstant(raw[0]);
        else if (static_cast<int>(raw.size()) == dim)
          for (int a = 0; a < dim; ++a) dst[a] = raw[static_cast<std::size_t>(a)];
        else
          throw config_error(std::string("grid ") + what + " needs 1 or dimension entries");
      };
      fill(lo_raw, grid.lo, "lo");
      fill(hi_raw, grid.hi, "hi");
      grid.validate();
      double hmax = 0.0;
      for (int a = 0; a < dim; ++a) hmax = std::max(hmax, grid.spacing(a));
      double r = sweep_final_radius(ef, grid, g, t_final, safety, rays, ctx.threads);
      csv.row({csv_integer(n), csv_number(hmax), csv_number(r),
               csv_number(std::abs(r - reference))});
    }
    csv.close();
  } else if (axis == "dt") {
    EpsilonFrame ef = parse_epsilon_frame(cfg);
    const int dim = ef.ambient_dim();
    Eigen::VectorXd x0 = cfg.get_vector("weak_order", "point");
    Eigen::VectorXd control = cfg.get_vector("weak_order", "control");
    const long pairs = cfg.get_integer("weak_order", "pairs");
    const bool completed = cfg.get_bool_or("weak_order", "completed", true);
    std::string seed_source;
    const std::uint64_t seed = resolve_seed(cfg, "weak_order", ctx, &seed_source);
    auto rows = cfg.get_repeated_lists("weak_order", "monomial");
    if (rows.empty())
      throw config_error("[weak_order] needs monomial entries: [coeff, e1..eN]");
    std::vector<Monomial> terms;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != 1 + dim)
        throw config_error("[weak_order] monomial rows need 1 + dimension entries");
      Monomial mono;
      mono.coeff = row[0];
      for (int j = 0; j < dim; ++j) {
        int e = static_cast<int>(std::lround(row[static_cast<std::size_t>(1 + j)]));
        if (e < 0) throw config_error("monomial exponents must be nonnegative integers");
        mono.exps.push_back(e);
      }
      terms.push_back(std::move(mono));
    }
    Polynomial phi(dim, std::move(terms));
    cfg.ensure_all_consumed();
    GeneratorOrderResult res =
        generator_weak_order(ef, completed, phi, x0, control, values, pairs, seed, ctx.threads);
    man.add_number("weak_order.reference", res.reference);
    man.add_number("weak_order.observed_order", res.observed_order);
    man.add("weak_order.seed_source", seed_source);
    man.add_integer("weak_order.seed", static_cast<long long>(seed));
    CsvWriter csv(ctx.out_dir + "/sweep.csv",
                  {"dt", "estimate_plain", "stderr_plain", "error_plain", "estimate_cv",
                   "stderr_cv", "error_cv"});
    for (const auto& row : res.rows)
      csv.row({csv_number(row.dt), csv_number(row.estimate_plain), csv_number(row.stderr_plain),
               csv_number(row.error_plain), csv_number(row.estimate_cv),
               csv_number(row.stderr_cv), csv_number(row.error_cv)});
    csv.close();
  } else if (axis == "p" || axis == "K") {
    EpsilonFrame ef = parse_epsilon_frame(cfg);
    const int dim = ef.ambient_dim();
    TerminalCost g = parse_cost(cfg, "cost", dim);
    require_bounded_cost(g);
    DynamicsMode mode = parse_mode(cfg.get_string_or("value", "mode", "controlled_eps"));
    const double t = cfg.get_number_or("value", "t", 0.0);
    const double horizon = cfg.get_number("value", "final_time");
    const double dt = cfg.get_number("value", "dt");
    std::string seed_source;
    const std::uint64_t seed = resolve_seed(cfg, "value", ctx, &seed_source);
    Eigen::VectorXd x = cfg.get_vector("value", "point");
    if (x.size() != dim) throw config_error("[value] point has the wrong dimension");
    SearchSpec search = parse_search(cfg);
    std::shared_ptr<Policy> single;
    if (!search.enabled) single = parse_policy(cfg, ef, mode, &g);
    long paths = 0;
    double p = 0.0;
    if (axis == "p")
      paths = cfg.get_integer("value", "paths");
    else
      p = cfg.get_order("value", "p");
    cfg.ensure_all_consumed();
    man.add("value.seed_source", seed_source);
    man.add_integer("value.seed", static_cast<long long>(seed));
    CsvWriter csv(ctx.out_dir + "/sweep.csv",
                  {axis == "p" ? "p" : "K", "estimate", "stderr", "policy_id"});
    for (double v : values) {
      double pv = axis == "p" ? v : p;
      long kv = axis == "p" ? paths : static_cast<long>(std::llround(v));
      if (axis == "K" && (std::abs(v - static_cast<double>(kv)) > 1e-9 || kv < 1))
        throw config_error("K sweep values are positive path counts");
      BestValue best = value_at_point(ef, mode, single.get(), search, g, x, t, horizon, pv, dt,
                                      kv, seed, ctx.threads);
      csv.row({csv_number(v), csv_number(best.estimate.value),
               csv_number(best.estimate.std_error), best.policy_id});
    }
    csv.close();
  } else if (axis == "directions") {
    EpsilonFrame ef = parse_epsilon_frame(cfg);
    const int dim = ef.ambient_dim();
    Eigen::VectorXd x = cfg.get_vector("hamiltonian", "point");
    Eigen::VectorXd p = cfg.get_vector("hamiltonian", "covector");
    auto rows = cfg.get_repeated_lists("hamiltonian", "row");
    if (static_cast<int>(rows.size()) != dim)
      throw config_error("[hamiltonian] needs one row per dimension");
    Eigen::MatrixXd s(dim, dim);
    for (int i = 0; i < dim; ++i) {
      if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != dim)
        throw config_error("[hamiltonian] rows need dimension entries");
      for (int j = 0; j < dim; ++j)
        s(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    s = ((s + s.transpose()) / 2.0).eval();
    cfg.ensure_all_consumed();
    Eigen::MatrixXd w = hamiltonian_matrix_eps(ef, x, p, s);
    const double closed = hamiltonian_closed(w);
    man.add_number("hamiltonian.closed_form", closed);
    CsvWriter csv(ctx.out_dir + "/sweep.csv",
                  {"directions", "grid_value", "closedform", "abs_err"});
    for (double v : values) {
      int n = static_cast<int>(std::lround(v));
      if (std::abs(v - n) > 1e-9 || n < 1)
        throw config_error("directions sweep values are positive integers");
      BruteForceExtremum ex = hamiltonian_bruteforce(w, n, 0);
      csv.row({csv_integer(n), csv_number(ex.grid_value), csv_number(closed),
               csv_number(std::abs(ex.grid_value - closed))});
    }
    csv.close();
  } else {
    throw config_error("unknown sweep axis '" + axis +
                       "' (expected epsilon, p, dt, h, K, or directions)");
  }

  man.mark_timing("sweep");
  man.add_file("sweep.csv");
  man.write();
  return true;
}

}  // namespace hmcf::harness
