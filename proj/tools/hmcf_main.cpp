#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hmcf/errors.hpp"
#include "hmcf/harness/acceptance.hpp"
#include "hmcf/harness/config.hpp"
#include "hmcf/harness/stages.hpp"
#include "hmcf/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

void attach_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
  if (needs_config)
    cmd->add_option("--config", args.config_path, "configuration document")->required();
  cmd->add_option("--out", args.out_dir, "output directory (locked for the run)")->required();
  cmd->add_option("--seed", args.seed, "seed override")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approximated horizontal mean curvature flow laboratory"};
  app.set_version_flag("--version", hmcf::kVersion);
  app.require_subcommand(1);

  CommonArgs pde_args, sim_args, val_args, cmp_args, swp_args, chk_args;
  int criterion = 0;

  attach_common(app.add_subcommand("pde", "evolve a level-set field and extract the front"),
                pde_args, true);
  attach_common(app.add_subcommand("simulate", "integrate horizontal or controlled paths"),
                sim_args, true);
  attach_common(app.add_subcommand("value", "estimate the control value at points"),
                val_args, true);
  attach_common(
      app.add_subcommand("compare", "cross-check the PDE field against value estimates"),
      cmp_args, true);
  attach_common(app.add_subcommand("sweep", "convergence table along one axis"), swp_args,
                true);
  CLI::App* chk = app.add_subcommand("check", "run the acceptance suite");
  attach_common(chk, chk_args, false);
  chk->add_option("--criterion", criterion, "single criterion 1..10 (default: all)")
      ->check(CLI::Range(0, 10));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems exit 1; --help/--version exit 0
  }

  try {
    auto run_stage = [](const CommonArgs& args,
                        bool (*stage)(const hmcf::harness::Config&,
                                      const hmcf::harness::StageContext&)) {
      hmcf::harness::Config cfg = hmcf::harness::Config::parse_file(args.config_path);
      hmcf::harness::StageContext ctx;
      ctx.out_dir = args.out_dir;
      ctx.threads = args.threads;
      ctx.has_seed_override = args.seed_given;
      ctx.seed_override = args.seed;
      return stage(cfg, ctx);
    };

    bool pass = true;
    if (app.got_subcommand("pde")) {
      pass = run_stage(pde_args, hmcf::harness::run_pde);
    } else if (app.got_subcommand("simulate")) {
      pass = run_stage(sim_args, hmcf::harness::run_simulate);
    } else if (app.got_subcommand("value")) {
      pass = run_stage(val_args, hmcf::harness::run_value);
    } else if (app.got_subcommand("compare")) {
      pass = run_stage(cmp_args, hmcf::harness::run_compare);
    } else if (app.got_subcommand("sweep")) {
      pass = run_stage(swp_args, hmcf::harness::run_sweep);
    } else if (app.got_subcommand("check")) {
      if (criterion == 0)
        pass = hmcf::harness::run_all_criteria(chk_args.out_dir, chk_args.threads);
      else
        pass = hmcf::harness::run_criterion(criterion, chk_args.out_dir, chk_args.threads)
                   .passed;
    }
    if (!pass) {
      std::cerr << "verdict: FAIL (tolerance or property not met)\n";
      return 2;
    }
    return 0;
  } catch (const hmcf::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
