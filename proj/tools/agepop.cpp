// agepop: command-line front end (equilibrium, simulate, roa, sweep, verify).

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "agepop/cli/commands.hpp"
#include "agepop/cli/config.hpp"

namespace {

using agepop::cli::json;

struct Common {
  std::string config;
  std::string out;
  bool plot = false;
  bool dump_config = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration (defaults when omitted)");
  sub->add_option("--out", c.out, "output directory (overrides output.directory)");
  sub->add_flag("--plot", c.plot, "also write SVG plots");
  sub->add_flag("--dump-config", c.dump_config, "print the effective configuration and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-structured predator-prey population: equilibrium, dilution control, Lyapunov analysis"};
  app.require_subcommand(1);
  Common common;
  auto* eq = app.add_subcommand("equilibrium", "steady state profiles and summary");
  auto* sim = app.add_subcommand("simulate", "closed- or open-loop simulation");
  auto* roa = app.add_subcommand("roa", "region-of-attraction estimate (largest V1 level set)");
  auto* sweep = app.add_subcommand("sweep", "parallel cartesian sweep over controllers, gains and ICs");
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  for (auto* s : {eq, sim, roa, sweep, verify}) add_common(s, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : agepop::cli::kExitConfig;
  }

  try {
    const agepop::cli::RunConfig cfg = agepop::cli::load_config(common.config);
    if (common.dump_config) {
      std::cout << agepop::cli::to_json(cfg).dump(2) << '\n';
      return agepop::cli::kExitOk;
    }
    const std::filesystem::path out = common.out.empty() ? cfg.output.directory : common.out;
    const bool plot = common.plot || cfg.output.plot;
    json summary;
    int code = agepop::cli::kExitOk;
    if (eq->parsed()) {
      summary = agepop::cli::cmd_equilibrium(cfg, out, plot);
    } else if (sim->parsed()) {
      summary = agepop::cli::cmd_simulate(cfg, out, plot);
    } else if (roa->parsed()) {
      summary = agepop::cli::cmd_roa(cfg, out, plot);
    } else if (sweep->parsed()) {
      summary = agepop::cli::cmd_sweep(cfg, out, plot, &code);
    } else {
      bool ok = false;
      agepop::cli::cmd_verify(cfg, out, std::cout, &ok);
      std::cout << (ok ? "verify: all criteria passed" : "verify: FAILED") << '\n';
      return ok ? agepop::cli::kExitOk : agepop::cli::kExitVerification;
    }
    std::cout << summary.dump(2) << '\n';
    return code;
  } catch (const agepop::Error& e) {
    std::cerr << "agepop: " << e.what() << '\n';
    return agepop::cli::exit_code_for(e);
  }
}
