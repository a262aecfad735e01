#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "manifest.hpp"

int main(int argc, char** argv) {
  using namespace floqstab::cli;
  CLI::App app{"Floquet stabilization toolkit: quasienergies, dissipative steady states and scans"};
  app.set_version_flag("--version", tool_version);
  app.require_subcommand(1);

  CommandOptions opts;
  int truncation = 0, steps = 0;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config,-c", opts.config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", opts.out, "output directory")->capture_default_str();
    sub->add_option("--threads,-j", opts.threads, "worker threads (0 = logical cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--keep-going", opts.keep_going, "record per-point failures and continue");
    sub->add_option("--truncation-override", truncation, "cavity truncation n_max for every cavity (boost: n_b only)");
    sub->add_option("--steps-per-period", steps, "fixed RK4 steps per drive period");
    sub->add_flag("--quiet,-q", opts.quiet, "no progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : config_error;
  }
  if (truncation) opts.truncation_override = truncation;
  if (steps) opts.steps_per_period = steps;
  return run_command(app.get_subcommands().front()->get_name(), opts);
}
