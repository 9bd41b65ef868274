// SPDX-License-Identifier: Apache-2.0
// tabllp: learning from label proportions on tabular data.
//
//   tabllp <command> --config experiment.conf [--set key=value]... [--jobs N]
#include "tabllp/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Learning from label proportions on tabular data"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  int jobs = 1;
  for (const auto& name : tabllp::cli::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "experiment config file (key = value)")->required();
    sub->add_option("-s,--set", overrides, "override a config key: key=value");
    sub->add_option("-j,--jobs", jobs, "seeds to run concurrently")->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    auto config = tabllp::cli::ExperimentConfig::from_file(config_path);
    for (const auto& o : overrides) config.set_override(o);
    tabllp::cli::run_command(name, config, jobs, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
