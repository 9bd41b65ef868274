// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/cli/experiment_config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace tabllp::cli {

/// Subcommand names in usage order.
const std::vector<std::string>& command_names();

/// Runs one subcommand. Seed-sweep commands run up to `jobs` seeds at once;
/// their output is emitted in seed order. Throws on failure.
void run_command(const std::string& name, const ExperimentConfig& config, int jobs, std::ostream& out,
                 std::ostream& err);

// Individual commands. Every input path is checked before any compute.
void cmd_preprocess(const ExperimentConfig& config, std::ostream& out);
void cmd_bag(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
void cmd_pretrain(const ExperimentConfig& config, std::ostream& out);
void cmd_finetune(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
void cmd_evaluate(const ExperimentConfig& config, std::ostream& out);
void cmd_report(const ExperimentConfig& config, std::ostream& out);

}  // namespace tabllp::cli
