#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace oamgrav::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitOracleMismatch = 3 };

struct CommandResult {
    int exit_code = kExitOk;
    std::vector<std::string> files;     // paths written, in order
    std::vector<std::string> messages;  // diagnostics for stderr
};

// Each command writes its CSV files into out_dir and throws on configuration
// or numerical failure; run_command maps exceptions to exit codes.
CommandResult cmd_modes(const ExperimentConfig& cfg, const std::string& out_dir);
CommandResult cmd_lsymbols(const ExperimentConfig& cfg, const std::string& out_dir);
CommandResult cmd_evolve(const ExperimentConfig& cfg, const std::string& out_dir);
CommandResult cmd_metrics(const ExperimentConfig& cfg, const std::string& out_dir);
CommandResult cmd_reproduce(const ExperimentConfig& cfg, const std::string& figure, const std::string& out_dir);
CommandResult cmd_montecarlo(const ExperimentConfig& cfg, const std::string& out_dir);
CommandResult cmd_decay_distance(const ExperimentConfig& cfg, const std::string& out_dir);

struct Invocation {
    std::string command;
    std::string config_path;
    std::string out_dir;  // empty: use the config's output_dir
    std::optional<std::uint64_t> seed;
    std::string figure;
};

/// Loads the config, dispatches, prints diagnostics to err and returns the
/// process exit status.
int run_command(const Invocation& inv, std::ostream& err);

}  // namespace oamgrav::cli
