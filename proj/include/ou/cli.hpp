#pragma once

// Command dispatch for the oulab driver.
//
// Exit status: 0 when every asserted check passes, 1 (CheckFailed) otherwise
// with the failing rows on the error stream, 2 on ConfigInvalid. The output
// directory is taken from the override argument, then OULAB_OUTPUT_DIR, then
// the config's run.output.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ou/config.hpp"
#include "ou/report.hpp"

namespace ou::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigInvalid = 2;

/// evolve, covariance, invariance, diffcheck, logsob, hyper, spde, ergodic.
const std::vector<std::string>& check_names();
/// check_names() plus report-all.
const std::vector<std::string>& subcommands();

struct RunOptions {
  std::optional<std::filesystem::path> output;
  /// Skips the OULAB_OUTPUT_DIR lookup (tests).
  bool ignore_environment = false;
};

std::filesystem::path resolve_output(const ExperimentConfig& config, const RunOptions& options);

/// Runs the subcommand and writes its artifacts; throws Error on invalid input.
RunReport execute(const std::string& subcommand, const ExperimentConfig& config, const std::filesystem::path& output);

int run(const std::string& subcommand, const ExperimentConfig& config, std::ostream& out, std::ostream& err,
        const RunOptions& options = {});
int run(const std::string& subcommand, const std::string& config_path, std::ostream& out, std::ostream& err,
        const RunOptions& options = {});

}  // namespace ou::cli
