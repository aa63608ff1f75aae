#pragma once

#include <filesystem>

#include "invlab/config.hpp"

namespace invlab {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
};

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 config, 3 numerical, 4 acceptance (fit failed)
  std::vector<std::string> messages;
};

/// Exit codes shared by the runner and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;
inline constexpr int kExitAcceptanceError = 4;

/// Runs every experiment in the config and writes, under out_dir:
///   <experiment>/report.csv      id,gamma,error,modulus,fitted_C,branch
///   <experiment>/report.svg      log-log gamma vs error with the modulus
///                                overlay
///   <experiment>/traces/*.csv    measured traces (first member), layout
///                                time,node_1..node_P
///   manifest.json                config echo, build id, wall times, fitted
///                                constants and schedule constants
RunOutcome run_experiments(const ExperimentConfig& cfg, const RunOverrides& overrides = {});

std::string build_id();

}  // namespace invlab
