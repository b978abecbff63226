#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace rrhoc {

/// Exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitFail = 1,
  kExitInvalidInput = 2,
  kExitBudgetExhausted = 3,
};

struct CliOptions {
  std::string command;
  std::filesystem::path config_path;
  /// Overrides the config `out` directory when nonempty.
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::string log_level = "info";
  /// Witness report (synthesize output) for analyze/simulate/certify.
  std::filesystem::path gains_path;
  /// Battery scenario simulated by `simulate`.
  std::string scenario = "undisturbed";
};

/// Dispatches one command; never throws, maps errors to exit codes.
int run_cli(const CliOptions& options);

/// argv front end used by the binary.
int run_cli(int argc, const char* const* argv);

} // namespace rrhoc
