#pragma once

#include <ostream>

namespace dtaas::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kInvariantViolation = 2, kVerifyMismatch = 3 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "DTAAS_OUTPUT_DIR";

/// Entry point of the `dtaas` tool: run, sweep, plot, verify, validate-config.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dtaas::cli
