#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heatlocus/errors.hpp"
#include "json.hpp"

namespace heatlocus {

/// Process exit statuses.
enum ExitStatus : int {
  kExitOk = 0,
  kExitInvalidConfig = 2,
  kExitNumerical = 3,
  kExitContinuum = 4,
};

/// Maps an error class onto the exit-status contract.
int exit_status(ErrorKind kind);

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  bool verify = false;
};

/// Result of one command: the primary document (CSV or JSON text), an optional JSON
/// sidecar, and the exit status (nonzero statuses come with an explanatory primary JSON).
struct CommandOutput {
  std::string primary;
  std::string format;  // "csv" or "json"
  std::optional<std::string> sidecar;
  int status = kExitOk;
  /// Machine-readable content of the primary (JSON commands) or of the sidecar (CSV commands).
  nlohmann::json data;
};

std::vector<std::string> command_names();

/// Runs a command on a parsed config. Errors propagate as heatlocus::Error, except the
/// continuum-family refusal, which is returned with status kExitContinuum.
CommandOutput run_command(const std::string& name, const nlohmann::json& config, const RunOptions& options = {});

}  // namespace heatlocus
