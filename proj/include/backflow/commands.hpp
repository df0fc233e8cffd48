#pragma once

#include <string>
#include <vector>

#include "backflow/config.hpp"
#include "backflow/report.hpp"

namespace backflow {

/// Exit codes: 0 success, 1 invalid input or orthogonal-pair rejection,
/// 2 numerical failure (CPT violation, integrator divergence, failed checks).
enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitNumerical = 2 };

struct CommandOutcome {
  int exit_code = kExitOk;
  RunReport report;
  /// Deterministic file content: CSV table or the JSON report without timings.
  std::string payload;
};

CommandOutcome cmd_trajectory(const RunConfig& config);
CommandOutcome cmd_measure(const RunConfig& config);
CommandOutcome cmd_histogram(const RunConfig& config);
CommandOutcome cmd_verify(const RunConfig& config);
CommandOutcome cmd_translate(const RunConfig& config);

const std::vector<std::string>& command_names();

/// Dispatches by name and converts errors into an outcome with an error
/// payload and the matching exit code.
CommandOutcome run_command(const std::string& name, const RunConfig& config);

}  // namespace backflow
