#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "backflow/config.hpp"

namespace backflow {

struct RunReport {
  std::string command;
  RunConfig config;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::pair<std::string, double>> timings;  // seconds per phase
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Timings are wall-clock and therefore excluded from the deterministic
/// output file; the stderr summary includes them.
nlohmann::json to_json(const RunReport& report, bool include_timings);

/// Parses an emitted report back, re-validating its config echo.
RunReport report_from_json(const nlohmann::json& j);

/// '.' decimal point, 9 significant digits.
std::string format_number(double x);

}  // namespace backflow
