#include "backflow/report.hpp"

#include <cstdio>

#include "backflow/errors.hpp"

namespace backflow {

using nlohmann::json;

json to_json(const RunReport& report, bool include_timings) {
  json j{{"command", report.command},
         {"config", to_json(report.config)},
         {"results", report.results},
         {"violations", report.violations}};
  if (include_timings) {
    json t = json::object();
    for (const auto& [phase, seconds] : report.timings) t[phase] = seconds;
    j["timings"] = t;
  }
  return j;
}

RunReport report_from_json(const json& j) {
  if (!j.is_object() || !j.contains("command") || !j.contains("config") ||
      !j.contains("results") || !j.contains("violations")) {
    throw Error(ErrorCode::ValidationError, "report is missing required fields");
  }
  RunReport r;
  r.command = j["command"].get<std::string>();
  r.config = config_from_json(j["config"]);
  r.results = j["results"];
  r.violations = j["violations"].get<std::vector<std::string>>();
  if (j.contains("timings")) {
    for (const auto& [phase, seconds] : j["timings"].items()) {
      r.timings.emplace_back(phase, seconds.get<double>());
    }
  }
  return r;
}

std::string format_number(double x) {
  char buf[64];
  // %g honours the C locale only; the CLI never calls setlocale.
  std::snprintf(buf, sizeof buf, "%.9g", x == 0.0 ? 0.0 : x);
  return buf;
}

}  // namespace backflow
