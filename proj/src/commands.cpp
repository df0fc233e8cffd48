#include "backflow/commands.hpp"

#include <chrono>
#include <sstream>

#include "backflow/errors.hpp"
#include "backflow/translation.hpp"
#include "backflow/verify.hpp"

namespace backflow {

using nlohmann::json;

namespace {

class PhaseTimer {
 public:
  explicit PhaseTimer(RunReport& report) : report_(report), start_(Clock::now()) {}

  void lap(const std::string& phase) {
    const auto now = Clock::now();
    report_.timings.emplace_back(phase, std::chrono::duration<double>(now - start_).count());
    start_ = now;
  }

 private:
  using Clock = std::chrono::steady_clock;
  RunReport& report_;
  Clock::time_point start_;
};

RunReport new_report(const std::string& command, const RunConfig& config) {
  RunReport r;
  r.command = command;
  r.config = config;
  return r;
}

std::string json_payload(const RunReport& report) {
  return to_json(report, false).dump(2) + "\n";
}

json pair_json(const DensityMatrix& a, const DensityMatrix& b) {
  return {{"rho1", matrix_to_json(a.matrix())}, {"rho2", matrix_to_json(b.matrix())}};
}

std::string trajectory_csv(const TraceDistanceTrajectory& traj) {
  std::ostringstream os;
  os << "t,distance,sigma\n";
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    os << format_number(traj.grid[k]) << ',' << format_number(traj.distances[k]) << ','
       << format_number(traj.sigma[k]) << '\n';
  }
  return os.str();
}

std::string histogram_csv(const BackflowHistogram& h) {
  std::ostringstream os;
  os << "bin_left,bin_right,count,probability\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    os << format_number(h.bin_edges[b]) << ',' << format_number(h.bin_edges[b + 1]) << ','
       << h.counts[b] << ',' << format_number(h.probabilities[b]) << '\n';
  }
  os << "# n_samples," << h.n_samples << '\n';
  os << "# seed," << h.seed << '\n';
  os << "# max_sampled," << format_number(h.max_sampled) << '\n';
  os << "# reference_value," << format_number(h.reference_value) << '\n';
  return os.str();
}

std::vector<double> to_vector(const RealVector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"trajectory", "measure", "histogram", "verify",
                                              "translate"};
  return names;
}

CommandOutcome cmd_trajectory(const RunConfig& config) {
  CommandOutcome out{kExitOk, new_report("trajectory", config), {}};
  PhaseTimer timer(out.report);
  const NamedPair pair = resolve_pair(config.pair);
  const DynamicsModel model = make_model(config);
  timer.lap("setup");
  const TraceDistanceTrajectory traj = trace_distance_trajectory(model, pair.first, pair.second);
  timer.lap("trajectory");

  out.report.results = {{"pair", pair.name},
                        {"backflow", traj.backflow()},
                        {"initial_distance", traj.distances.front()},
                        {"final_distance", traj.distances.back()}};
  if (config.format == "csv") {
    out.payload = trajectory_csv(traj);
  } else {
    out.report.results["t"] = traj.grid;
    out.report.results["distance"] = traj.distances;
    out.report.results["sigma"] = traj.sigma;
    out.payload = json_payload(out.report);
  }
  return out;
}

CommandOutcome cmd_measure(const RunConfig& config) {
  CommandOutcome out{kExitOk, new_report("measure", config), {}};
  PhaseTimer timer(out.report);
  const DynamicsModel model = make_model(config);
  MeasureConfig mc;
  mc.dim = config.dim;
  mc.pure_samples = static_cast<int>(config.samples);
  mc.mixed_samples = config.mixed_samples;
  mc.explicit_pairs = config.candidate_pairs;
  if (config.include_mpair && config.dim == 3) mc.explicit_pairs.push_back(*named_pair("mpair"));
  mc.refine = config.refine;
  mc.threads = config.threads;
  timer.lap("setup");
  const MeasureResult r = estimate_measure(model, mc, config.seed);
  timer.lap("estimate");

  json breakdown = json::array();
  for (const CandidateClassBest& c : r.candidate_breakdown) {
    breakdown.push_back({{"class", c.name}, {"evaluated", c.evaluated}, {"best", c.best}});
  }
  out.report.results = {{"estimate", r.estimate},
                        {"estimate_is_lower_bound", true},
                        {"best_class", r.best_class},
                        {"best_name", r.best_name},
                        {"best_pair", pair_json(r.best_first, r.best_second)},
                        {"best_pair_trace_distance", trace_distance(r.best_first, r.best_second)},
                        {"samples_evaluated", r.samples_evaluated},
                        {"candidate_breakdown", breakdown},
                        {"seed", r.seed}};
  out.payload = json_payload(out.report);
  return out;
}

CommandOutcome cmd_histogram(const RunConfig& config) {
  CommandOutcome out{kExitOk, new_report("histogram", config), {}};
  PhaseTimer timer(out.report);
  if (config.dim != 3) {
    throw Error(ErrorCode::ValidationError, "field 'dim': histogram needs dim 3");
  }
  const DynamicsModel model = make_model(config);
  timer.lap("setup");
  const BackflowHistogram h =
      histogram_backflow(model, config.samples, config.bins, config.seed, config.threads);
  timer.lap("sampling");

  out.report.results = {{"n_samples", h.n_samples},
                        {"seed", h.seed},
                        {"max_sampled", h.max_sampled},
                        {"reference_value", h.reference_value},
                        {"gap", h.reference_value - h.max_sampled},
                        {"bin_edges", h.bin_edges},
                        {"counts", h.counts},
                        {"probabilities", h.probabilities}};
  out.payload = config.format == "csv" ? histogram_csv(h) : json_payload(out.report);
  return out;
}

CommandOutcome cmd_verify(const RunConfig& config) {
  CommandOutcome out{kExitOk, new_report("verify", config), {}};
  PhaseTimer timer(out.report);
  const std::vector<PropertyResult> results = run_verification(config);
  timer.lap("verify");

  json props = json::array();
  for (const PropertyResult& p : results) {
    props.push_back({{"suite", p.suite},
                     {"name", p.name},
                     {"passed", p.passed},
                     {"worst", p.worst},
                     {"tolerance", p.tolerance},
                     {"trials", p.trials},
                     {"detail", p.detail}});
    if (!p.passed) out.report.violations.push_back(p.suite + "." + p.name);
  }
  out.report.results = {{"properties", props}};
  out.exit_code = out.report.ok() ? kExitOk : kExitNumerical;
  out.payload = json_payload(out.report);
  return out;
}

CommandOutcome cmd_translate(const RunConfig& config) {
  CommandOutcome out{kExitOk, new_report("translate", config), {}};
  const NamedPair pair = resolve_pair(config.pair);
  const TranslatedPair tp = jointly_translate(pair.first, pair.second, config.epsilon_fraction);
  const ShiftConstruction& sc = tp.construction;
  out.report.results = {
      {"pair", pair.name},
      {"alpha", sc.selection.overlap},
      {"weights", {sc.selection.weight_first, sc.selection.weight_second}},
      {"norm_ratio", sc.norm_ratio},
      {"epsilon_max", sc.epsilon_max},
      {"epsilon", sc.epsilon},
      {"direction", matrix_to_json(sc.direction.matrix())},
      {"shift", matrix_to_json(sc.shift.matrix())},
      {"translated", pair_json(tp.first, tp.second)},
      {"min_eigenvalues", {tp.first.min_eigenvalue(), tp.second.min_eigenvalue()}},
      {"eigenvalues", {to_vector(tp.first.eigenvalues()), to_vector(tp.second.eigenvalues())}},
      {"trace_distance_before", trace_distance(pair.first, pair.second)},
      {"trace_distance_after", trace_distance(tp.first, tp.second)}};
  out.payload = json_payload(out.report);
  return out;
}

CommandOutcome run_command(const std::string& name, const RunConfig& config) {
  try {
    if (name == "trajectory") return cmd_trajectory(config);
    if (name == "measure") return cmd_measure(config);
    if (name == "histogram") return cmd_histogram(config);
    if (name == "verify") return cmd_verify(config);
    if (name == "translate") return cmd_translate(config);
    throw Error(ErrorCode::ValidationError, "unknown command '" + name + "'");
  } catch (const Error& e) {
    CommandOutcome out{is_numerical_failure(e.code()) ? kExitNumerical : kExitInvalid,
                       new_report(name, config), {}};
    out.report.results = {{"error", {{"code", std::string(to_string(e.code()))},
                                     {"message", e.what()}}}};
    out.report.violations.push_back(e.what());
    out.payload = json_payload(out.report);
    return out;
  }
}

}  // namespace backflow
