// backflow: command-line front end for trace-distance backflow experiments.
//
//   backflow trajectory --pair mpair --output traj.csv
//   backflow measure --samples 2000
//   backflow histogram --samples 10000 --seed 7 --output hist.csv
//   backflow verify
//   backflow translate --pair pair.json

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "backflow/commands.hpp"
#include "backflow/errors.hpp"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  long samples = 0;
  int mixed_samples = 0;
  int grid_steps = 0;
  double t_max = 0.0;
  int bins = 0;
  int dim = 0;
  std::string pair;
  std::string engine;
  std::string output;
  std::string format;
  std::string model;
  double amplitude = 0.0;
  double frequency = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  std::string gamma1_csv;
  std::string gamma2_csv;
  double epsilon_fraction = 0.0;
  int trials = 0;
  std::vector<int> dims;
  int threads = 0;
  bool refine = false;
  bool no_mpair = false;
  bool inject_fault = false;
  bool full_scale = false;
};

void add_shared_options(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "RNG seed (unsigned 64-bit)");
  app.add_option("--samples", f.samples, "Random pure orthogonal pairs to draw");
  app.add_option("--mixed-samples", f.mixed_samples, "Random mixed orthogonal pairs (measure)");
  app.add_option("--grid-steps", f.grid_steps, "Uniform time steps on [0, t_max]");
  app.add_option("--t-max", f.t_max, "Time horizon");
  app.add_option("--bins", f.bins, "Histogram bins");
  app.add_option("--dim", f.dim, "Hilbert-space dimension for sampled pairs");
  app.add_option("--pair", f.pair, "mpair | pure-ab | pure-a-plus | path to pair JSON");
  app.add_option("--engine", f.engine, "closed_form | integrator");
  app.add_option("--output", f.output, "Output file (default: stdout)");
  app.add_option("--format", f.format, "csv | json");
  app.add_option("--model", f.model, "sinusoidal | constant | zero | tabulated");
  app.add_option("--amplitude", f.amplitude, "Sinusoidal rate amplitude");
  app.add_option("--frequency", f.frequency, "Sinusoidal rate frequency");
  app.add_option("--gamma", f.gamma, "Constant decay rate");
  app.add_option("--lambda", f.lambda, "Constant Lamb shift");
  app.add_option("--gamma1-csv", f.gamma1_csv, "Tabulated gamma_1 (time,value)");
  app.add_option("--gamma2-csv", f.gamma2_csv, "Tabulated gamma_2 (time,value)");
  app.add_option("--epsilon-fraction", f.epsilon_fraction, "Shift size as a fraction of its bound");
  app.add_option("--trials", f.trials, "Trials per property (verify)");
  app.add_option("--dims", f.dims, "Dimensions to verify");
  app.add_option("--threads", f.threads, "Worker threads (0 = auto)");
  app.add_flag("--refine", f.refine, "Nelder-Mead refinement of the best pure pair");
  app.add_flag("--no-mpair", f.no_mpair, "Leave mpair out of the measure candidates");
  app.add_flag("--inject-fault", f.inject_fault, "Test hook: corrupt the shift operator");
  app.add_flag("--full-scale", f.full_scale, "Use 100000 samples");
}

nlohmann::json overrides_from(const CLI::App& app, const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--seed")) j["seed"] = f.seed;
  if (given("--samples")) j["samples"] = f.samples;
  if (given("--mixed-samples")) j["mixed_samples"] = f.mixed_samples;
  if (given("--grid-steps")) j["grid_steps"] = f.grid_steps;
  if (given("--t-max")) j["t_max"] = f.t_max;
  if (given("--bins")) j["bins"] = f.bins;
  if (given("--dim")) j["dim"] = f.dim;
  if (given("--pair")) j["pair"] = f.pair;
  if (given("--engine")) j["engine"] = f.engine;
  if (given("--output")) j["output"] = f.output;
  if (given("--format")) j["format"] = f.format;
  if (given("--model")) j["model"]["preset"] = f.model;
  if (given("--amplitude")) j["model"]["amplitude"] = f.amplitude;
  if (given("--frequency")) j["model"]["frequency"] = f.frequency;
  if (given("--gamma")) j["model"]["gamma"] = f.gamma;
  if (given("--lambda")) j["model"]["lambda"] = f.lambda;
  if (given("--gamma1-csv")) j["model"]["gamma1_csv"] = f.gamma1_csv;
  if (given("--gamma2-csv")) j["model"]["gamma2_csv"] = f.gamma2_csv;
  if (given("--epsilon-fraction")) j["epsilon_fraction"] = f.epsilon_fraction;
  if (given("--trials")) j["verify"]["trials"] = f.trials;
  if (given("--dims")) j["verify"]["dims"] = f.dims;
  if (given("--threads")) j["threads"] = f.threads;
  if (f.refine) j["refine"] = true;
  if (f.no_mpair) j["include_mpair"] = false;
  if (f.inject_fault) j["verify"]["inject_fault"] = true;
  if (f.full_scale) j["samples"] = 100000;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-distance backflow and optimal state pair toolkit"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<CLI::App*> subs;
  for (const std::string& name : backflow::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    add_shared_options(*sub, flags);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : backflow::kExitInvalid;
  }

  CLI::App* chosen = app.get_subcommands().front();
  backflow::RunConfig config;
  try {
    std::optional<std::string> path;
    if (chosen->count("--config") > 0) path = flags.config;
    config = backflow::parse_config(path, overrides_from(*chosen, flags));
  } catch (const backflow::Error& e) {
    std::cerr << "backflow: " << e.what() << "\n";
    return backflow::kExitInvalid;
  }

  const backflow::CommandOutcome outcome = backflow::run_command(chosen->get_name(), config);
  if (config.output.empty()) {
    std::cout << outcome.payload;
  } else {
    std::ofstream out(config.output, std::ios::binary);
    out << outcome.payload;
    if (!out) {
      std::cerr << "backflow: cannot write " << config.output << "\n";
      return backflow::kExitInvalid;
    }
  }
  nlohmann::json summary = backflow::to_json(outcome.report, true);
  summary.erase("config");
  for (const char* bulky : {"t", "distance", "sigma", "bin_edges", "counts", "probabilities"}) {
    summary["results"].erase(bulky);
  }
  std::cerr << summary.dump() << "\n";
  return outcome.exit_code;
}
