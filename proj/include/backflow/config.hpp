#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "backflow/measure.hpp"

namespace backflow {

/// Rate model selection. `preset` is one of
///   sinusoidal  gamma_i = amplitude * sin(frequency t), lambda_i = 0
///   constant    gamma_i = gamma, lambda_i = lambda
///   zero        identity dynamics
///   tabulated   gamma/lambda read from two-column CSV files (missing
///               lambda tables mean lambda = 0)
struct ModelConfig {
  std::string preset = "sinusoidal";
  double amplitude = 0.03;
  double frequency = 1.0;
  double gamma = 0.03;
  double lambda = 0.0;
  std::string gamma1_csv;
  std::string gamma2_csv;
  std::string lambda1_csv;
  std::string lambda2_csv;
};

struct VerifyConfig {
  std::vector<int> dims{2, 3, 4};
  int trials = 100;
  /// Test hook: flips the sign of the shift operator in the translation suite.
  bool inject_fault = false;
};

struct RunConfig {
  ModelConfig model;
  double t_max = 2.0 * std::numbers::pi;
  int grid_steps = 2000;
  std::uint64_t seed = 1;
  long samples = 10000;
  int mixed_samples = 1000;
  int bins = 50;
  int dim = 3;
  std::vector<NamedPair> candidate_pairs;
  bool include_mpair = true;
  bool refine = false;
  std::string pair = "mpair";
  double epsilon_fraction = 0.5;
  Engine engine = Engine::ClosedForm;
  std::string output;
  std::string format = "csv";
  int threads = 0;
  VerifyConfig verify;
};

/// Parses and validates a JSON config object. Unknown keys and out-of-range
/// values raise ValidationError naming the field.
RunConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& config);

/// Reads the JSON file at `path` (if any), applies `overrides` as a merge
/// patch, then validates. Syntax errors raise ParseError with the line.
RunConfig parse_config(const std::optional<std::string>& path,
                       const nlohmann::json& overrides = nlohmann::json::object());

/// Parses a JSON text; ParseError carries the 1-based line number.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

/// A square matrix as rows of entries; an entry is a number or [re, im].
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json matrix_to_json(const Matrix& m);

RateFunctions make_rates(const ModelConfig& model);
DynamicsModel make_model(const RunConfig& config);

/// Resolves a pair spec: a named preset or a JSON file {"rho1": ..., "rho2": ...}.
NamedPair resolve_pair(const std::string& spec);

std::string to_string(Engine engine);

}  // namespace backflow
