#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "backflow/config.hpp"
#include "backflow/measure.hpp"

namespace backflow {

/// Outcome of one property check. `worst` is the largest deviation seen for
/// upper-bound checks, or the smallest value seen for positivity checks.
struct PropertyResult {
  std::string suite;
  std::string name;
  bool passed = true;
  double worst = 0.0;
  double tolerance = 0.0;
  long trials = 0;
  std::string detail;
};

std::vector<PropertyResult> statespace_properties(const VerifyConfig& config,
                                                  std::uint64_t seed);

std::vector<PropertyResult> translation_properties(const VerifyConfig& config,
                                                   std::uint64_t seed);

/// Properties of `model` plus checks against the sinusoidal reference
/// preset on [0, 2 pi] with `grid_steps` steps.
std::vector<PropertyResult> dynamics_properties(const DynamicsModel& model,
                                                const VerifyConfig& config, int grid_steps,
                                                std::uint64_t seed);

std::vector<PropertyResult> measure_properties(const DynamicsModel& model,
                                               const VerifyConfig& config, int grid_steps,
                                               std::uint64_t seed);

/// All four suites in order.
std::vector<PropertyResult> run_verification(const RunConfig& config);

/// A random pair with 0 < D < 1 (neither identical nor orthogonal).
std::pair<DensityMatrix, DensityMatrix> sample_non_orthogonal_pair(int dim, RngStream& rng);

}  // namespace backflow
