#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "backflow/dynamics.hpp"
#include "backflow/statespace.hpp"

namespace backflow {

enum class Engine { ClosedForm, Integrator };

/// Rates, time grid and the precomputed map coefficients. Immutable once
/// built and shared read-only between sampling workers.
class DynamicsModel {
 public:
  static DynamicsModel build(RateFunctions rates, std::vector<double> grid,
                             Engine engine = Engine::ClosedForm,
                             double tol_cpt = kDefaultCptTolerance);

  const RateFunctions& rates() const noexcept { return rates_; }
  const std::vector<double>& grid() const noexcept { return coeffs_.grid; }
  const MapCoefficients& coefficients() const noexcept { return coeffs_; }
  Engine engine() const noexcept { return engine_; }

  /// Phi_t(op) at every grid point; op has dimension >= 3.
  std::vector<Matrix> evolve_operator(const Matrix& op) const;

 private:
  DynamicsModel(RateFunctions rates, MapCoefficients coeffs, Engine engine)
      : rates_(std::move(rates)), coeffs_(std::move(coeffs)), engine_(engine) {}

  RateFunctions rates_;
  MapCoefficients coeffs_;
  Engine engine_;
};

struct TraceDistanceTrajectory {
  std::vector<double> grid;
  std::vector<double> distances;
  std::vector<double> sigma;  // finite-difference time derivative of distances

  /// Sum of the positive increments of the distance: the integral of sigma
  /// over the intervals where it is positive.
  double backflow() const;
};

/// Builds a trajectory from sampled distances, filling sigma by central
/// differences (one-sided at the ends).
TraceDistanceTrajectory make_trajectory(std::vector<double> grid,
                                        std::vector<double> distances);

/// D(Phi_t rho1, Phi_t rho2) on the model grid. Qubit pairs are embedded into
/// span{|a>, |b>}; dimensions above 3 carry spectator levels.
TraceDistanceTrajectory trace_distance_trajectory(const DynamicsModel& model,
                                                  const DensityMatrix& rho1,
                                                  const DensityMatrix& rho2);

double sigma_at(const TraceDistanceTrajectory& traj, std::size_t k);

double backflow(const TraceDistanceTrajectory& traj);

/// Shorthand for trace_distance_trajectory(...).backflow().
double pair_backflow(const DynamicsModel& model, const DensityMatrix& rho1,
                     const DensityMatrix& rho2);

struct NamedPair {
  std::string name;
  DensityMatrix first;
  DensityMatrix second;
};

/// Named initial pairs of the three-level system:
///   "mpair"       |a><a|  vs  (|b><b| + |c><c|)/2
///   "pure-ab"     |a><a|  vs  |b><b|
///   "pure-a-plus" |a><a|  vs  |+><+|, |+> = (|b> + |c>)/sqrt(2)
std::optional<NamedPair> named_pair(const std::string& name);
std::vector<std::string> named_pair_names();

/// Number of sampling workers: `requested` if positive, else the hardware
/// concurrency; capped by the BACKFLOW_THREADS environment variable.
int resolve_worker_count(int requested = 0);

/// Evaluates fn(0..n-1) on up to `workers` threads. Results are stored by
/// index, so the output does not depend on the worker count.
std::vector<double> parallel_evaluate(std::size_t n, int workers,
                                      const std::function<double(std::size_t)>& fn);

struct MeasureConfig {
  int dim = 3;
  int pure_samples = 1000;
  int mixed_samples = 1000;
  std::vector<NamedPair> explicit_pairs;
  bool refine = false;
  int refine_iterations = 300;
  int threads = 0;
};

struct CandidateClassBest {
  std::string name;
  long evaluated = 0;
  double best = 0.0;
};

struct MeasureResult {
  /// Lower bound on the measure: the best backflow found.
  double estimate = 0.0;
  std::string best_class;
  std::string best_name;
  DensityMatrix best_first;
  DensityMatrix best_second;
  TraceDistanceTrajectory best_trajectory;
  long samples_evaluated = 0;
  std::vector<CandidateClassBest> candidate_breakdown;
  std::uint64_t seed = 0;
};

/// Maximizes the backflow over orthogonal candidate pairs: random pure pairs,
/// random mixed pairs, and explicit pairs (non-orthogonal explicit pairs are
/// first replaced by their Jordan-Hahn rescaled orthogonal pair). With
/// `refine` set, the best pure pair is polished by a Nelder-Mead search.
MeasureResult estimate_measure(const DynamicsModel& model, const MeasureConfig& config,
                               std::uint64_t seed);

struct BackflowHistogram {
  std::vector<double> bin_edges;
  std::vector<long> counts;
  std::vector<double> probabilities;
  long n_samples = 0;
  double max_sampled = 0.0;
  double reference_value = 0.0;  // backflow of "mpair"
  std::uint64_t seed = 0;
};

/// Backflow distribution of random pure orthogonal pairs, `bins` uniform bins
/// over [0, max(max_sampled, reference_value)]. Requires a three-level model
/// dimension (`dim` = 3) for the reference pair.
BackflowHistogram histogram_backflow(const DynamicsModel& model, long n_samples, int bins,
                                     std::uint64_t seed, int threads = 0, int dim = 3);

/// Backflow of every sample of `histogram_backflow` (same streams).
std::vector<double> sample_pure_backflows(const DynamicsModel& model, long n_samples,
                                          std::uint64_t seed, int threads = 0, int dim = 3);

}  // namespace backflow
