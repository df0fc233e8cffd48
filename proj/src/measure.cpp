#include "backflow/measure.hpp"

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>

#include "backflow/errors.hpp"

namespace backflow {

namespace {

constexpr int kLambdaDim = 3;

Matrix lift(const DensityMatrix& rho) {
  if (rho.dim() >= kLambdaDim) return rho.matrix();
  Matrix m = Matrix::Zero(kLambdaDim, kLambdaDim);
  m.topLeftCorner(rho.dim(), rho.dim()) = rho.matrix();
  return m;
}

// Closed-form map applied to a fixed-size 3x3 difference. Same entries as
// apply_lambda_map, without heap traffic.
double lambda_distance3(const MapPoint& p, const Eigen::Matrix3cd& delta) {
  Eigen::Matrix3cd m = delta;
  const Complex aa = delta(0, 0);
  m(0, 0) = std::norm(p.f) * aa;
  m(0, 1) *= p.f;
  m(0, 2) *= p.f;
  m(1, 0) *= std::conj(p.f);
  m(2, 0) *= std::conj(p.f);
  m(1, 1) += p.g1 * aa;
  m(2, 2) += p.g2 * aa;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(m, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

RngStream class_stream(std::uint64_t seed, std::uint64_t klass, std::uint64_t index) {
  return RngStream(seed).split(klass).split(index);
}

constexpr std::uint64_t kPureClass = 0;
constexpr std::uint64_t kMixedClass = 1;

std::pair<Vector, Vector> orthonormal_pair(const double* x, int dim) {
  Vector z1(dim);
  Vector z2(dim);
  for (int i = 0; i < dim; ++i) {
    z1(i) = Complex(x[2 * i], x[2 * i + 1]);
    z2(i) = Complex(x[2 * dim + 2 * i], x[2 * dim + 2 * i + 1]);
  }
  const double n1 = z1.norm();
  if (n1 < 1e-12) return {};
  Vector u = z1 / n1;
  Vector v = z2 - u.dot(z2) * u;
  const double n2 = v.norm();
  if (n2 < 1e-12) return {};
  return {u, v / n2};
}

struct RefineContext {
  const DynamicsModel* model;
  int dim;
};

double refine_objective(const gsl_vector* x, void* params) {
  const auto* ctx = static_cast<const RefineContext*>(params);
  auto [u, v] = orthonormal_pair(x->data, ctx->dim);
  if (u.size() == 0) return 0.0;
  return -pair_backflow(*ctx->model, DensityMatrix::pure(u), DensityMatrix::pure(v));
}

struct RefineOutcome {
  double value;
  Vector u;
  Vector v;
};

RefineOutcome refine_pure_pair(const DynamicsModel& model, int dim, const Vector& u0,
                               const Vector& v0, int iterations) {
  const int n = 4 * dim;
  RefineContext ctx{&model, dim};
  gsl_multimin_function fn{&refine_objective, static_cast<std::size_t>(n), &ctx};

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n),
                                                             &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n),
                                                                &gsl_vector_free);
  for (int i = 0; i < dim; ++i) {
    gsl_vector_set(x.get(), 2 * i, u0(i).real());
    gsl_vector_set(x.get(), 2 * i + 1, u0(i).imag());
    gsl_vector_set(x.get(), 2 * dim + 2 * i, v0(i).real());
    gsl_vector_set(x.get(), 2 * dim + 2 * i + 1, v0(i).imag());
  }
  gsl_vector_set_all(step.get(), 0.1);

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
      &gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get());
  for (int it = 0; it < iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), 1e-8) ==
        GSL_SUCCESS) {
      break;
    }
  }
  auto [u, v] = orthonormal_pair(gsl_multimin_fminimizer_x(solver.get())->data, dim);
  if (u.size() == 0) return {0.0, u0, v0};
  return {-gsl_multimin_fminimizer_minimum(solver.get()), u, v};
}

}  // namespace

DynamicsModel DynamicsModel::build(RateFunctions rates, std::vector<double> grid,
                                   Engine engine, double tol_cpt) {
  MapCoefficients coeffs = lambda_map_coefficients(rates, grid, tol_cpt);
  return DynamicsModel(std::move(rates), std::move(coeffs), engine);
}

std::vector<Matrix> DynamicsModel::evolve_operator(const Matrix& op) const {
  if (engine_ == Engine::Integrator) return propagate_operator(rates_, op, coeffs_.grid);
  std::vector<Matrix> out;
  out.reserve(coeffs_.size());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    out.push_back(apply_lambda_map(coeffs_.at(k), op));
  }
  return out;
}

double TraceDistanceTrajectory::backflow() const {
  double total = 0.0;
  for (std::size_t k = 1; k < distances.size(); ++k) {
    total += std::max(0.0, distances[k] - distances[k - 1]);
  }
  return total;
}

TraceDistanceTrajectory make_trajectory(std::vector<double> grid,
                                        std::vector<double> distances) {
  const std::size_t n = distances.size();
  std::vector<double> sigma(n, 0.0);
  if (n >= 2) {
    sigma[0] = (distances[1] - distances[0]) / (grid[1] - grid[0]);
    sigma[n - 1] = (distances[n - 1] - distances[n - 2]) / (grid[n - 1] - grid[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      sigma[k] = (distances[k + 1] - distances[k - 1]) / (grid[k + 1] - grid[k - 1]);
    }
  }
  return TraceDistanceTrajectory{std::move(grid), std::move(distances), std::move(sigma)};
}

TraceDistanceTrajectory trace_distance_trajectory(const DynamicsModel& model,
                                                  const DensityMatrix& rho1,
                                                  const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(rho1.dim()) + " vs " + std::to_string(rho2.dim()));
  }
  const auto& coeffs = model.coefficients();
  std::vector<double> distances(coeffs.size());

  const Matrix first = lift(rho1);
  const Matrix second = lift(rho2);
  if (model.engine() == Engine::ClosedForm && first.rows() == kLambdaDim) {
    const Eigen::Matrix3cd delta = first - second;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      distances[k] = std::clamp(lambda_distance3(coeffs.at(k), delta), 0.0, 1.0);
    }
  } else {
    const std::vector<Matrix> a = model.evolve_operator(first);
    const std::vector<Matrix> b = model.evolve_operator(second);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      distances[k] = std::clamp(half_trace_norm(a[k] - b[k]), 0.0, 1.0);
    }
  }
  return make_trajectory(coeffs.grid, std::move(distances));
}

double sigma_at(const TraceDistanceTrajectory& traj, std::size_t k) {
  if (k >= traj.sigma.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "grid index " + std::to_string(k) +
                                                " of " + std::to_string(traj.sigma.size()));
  }
  return traj.sigma[k];
}

double backflow(const TraceDistanceTrajectory& traj) { return traj.backflow(); }

double pair_backflow(const DynamicsModel& model, const DensityMatrix& rho1,
                     const DensityMatrix& rho2) {
  return trace_distance_trajectory(model, rho1, rho2).backflow();
}

std::optional<NamedPair> named_pair(const std::string& name) {
  const DensityMatrix excited = DensityMatrix::diagonal({1.0, 0.0, 0.0});
  if (name == "mpair") {
    return NamedPair{name, excited, DensityMatrix::diagonal({0.0, 0.5, 0.5})};
  }
  if (name == "pure-ab") {
    return NamedPair{name, excited, DensityMatrix::diagonal({0.0, 1.0, 0.0})};
  }
  if (name == "pure-a-plus") {
    Vector plus(3);
    plus << 0.0, 1.0, 1.0;
    return NamedPair{name, excited, DensityMatrix::pure(plus)};
  }
  return std::nullopt;
}

std::vector<std::string> named_pair_names() { return {"mpair", "pure-ab", "pure-a-plus"}; }

int resolve_worker_count(int requested) {
  int workers = requested > 0 ? requested
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("BACKFLOW_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) workers = std::min<long>(workers, cap);
  }
  return std::max(1, workers);
}

std::vector<double> parallel_evaluate(std::size_t n, int workers,
                                      const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(n, 0.0);
  const std::size_t count = std::min<std::size_t>(std::max(1, workers), std::max<std::size_t>(n, 1));
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (std::size_t w = 0; w < count; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<double> sample_pure_backflows(const DynamicsModel& model, long n_samples,
                                          std::uint64_t seed, int threads, int dim) {
  if (n_samples < 0) throw Error(ErrorCode::ValidationError, "sample count must be >= 0");
  return parallel_evaluate(static_cast<std::size_t>(n_samples), resolve_worker_count(threads),
                           [&](std::size_t i) {
                             RngStream rng = class_stream(seed, kPureClass, i);
                             auto [a, b] = sample_pure_orthogonal_pair(dim, rng);
                             return pair_backflow(model, a, b);
                           });
}

MeasureResult estimate_measure(const DynamicsModel& model, const MeasureConfig& config,
                               std::uint64_t seed) {
  if (config.dim < 2) throw Error(ErrorCode::BadDimension, "measure needs dim >= 2");
  if (config.pure_samples < 0 || config.mixed_samples < 0) {
    throw Error(ErrorCode::ValidationError, "sample counts must be >= 0");
  }
  const int workers = resolve_worker_count(config.threads);

  struct Best {
    double value = -1.0;
    std::string klass;
    std::string name;
    std::optional<DensityMatrix> first;
    std::optional<DensityMatrix> second;
  } best;
  auto offer = [&](double value, const std::string& klass, const std::string& name,
                   const DensityMatrix& a, const DensityMatrix& b) {
    if (value > best.value) best = Best{value, klass, name, a, b};
  };

  std::vector<CandidateClassBest> breakdown;
  long evaluated = 0;

  const std::vector<double> pure =
      sample_pure_backflows(model, config.pure_samples, seed, workers, config.dim);
  if (!pure.empty()) {
    const auto it = std::max_element(pure.begin(), pure.end());
    const std::size_t idx = static_cast<std::size_t>(it - pure.begin());
    RngStream rng = class_stream(seed, kPureClass, idx);
    auto [a, b] = sample_pure_orthogonal_pair(config.dim, rng);
    offer(*it, "pure", "pure#" + std::to_string(idx), a, b);
    breakdown.push_back({"pure", static_cast<long>(pure.size()), *it});
    evaluated += static_cast<long>(pure.size());

    if (config.refine) {
      RefineOutcome r = refine_pure_pair(model, config.dim, a.eigenvectors().col(0),
                                         b.eigenvectors().col(0), config.refine_iterations);
      offer(r.value, "refined_pure", "refined pure#" + std::to_string(idx),
            DensityMatrix::pure(r.u), DensityMatrix::pure(r.v));
      breakdown.push_back({"refined_pure", 1, r.value});
    }
  }

  const std::vector<double> mixed = parallel_evaluate(
      static_cast<std::size_t>(config.mixed_samples), workers, [&](std::size_t i) {
        RngStream rng = class_stream(seed, kMixedClass, i);
        auto [a, b] = sample_orthogonal_mixed_pair(config.dim, rng);
        return pair_backflow(model, a, b);
      });
  if (!mixed.empty()) {
    const auto it = std::max_element(mixed.begin(), mixed.end());
    const std::size_t idx = static_cast<std::size_t>(it - mixed.begin());
    RngStream rng = class_stream(seed, kMixedClass, idx);
    auto [a, b] = sample_orthogonal_mixed_pair(config.dim, rng);
    offer(*it, "mixed", "mixed#" + std::to_string(idx), a, b);
    breakdown.push_back({"mixed", static_cast<long>(mixed.size()), *it});
    evaluated += static_cast<long>(mixed.size());
  }

  if (!config.explicit_pairs.empty()) {
    CandidateClassBest entry{"explicit", 0, 0.0};
    for (const NamedPair& pair : config.explicit_pairs) {
      RescaledPair orth = rescale_pair(pair.first, pair.second);
      const double value = pair_backflow(model, orth.first, orth.second);
      offer(value, "explicit", pair.name, orth.first, orth.second);
      entry.best = std::max(entry.best, value);
      ++entry.evaluated;
    }
    evaluated += entry.evaluated;
    breakdown.push_back(entry);
  }

  if (!best.first) throw Error(ErrorCode::ValidationError, "no candidate pairs to evaluate");
  TraceDistanceTrajectory traj = trace_distance_trajectory(model, *best.first, *best.second);
  return MeasureResult{traj.backflow(), best.klass,       best.name,
                       *best.first,     *best.second,     std::move(traj),
                       evaluated,       std::move(breakdown), seed};
}

BackflowHistogram histogram_backflow(const DynamicsModel& model, long n_samples, int bins,
                                     std::uint64_t seed, int threads, int dim) {
  if (n_samples < 1) throw Error(ErrorCode::ValidationError, "samples must be >= 1");
  if (bins < 1) throw Error(ErrorCode::ValidationError, "bins must be >= 1");
  const std::vector<double> values = sample_pure_backflows(model, n_samples, seed, threads, dim);

  BackflowHistogram h;
  h.n_samples = n_samples;
  h.seed = seed;
  h.max_sampled = *std::max_element(values.begin(), values.end());
  const NamedPair ref = *named_pair("mpair");
  h.reference_value = pair_backflow(model, ref.first, ref.second);

  double upper = std::max(h.max_sampled, h.reference_value);
  if (!(upper > 0.0)) upper = 1.0;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.bin_edges[b] = upper * b / bins;
  h.bin_edges.back() = upper;

  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    const auto idx = static_cast<long>(std::floor(std::max(v, 0.0) / upper * bins));
    ++h.counts[static_cast<std::size_t>(std::clamp<long>(idx, 0, bins - 1))];
  }
  h.probabilities.resize(h.counts.size());
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    h.probabilities[b] = static_cast<double>(h.counts[b]) / static_cast<double>(n_samples);
  }
  return h;
}

}  // namespace backflow
