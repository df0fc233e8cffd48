#include "backflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "backflow/errors.hpp"
#include "backflow/translation.hpp"

namespace backflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Accumulates one property. Upper checks require every observation <= tol;
// lower checks require every observation > tol.
class Check {
 public:
  enum class Kind { Upper, Lower };

  Check(std::string suite, std::string name, double tol, Kind kind = Kind::Upper)
      : kind_(kind) {
    r_.suite = std::move(suite);
    r_.name = std::move(name);
    r_.tolerance = tol;
    r_.worst = kind == Kind::Upper ? 0.0 : std::numeric_limits<double>::infinity();
  }

  void observe(double value) {
    if (kind_ == Kind::Upper) {
      if (!(value <= r_.worst)) r_.worst = value;
      if (!(value <= r_.tolerance)) r_.passed = false;
    } else {
      if (!(value >= r_.worst)) r_.worst = value;
      if (!(value > r_.tolerance)) r_.passed = false;
    }
  }

  void fail(const std::string& why) {
    r_.passed = false;
    if (r_.detail.empty()) r_.detail = why;
  }

  void trial() { ++r_.trials; }

  PropertyResult done() {
    if (r_.trials == 0) fail("no trials ran");
    return r_;
  }

 private:
  Kind kind_;
  PropertyResult r_;
};

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

DensityMatrix conjugate(const Matrix& u, const DensityMatrix& rho) {
  return DensityMatrix::make(u * rho.matrix() * u.adjoint());
}

DynamicsModel reference_model(int grid_steps) {
  return DynamicsModel::build(RateFunctions::sinusoidal(0.03, 1.0),
                              uniform_grid(kTwoPi, grid_steps));
}

RngStream stream(std::uint64_t seed, std::uint64_t suite, std::uint64_t property) {
  return RngStream(seed).split(1000 + suite).split(property);
}

}  // namespace

std::pair<DensityMatrix, DensityMatrix> sample_non_orthogonal_pair(int dim, RngStream& rng) {
  for (;;) {
    DensityMatrix a = sample_random_state(dim, rng.uniform_int(1, dim), rng);
    DensityMatrix b = sample_random_state(dim, rng.uniform_int(1, dim), rng);
    const double d = trace_distance(a, b);
    if (d > 1e-6 && d < 1.0 - 1e-6) return {std::move(a), std::move(b)};
  }
}

std::vector<PropertyResult> statespace_properties(const VerifyConfig& config,
                                                  std::uint64_t seed) {
  const std::string suite = "statespace";
  std::vector<PropertyResult> out;
  const int trials = config.trials;

  {
    Check symmetry(suite, "metric_symmetry_exact", 0.0);
    Check identity(suite, "metric_identity", 0.0);
    Check triangle(suite, "metric_triangle_inequality", 1e-12);
    RngStream rng = stream(seed, 0, 0);
    for (int dim : config.dims) {
      for (int t = 0; t < std::max(trials, 200); ++t) {
        const DensityMatrix a = sample_random_state(dim, rng.uniform_int(1, dim), rng);
        const DensityMatrix b = sample_random_state(dim, rng.uniform_int(1, dim), rng);
        const DensityMatrix c = sample_random_state(dim, rng.uniform_int(1, dim), rng);
        symmetry.trial();
        identity.trial();
        triangle.trial();
        symmetry.observe(std::abs(trace_distance(a, b) - trace_distance(b, a)));
        identity.observe(trace_distance(a, a));
        triangle.observe(trace_distance(a, c) - trace_distance(a, b) - trace_distance(b, c));
      }
    }
    out.push_back(symmetry.done());
    out.push_back(identity.done());
    out.push_back(triangle.done());
  }
  {
    Check check(suite, "unitary_invariance", 1e-10);
    RngStream rng = stream(seed, 0, 1);
    for (int dim : config.dims) {
      for (int t = 0; t < trials; ++t) {
        const DensityMatrix a = sample_random_state(dim, rng.uniform_int(1, dim), rng);
        const DensityMatrix b = sample_random_state(dim, rng.uniform_int(1, dim), rng);
        const Matrix u = sample_haar_unitary(dim, rng);
        check.trial();
        check.observe(std::abs(trace_distance(conjugate(u, a), conjugate(u, b)) -
                               trace_distance(a, b)));
      }
    }
    out.push_back(check.done());
  }
  {
    Check recon(suite, "jordan_hahn_reconstruction", 1e-12);
    Check weight(suite, "jordan_hahn_weight_is_distance", 1e-10);
    Check parts(suite, "jordan_hahn_parts_positive_orthogonal", Tolerances{}.psd);
    Check rescale(suite, "rescale_unit_distance", 1e-10);
    Check diff(suite, "rescale_difference_law", 1e-12);
    RngStream rng = stream(seed, 0, 2);
    for (int dim : config.dims) {
      for (int t = 0; t < trials; ++t) {
        auto [a, b] = sample_non_orthogonal_pair(dim, rng);
        const JordanHahnParts jh = jordan_hahn(a, b);
        const Matrix delta = a.matrix() - b.matrix();
        const double d = trace_distance(a, b);
        recon.trial();
        weight.trial();
        parts.trial();
        recon.observe(max_abs(delta - (jh.positive.matrix() - jh.negative.matrix())));
        weight.observe(std::max(std::abs(jh.positive.trace() - d),
                                std::abs(jh.negative.trace() - d)));
        parts.observe(std::max({-hermitian_eigenvalues(jh.positive.matrix()).minCoeff(),
                                -hermitian_eigenvalues(jh.negative.matrix()).minCoeff(),
                                (jh.positive.matrix() * jh.negative.matrix()).norm()}));
        const RescaledPair r = rescale_pair(a, b);
        rescale.trial();
        diff.trial();
        rescale.observe(std::abs(trace_distance(r.first, r.second) - 1.0));
        diff.observe(max_abs((r.first.matrix() - r.second.matrix()) - delta / r.lambda));
      }
    }
    out.push_back(recon.done());
    out.push_back(weight.done());
    out.push_back(parts.done());
    out.push_back(rescale.done());
    out.push_back(diff.done());
  }
  {
    Check unit(suite, "orthogonal_pairs_unit_distance", 1e-12);
    Check overlap(suite, "overlapping_supports_below_unit_distance", 1e-8, Check::Kind::Lower);
    Check boundary(suite, "orthogonal_pairs_on_boundary", 0.0);
    RngStream rng = stream(seed, 0, 3);
    for (int dim : config.dims) {
      for (int t = 0; t < trials; ++t) {
        auto [a, b] = t % 2 == 0 ? sample_pure_orthogonal_pair(dim, rng)
                                 : sample_orthogonal_mixed_pair(dim, rng);
        unit.trial();
        unit.observe(std::abs(trace_distance(a, b) - 1.0));
        boundary.trial();
        if (is_orthogonal(a, b) && !(is_boundary(a) && is_boundary(b))) {
          boundary.fail("orthogonal pair with an interior state");
          boundary.observe(1.0);
        }
        const double s = 0.05 + 0.9 * rng.uniform();
        const DensityMatrix mixed = DensityMatrix::make((1.0 - s) * b.matrix() + s * a.matrix());
        overlap.trial();
        overlap.observe(1.0 - trace_distance(a, mixed));
      }
    }
    out.push_back(unit.done());
    out.push_back(overlap.done());
    out.push_back(boundary.done());
  }
  return out;
}

std::vector<PropertyResult> translation_properties(const VerifyConfig& config,
                                                   std::uint64_t seed) {
  const std::string suite = "translation";
  const ShiftFault fault = config.inject_fault ? ShiftFault::FlipShiftSign : ShiftFault::None;
  std::vector<PropertyResult> out;

  {
    Check diff(suite, "translate_preserves_difference", 1e-12);
    Check interior(suite, "translated_states_interior", 0.0, Check::Kind::Lower);
    Check trace(suite, "shift_traceless", 1e-12);
    Check herm(suite, "shift_hermitian", 1e-12);
    Check nonzero(suite, "shift_nonzero", 0.0, Check::Kind::Lower);
    Check bound(suite, "quadratic_bound_positive", 0.0, Check::Kind::Lower);
    RngStream rng = stream(seed, 1, 0);
    for (int dim : config.dims) {
      for (int t = 0; t < config.trials; ++t) {
        auto [a, b] = sample_non_orthogonal_pair(dim, rng);
        diff.trial();
        interior.trial();
        trace.trial();
        herm.trial();
        nonzero.trial();
        bound.trial();
        try {
          const TranslatedPair tp = jointly_translate(a, b, 0.5, fault);
          const Matrix& shift = tp.construction.shift.matrix();
          diff.observe(max_abs((tp.first.matrix() - tp.second.matrix()) -
                               (a.matrix() - b.matrix())));
          interior.observe(std::min(tp.first.min_eigenvalue(), tp.second.min_eigenvalue()));
          if (is_boundary(tp.first) || is_boundary(tp.second)) {
            interior.fail("translated state on the boundary");
          }
          trace.observe(std::abs(shift.trace()));
          herm.observe(hermiticity_defect(shift));
          nonzero.observe(shift.norm());

          const ShiftConstruction& sc = tp.construction;
          const double eps = 0.99 * sc.epsilon_max;
          for (double p : {sc.selection.weight_first, sc.selection.weight_second}) {
            double lowest = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= 1000; ++i) {
              lowest = std::min(lowest, quadratic_bound(std::min(p, 1.0), sc.selection.overlap,
                                                        dim, eps, i / 1000.0));
            }
            bound.observe(lowest);
          }
        } catch (const Error& e) {
          diff.fail(e.what());
          interior.fail(e.what());
          interior.observe(-1.0);
        }
      }
    }
    for (Check* c : {&diff, &interior, &trace, &herm, &nonzero, &bound}) out.push_back(c->done());
  }
  {
    Check reject(suite, "orthogonal_pairs_rejected", 0.0);
    RngStream rng = stream(seed, 1, 1);
    for (int dim : config.dims) {
      for (int t = 0; t < config.trials; ++t) {
        auto [a, b] = t % 2 == 0 ? sample_pure_orthogonal_pair(dim, rng)
                                 : sample_orthogonal_mixed_pair(dim, rng);
        reject.trial();
        if (is_jointly_translatable(a, b)) reject.fail("orthogonal pair reported translatable");
        try {
          jointly_translate(a, b, 0.5, fault);
          reject.fail("orthogonal pair was translated");
          reject.observe(1.0);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::OrthogonalPair) reject.fail(e.what());
        }
      }
    }
    out.push_back(reject.done());
  }
  {
    Check mono(suite, "epsilon_max_monotone_in_weight", 0.0, Check::Kind::Lower);
    for (int dim : config.dims) {
      for (double alpha : {0.1, 0.5, 1.0 / std::numbers::sqrt2, 1.0}) {
        for (int i = 1; i < 100; ++i) {
          mono.trial();
          mono.observe(epsilon_upper_bound(alpha, (i + 1) / 100.0, dim) -
                       epsilon_upper_bound(alpha, i / 100.0, dim));
        }
      }
    }
    out.push_back(mono.done());
  }
  return out;
}

std::vector<PropertyResult> dynamics_properties(const DynamicsModel& model,
                                                const VerifyConfig& /*config*/, int grid_steps,
                                                std::uint64_t seed) {
  const std::string suite = "dynamics";
  std::vector<PropertyResult> out;
  const DynamicsModel reference = reference_model(grid_steps);
  const MapCoefficients& rc = reference.coefficients();

  {
    Check cpt(suite, "cpt_identity", 1e-8);
    Check positive(suite, "cpt_positive_g", -1e-10, Check::Kind::Lower);
    const CptReport r = validate_cpt(model.coefficients(), 1e-8);
    cpt.trial();
    positive.trial();
    cpt.observe(r.worst_identity);
    positive.observe(r.min_g);
    out.push_back(cpt.done());
    out.push_back(positive.done());
  }
  {
    Check oracle(suite, "closed_form_oracle", 1e-7);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const double t = rc.grid[k];
      const double decay = 0.03 * (1.0 - std::cos(t));
      oracle.trial();
      oracle.observe(std::max({std::abs(rc.decay1[k] - decay), std::abs(rc.decay2[k] - decay),
                               std::abs(rc.g1[k] - 0.5 * (1.0 - std::exp(-2.0 * decay))),
                               std::abs(rc.g2[k] - 0.5 * (1.0 - std::exp(-2.0 * decay))),
                               std::abs(std::norm(rc.f[k]) - std::exp(-2.0 * decay))}));
    }
    out.push_back(oracle.done());
  }
  {
    Check conv(suite, "quadrature_step_halving", 1e-6);
    const MapCoefficients fine = lambda_map_coefficients(RateFunctions::sinusoidal(0.03, 1.0),
                                                         uniform_grid(kTwoPi, 2 * grid_steps));
    for (const double t_frac : {0.25, 0.5, 0.75, 1.0}) {
      const auto k = static_cast<std::size_t>(std::lround(t_frac * grid_steps));
      const std::size_t kf = 2 * k;
      conv.trial();
      conv.observe(std::max({std::abs(rc.g1[k] - fine.g1[kf]), std::abs(rc.g2[k] - fine.g2[kf]),
                             std::abs(rc.decay1[k] - fine.decay1[kf]),
                             std::abs(rc.decay2[k] - fine.decay2[kf])}));
    }
    out.push_back(conv.done());
  }
  {
    Check period(suite, "period_return_identity", 1e-6);
    RngStream rng = stream(seed, 2, 0);
    const MapPoint last = rc.at(rc.size() - 1);
    for (int t = 0; t < 50; ++t) {
      const DensityMatrix rho = sample_random_state(3, rng.uniform_int(1, 3), rng);
      period.trial();
      period.observe(max_abs(apply_lambda_map(last, rho).matrix() - rho.matrix()));
    }
    out.push_back(period.done());
  }
  {
    Check trace(suite, "trace_preservation", 1e-9);
    // The unnormalized map inherits the quadrature defect of the CPT identity.
    Check drift(suite, "raw_map_trace_drift", kDefaultCptTolerance);
    Check cross(suite, "integrator_matches_closed_form", 1e-6);
    Check contraction(suite, "distance_never_exceeds_initial", 1e-9);
    RngStream rng = stream(seed, 2, 1);
    const MapCoefficients& mc = model.coefficients();
    for (int t = 0; t < 20; ++t) {
      const DensityMatrix rho = sample_random_state(3, rng.uniform_int(1, 3), rng);
      drift.trial();
      for (std::size_t k = 0; k < mc.size(); ++k) {
        drift.observe(std::abs(apply_lambda_map(mc.at(k), rho.matrix()).trace() - 1.0));
      }
      trace.trial();
      cross.trial();
      try {
        const StateTrajectory closed = evolve(mc, rho);
        for (const DensityMatrix& s : closed.states) {
          trace.observe(std::abs(s.matrix().trace() - 1.0));
        }
        const StateTrajectory direct = lindblad_integrate(model.rates(), rho, mc.grid);
        for (std::size_t k = 0; k < mc.size(); ++k) {
          cross.observe(max_abs(closed.states[k].matrix() - direct.states[k].matrix()));
        }
      } catch (const Error& e) {
        trace.fail(e.what());
        cross.fail(e.what());
      }
      const DensityMatrix other = sample_random_state(3, rng.uniform_int(1, 3), rng);
      const TraceDistanceTrajectory traj = trace_distance_trajectory(model, rho, other);
      contraction.trial();
      const double initial = trace_distance(rho, other);
      for (double d : traj.distances) contraction.observe(d - initial);
    }
    out.push_back(trace.done());
    out.push_back(drift.done());
    out.push_back(cross.done());
    out.push_back(contraction.done());
  }
  return out;
}

std::vector<PropertyResult> measure_properties(const DynamicsModel& model,
                                               const VerifyConfig& config, int grid_steps,
                                               std::uint64_t seed) {
  const std::string suite = "measure";
  const ShiftFault fault = config.inject_fault ? ShiftFault::FlipShiftSign : ShiftFault::None;
  std::vector<PropertyResult> out;

  {
    Check scaling(suite, "rescaled_pair_backflow_scales", 1e-8);
    Check lambda_range(suite, "rescale_lambda_in_unit_interval", 0.0);
    RngStream rng = stream(seed, 3, 0);
    for (int dim : config.dims) {
      for (int t = 0; t < config.trials; ++t) {
        auto [a, b] = sample_non_orthogonal_pair(dim, rng);
        const RescaledPair r = rescale_pair(a, b);
        scaling.trial();
        lambda_range.trial();
        if (!(r.lambda > 0.0 && r.lambda < 1.0)) lambda_range.fail("lambda outside (0, 1)");
        const double original = pair_backflow(model, a, b);
        const double rescaled = pair_backflow(model, r.first, r.second);
        scaling.observe(std::abs(rescaled - original / r.lambda));
      }
    }
    out.push_back(scaling.done());
    out.push_back(lambda_range.done());
  }
  {
    Check stretch(suite, "interior_stretch_backflow_scales", 1e-8);
    RngStream rng = stream(seed, 3, 1);
    for (int dim : config.dims) {
      for (int t = 0; t < config.trials; ++t) {
        const DensityMatrix a = sample_random_state(dim, rng.uniform_int(1, dim), rng);
        const DensityMatrix b = sample_random_state(dim, dim, rng);
        // Largest s with b + s (b - a) >= 0, via b^{-1/2} (b - a) b^{-1/2}.
        const RealVector inv_sqrt = b.eigenvalues().cwiseSqrt().cwiseInverse();
        const Matrix w = b.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() *
                         b.eigenvectors().adjoint();
        const double lowest =
            hermitian_eigenvalues(w * (b.matrix() - a.matrix()) * w).minCoeff();
        const double s = lowest < 0.0 ? 0.5 / -lowest : 1.0;
        const double lambda = 1.0 + s;
        const DensityMatrix c =
            DensityMatrix::make((1.0 - lambda) * a.matrix() + lambda * b.matrix());
        stretch.trial();
        stretch.observe(std::abs(pair_backflow(model, a, c) - lambda * pair_backflow(model, a, b)));
      }
    }
    out.push_back(stretch.done());
  }
  {
    Check invariance(suite, "translation_preserves_trajectory", 1e-10);
    RngStream rng = stream(seed, 3, 2);
    for (int dim : config.dims) {
      for (int t = 0; t < config.trials; ++t) {
        auto [a, b] = sample_non_orthogonal_pair(dim, rng);
        invariance.trial();
        try {
          const TranslatedPair tp = jointly_translate(a, b, 0.5, fault);
          const auto before = trace_distance_trajectory(model, a, b);
          const auto after = trace_distance_trajectory(model, tp.first, tp.second);
          for (std::size_t k = 0; k < before.distances.size(); ++k) {
            invariance.observe(std::abs(before.distances[k] - after.distances[k]));
          }
        } catch (const Error& e) {
          invariance.fail(e.what());
        }
      }
    }
    out.push_back(invariance.done());
  }
  {
    Check bounds(suite, "backflow_within_unit_interval", 0.0);
    RngStream rng = stream(seed, 3, 3);
    for (int t = 0; t < config.trials; ++t) {
      auto [a, b] = t % 2 == 0 ? sample_pure_orthogonal_pair(3, rng)
                               : sample_orthogonal_mixed_pair(3, rng);
      const double v = pair_backflow(model, a, b);
      bounds.trial();
      bounds.observe(std::max(-v, v - 1.0));
    }
    out.push_back(bounds.done());
  }
  {
    Check conv(suite, "backflow_grid_doubling", 1e-4);
    const DynamicsModel coarse = reference_model(grid_steps);
    const DynamicsModel fine = reference_model(2 * grid_steps);
    RngStream rng = stream(seed, 3, 4);
    std::vector<std::pair<DensityMatrix, DensityMatrix>> pairs;
    for (const std::string& name : named_pair_names()) {
      const NamedPair p = *named_pair(name);
      pairs.emplace_back(p.first, p.second);
    }
    for (int t = 0; t < 10; ++t) pairs.push_back(sample_pure_orthogonal_pair(3, rng));
    for (const auto& [a, b] : pairs) {
      conv.trial();
      conv.observe(std::abs(pair_backflow(coarse, a, b) - pair_backflow(fine, a, b)));
    }
    out.push_back(conv.done());
  }
  {
    Check null(suite, "markovian_semigroup_null_measure", 1e-10);
    const DynamicsModel markov =
        DynamicsModel::build(RateFunctions::constant(0.03), uniform_grid(kTwoPi, grid_steps));
    MeasureConfig mc;
    mc.pure_samples = 50;
    mc.mixed_samples = 50;
    const MeasureResult r = estimate_measure(markov, mc, seed);
    null.trial();
    null.observe(r.estimate);
    out.push_back(null.done());
  }
  return out;
}

std::vector<PropertyResult> run_verification(const RunConfig& config) {
  const DynamicsModel model = make_model(config);
  std::vector<PropertyResult> all = statespace_properties(config.verify, config.seed);
  for (auto&& suite : {translation_properties(config.verify, config.seed),
                       dynamics_properties(model, config.verify, config.grid_steps, config.seed),
                       measure_properties(model, config.verify, config.grid_steps, config.seed)}) {
    all.insert(all.end(), suite.begin(), suite.end());
  }
  return all;
}

}  // namespace backflow
