// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "backflow/commands.hpp"
#include "backflow/config.hpp"
#include "backflow/dynamics.hpp"
#include "backflow/errors.hpp"
#include "backflow/measure.hpp"
#include "backflow/statespace.hpp"
#include "backflow/translation.hpp"
#include "backflow/verify.hpp"

using namespace backflow;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSteps = 2000;
constexpr std::uint64_t kSeed = 20240601;

// Tolerances and limits.
constexpr double kTolCptIdentity = 1e-8;
constexpr double kTolCptMinG = -1e-10;
constexpr double kTolClosedForm = 1e-7;
constexpr double kTolMpairBackflow = 1e-5;
constexpr double kTolMpairTrajectory = 1e-6;
constexpr double kMpairReference = 0.1130796;
constexpr long kGapSamples = 10000;
constexpr double kTolMarkovIncrement = 1e-10;
constexpr double kTolRescale = 1e-8;
constexpr double kTolDifference = 1e-12;
constexpr double kTolTrajectory = 1e-10;
constexpr double kTolIntegrator = 1e-6;
constexpr double kTolPeriod = 1e-6;
constexpr long kDeterminismSamples = 2000;

struct Outcome {
  bool passed;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

const DynamicsModel& reference_model() {
  static const DynamicsModel m =
      DynamicsModel::build(RateFunctions::sinusoidal(0.03, 1.0), uniform_grid(2.0 * kPi, kSteps));
  return m;
}

Outcome cpt_validity() {
  const MapCoefficients c =
      lambda_map_coefficients(RateFunctions::sinusoidal(0.03, 1.0), uniform_grid(2.0 * kPi, kSteps));
  const CptReport r = validate_cpt(c);
  const bool ok = r.worst_identity <= kTolCptIdentity && r.min_g >= kTolCptMinG;
  return {ok, fmt("max|g1+g2+|f|^2-1|=%.3e min g=%.3e", r.worst_identity, r.min_g)};
}

// D_i(pi) = 0.03 (1 - cos pi) = 0.06.
Outcome closed_form_oracle() {
  const MapCoefficients c =
      lambda_map_coefficients(RateFunctions::sinusoidal(0.03, 1.0), uniform_grid(2.0 * kPi, kSteps));
  const MapPoint p = c.at(kSteps / 2);
  const double f_exact = std::exp(-0.06);
  const double g_exact = 0.5 * (1.0 - std::exp(-0.12));
  const double err = std::max({std::abs(std::abs(p.f) - f_exact), std::abs(p.g1 - g_exact),
                               std::abs(p.g2 - g_exact)});
  return {err <= kTolClosedForm, fmt("|f(pi)|=%.10f g(pi)=%.10f max err=%.3e", std::abs(p.f), p.g1, err)};
}

Outcome mixed_pair_backflow() {
  const NamedPair pair = *named_pair("mpair");
  const TraceDistanceTrajectory traj =
      trace_distance_trajectory(reference_model(), pair.first, pair.second);
  const double exact = 1.0 - std::exp(-0.12);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    worst = std::max(worst,
                     std::abs(traj.distances[k] - std::exp(-0.06 * (1.0 - std::cos(traj.grid[k])))));
  }
  const double err = std::abs(traj.backflow() - exact);
  return {err <= kTolMpairBackflow && worst <= kTolMpairTrajectory,
          fmt("backflow=%.9f (err %.2e) max trajectory err=%.2e", traj.backflow(), err, worst)};
}

Outcome pure_pair_gap() {
  const std::vector<double> values = sample_pure_backflows(reference_model(), kGapSamples, kSeed);
  double max_sampled = 0.0;
  long at_or_above = 0;
  for (double v : values) {
    max_sampled = std::max(max_sampled, v);
    if (!(v < kMpairReference)) ++at_or_above;
  }
  return {at_or_above == 0 && static_cast<long>(values.size()) == kGapSamples,
          fmt("n=%.0f max_sampled=%.6f reference=%.7f", static_cast<double>(values.size()),
              max_sampled, kMpairReference) +
              " violations=" + std::to_string(at_or_above)};
}

Outcome markovian_null() {
  const DynamicsModel model =
      DynamicsModel::build(RateFunctions::constant(0.03), uniform_grid(2.0 * kPi, kSteps));
  double worst = -1.0;
  int candidates = 0;
  auto scan = [&](const DensityMatrix& a, const DensityMatrix& b) {
    const TraceDistanceTrajectory t = trace_distance_trajectory(model, a, b);
    for (std::size_t k = 1; k < t.distances.size(); ++k) {
      worst = std::max(worst, t.distances[k] - t.distances[k - 1]);
    }
    ++candidates;
  };
  const RngStream root(kSeed);
  for (std::uint64_t i = 0; i < 50; ++i) {
    RngStream rng = root.split(0).split(i);
    auto [a, b] = sample_pure_orthogonal_pair(3, rng);
    scan(a, b);
  }
  for (std::uint64_t i = 0; i < 50; ++i) {
    RngStream rng = root.split(1).split(i);
    auto [a, b] = sample_orthogonal_mixed_pair(3, rng);
    scan(a, b);
  }
  return {candidates >= 100 && worst <= kTolMarkovIncrement,
          fmt("candidates=%.0f largest increment=%.3e", candidates, worst)};
}

Outcome rescaling_suite() {
  RngStream rng(kSeed + 6);
  double worst = 0.0;
  int pairs = 0;
  bool lambda_ok = true;
  for (int dim : {2, 3}) {
    for (int t = 0; t < 100; ++t) {
      auto [a, b] = sample_non_orthogonal_pair(dim, rng);
      const RescaledPair r = rescale_pair(a, b);
      const double lam = trace_distance(a, b);
      lambda_ok = lambda_ok && lam > 0.0 && lam < 1.0 && std::abs(r.lambda - lam) <= 1e-12;
      const double original = pair_backflow(reference_model(), a, b);
      const double rescaled = pair_backflow(reference_model(), r.first, r.second);
      worst = std::max(worst, std::abs(rescaled - original / lam));
      ++pairs;
    }
  }
  return {lambda_ok && worst <= kTolRescale,
          fmt("pairs=%.0f max |N(rescaled) - N/lambda|=%.3e", pairs, worst)};
}

Outcome translation_suite() {
  RngStream rng(kSeed + 7);
  double min_eig = 1.0;
  double diff_err = 0.0;
  double traj_err = 0.0;
  int pairs = 0;
  for (int dim : {2, 3, 4}) {
    for (int t = 0; t < 100; ++t) {
      auto [a, b] = sample_non_orthogonal_pair(dim, rng);
      const TranslatedPair tp = jointly_translate(a, b);
      min_eig = std::min({min_eig, tp.first.min_eigenvalue(), tp.second.min_eigenvalue()});
      diff_err = std::max(diff_err, max_abs((tp.first.matrix() - tp.second.matrix()) -
                                            (a.matrix() - b.matrix())));
      const TraceDistanceTrajectory before = trace_distance_trajectory(reference_model(), a, b);
      const TraceDistanceTrajectory after =
          trace_distance_trajectory(reference_model(), tp.first, tp.second);
      for (std::size_t k = 0; k < before.distances.size(); ++k) {
        traj_err = std::max(traj_err, std::abs(before.distances[k] - after.distances[k]));
      }
      ++pairs;
    }
  }
  int rejected = 0;
  for (int dim : {2, 3, 4}) {
    for (int t = 0; t < 20; ++t) {
      auto [a, b] = t % 2 == 0 ? sample_pure_orthogonal_pair(dim, rng)
                               : sample_orthogonal_mixed_pair(dim, rng);
      try {
        jointly_translate(a, b);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::OrthogonalPair) ++rejected;
      }
    }
  }
  const bool ok = min_eig > 0.0 && diff_err <= kTolDifference && traj_err <= kTolTrajectory &&
                  rejected == 60;
  return {ok, fmt("pairs=%.0f min eig=%.3e diff err=%.2e", pairs, min_eig, diff_err) +
                  fmt(" trajectory err=%.2e orthogonal rejected=%.0f/60", traj_err, rejected)};
}

Outcome integrator_cross_validation() {
  const RateFunctions rates = RateFunctions::sinusoidal(0.03, 1.0);
  const std::vector<double> grid = uniform_grid(2.0 * kPi, kSteps);
  const MapCoefficients c = lambda_map_coefficients(rates, grid);
  RngStream rng(kSeed + 8);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix rho = sample_random_state(3, rng.uniform_int(1, 3), rng);
    const StateTrajectory exact = evolve(c, rho);
    const StateTrajectory rk = lindblad_integrate(rates, rho, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      worst = std::max(worst, max_abs(exact.states[k].matrix() - rk.states[k].matrix()));
    }
  }
  return {worst <= kTolIntegrator, fmt("states=20 max entrywise err=%.3e", worst)};
}

Outcome period_return() {
  const MapPoint end = reference_model().coefficients().at(kSteps);
  RngStream rng(kSeed + 9);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix rho = sample_random_state(3, rng.uniform_int(1, 3), rng);
    worst = std::max(worst, max_abs(apply_lambda_map(end, rho).matrix() - rho.matrix()));
  }
  return {worst <= kTolPeriod, fmt("states=50 max |Phi_2pi(rho) - rho|=%.3e", worst)};
}

Outcome determinism() {
  RunConfig config = parse_config(std::nullopt, {{"samples", kDeterminismSamples},
                                                 {"seed", kSeed},
                                                 {"threads", 8}});
  std::vector<std::string> payloads;
  for (const char* threads : {"1", "2", "4"}) {
    ::setenv("BACKFLOW_THREADS", threads, 1);
    const CommandOutcome out = run_command("histogram", config);
    if (out.exit_code != kExitOk) return {false, "histogram failed: " + out.payload};
    payloads.push_back(out.payload);
  }
  ::unsetenv("BACKFLOW_THREADS");
  const bool same = payloads[0] == payloads[1] && payloads[0] == payloads[2];
  return {same, fmt("BACKFLOW_THREADS=1,2,4 n=%.0f csv bytes=%.0f", kDeterminismSamples,
                    static_cast<double>(payloads[0].size())) +
                    (same ? " identical" : " DIFFER")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "CPT validity of the sinusoidal map", 1.0, cpt_validity},
      {2, "closed-form map coefficients at t=pi", 1.0, closed_form_oracle},
      {3, "mixed-pair backflow and trajectory", 1.0, mixed_pair_backflow},
      {4, "pure-pair gap below the mixed pair", 120.0, pure_pair_gap},
      {5, "Markovian null case", 10.0, markovian_null},
      {6, "Jordan-Hahn rescaling suite", 60.0, rescaling_suite},
      {7, "joint translation suite", 60.0, translation_suite},
      {8, "integrator cross-validation", 30.0, integrator_cross_validation},
      {9, "period return", 5.0, period_return},
      {10, "histogram determinism across thread counts", 30.0, determinism},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit_s;
    const bool passed = out.passed && in_time;
    if (!passed) ++failed;
    std::printf("%s [%2d] %s: %s (%.2f s, limit %.0f s%s)\n", passed ? "PASS" : "FAIL", c.id,
                c.title, out.detail.c_str(), secs, c.time_limit_s, in_time ? "" : ", TOO SLOW");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed;
}
