#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "backflow/statespace.hpp"

namespace backflow {

/// Piecewise-linear interpolant through (time, value) samples.
class TabulatedFunction {
 public:
  TabulatedFunction(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;
  double t_min() const { return times_.front(); }
  double t_max() const { return times_.back(); }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Two-column CSV (time, value). A non-numeric first line is taken as a
/// header; blank lines and lines starting with '#' are skipped.
TabulatedFunction load_rate_csv(const std::string& path);

/// Decay rates gamma_i(t) and Lamb shifts lambda_i(t) of the Lambda-system.
struct RateFunctions {
  using Fn = std::function<double(double)>;

  Fn gamma1;
  Fn gamma2;
  Fn lambda1;
  Fn lambda2;
  /// Rates are defined on [0, horizon].
  double horizon = std::numeric_limits<double>::infinity();
  std::string description;

  /// gamma_1 = gamma_2 = amplitude * sin(frequency * t), lambda_i = 0.
  static RateFunctions sinusoidal(double amplitude = 0.03, double frequency = 1.0);
  /// Time-independent rates: a Markovian semigroup.
  static RateFunctions constant(double gamma, double lamb = 0.0);
  static RateFunctions zero();
  static RateFunctions tabulated(TabulatedFunction gamma1, TabulatedFunction gamma2,
                                 TabulatedFunction lambda1, TabulatedFunction lambda2);
};

/// Uniform grid 0 = t_0 < ... < t_steps = t_max.
std::vector<double> uniform_grid(double t_max, int steps);

/// Map coefficients at a single time.
struct MapPoint {
  Complex f{1.0, 0.0};
  double g1 = 0.0;
  double g2 = 0.0;
};

struct MapCoefficients {
  std::vector<double> grid;
  std::vector<Complex> f;
  std::vector<double> g1;
  std::vector<double> g2;
  std::vector<double> decay1;  // D_1(t) = int_0^t gamma_1
  std::vector<double> decay2;
  std::vector<double> shift1;  // L_1(t) = int_0^t lambda_1
  std::vector<double> shift2;

  std::size_t size() const { return grid.size(); }
  MapPoint at(std::size_t k) const { return MapPoint{f[k], g1[k], g2[k]}; }
};

struct CptReport {
  bool valid = true;
  double worst_identity = 0.0;  // max |g1 + g2 + |f|^2 - 1|
  double worst_identity_time = 0.0;
  double min_g = 0.0;  // min over grid of min(g1, g2)
  double min_g_time = 0.0;
};

struct StateTrajectory {
  std::vector<double> grid;
  std::vector<DensityMatrix> states;
};

inline constexpr double kDefaultCptTolerance = 1e-8;

/// Cumulative trapezoidal quadrature of D_i, L_i and g_i on `grid`. Throws
/// QuadratureFailure on non-finite values and CptViolation when the result
/// is not a valid channel at some grid point.
MapCoefficients lambda_map_coefficients(const RateFunctions& rates,
                                        const std::vector<double>& grid,
                                        double tol_cpt = kDefaultCptTolerance);

CptReport validate_cpt(const MapCoefficients& coeffs,
                       double tol_cpt = kDefaultCptTolerance);

/// The closed-form Lambda-system map on a 3x3 state in the basis (a, b, c).
DensityMatrix apply_lambda_map(const MapPoint& point, const DensityMatrix& rho);

/// Same map acting linearly on any operator of dimension >= 3. Levels beyond
/// (a, b, c) are spectators: coherences with |a> pick up f, everything else
/// is left alone, exactly as the master equation prescribes for uncoupled
/// levels.
Matrix apply_lambda_map(const MapPoint& point, const Matrix& op);

StateTrajectory evolve(const MapCoefficients& coeffs, const DensityMatrix& rho0);

/// Right-hand side of the master equation at time t, for operators of
/// dimension >= 3 (extra levels are spectators).
Matrix lambda_generator(const RateFunctions& rates, double t, const Matrix& rho);

/// Unvalidated RK4 propagation of an arbitrary operator across `grid`.
std::vector<Matrix> propagate_operator(const RateFunctions& rates, const Matrix& op0,
                                       const std::vector<double>& grid);

/// RK4 integration of the master equation for a 3x3 state with
/// re-symmetrization and trace renormalization after every step. Throws
/// IntegratorDiverged or PositivityLost (min eigenvalue < -10 tol.psd).
StateTrajectory lindblad_integrate(const RateFunctions& rates, const DensityMatrix& rho0,
                                   const std::vector<double>& grid,
                                   const Tolerances& tol = {});

}  // namespace backflow
