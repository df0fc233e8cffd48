#include "backflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "backflow/errors.hpp"

namespace backflow {

namespace {

constexpr int kA = 0;
constexpr int kB = 1;
constexpr int kC = 2;

void require_lambda_dim(int dim, bool exact) {
  if (exact ? dim != 3 : dim < 3) {
    throw Error(ErrorCode::BadDimension,
                "Lambda-system map needs dimension 3, got " + std::to_string(dim));
  }
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2 || grid.front() != 0.0) {
    throw Error(ErrorCode::ValidationError, "time grid must start at 0 with >= 2 points");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw Error(ErrorCode::ValidationError, "time grid must be strictly increasing");
    }
  }
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& grid,
                                         const std::vector<double>& values) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    out[k] = out[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (values[k] + values[k - 1]);
  }
  return out;
}

std::vector<double> sample(const RateFunctions::Fn& fn, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  std::transform(grid.begin(), grid.end(), out.begin(), fn);
  return out;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TabulatedFunction::TabulatedFunction(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size() || times_.size() < 2) {
    throw Error(ErrorCode::ValidationError, "rate table needs >= 2 (time, value) rows");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) {
      throw Error(ErrorCode::ValidationError, "rate table times must be strictly increasing");
    }
  }
}

double TabulatedFunction::operator()(double t) const {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return (1.0 - w) * values_[lo] + w * values_[hi];
}

TabulatedFunction load_rate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open rate table " + path);
  std::vector<double> times;
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double t = 0.0;
    double v = 0.0;
    if (!(fields >> t >> v)) {
      if (times.empty() && line_no == 1) continue;  // header
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) +
                                             ": expected two numeric columns");
    }
    times.push_back(t);
    values.push_back(v);
  }
  return TabulatedFunction(std::move(times), std::move(values));
}

RateFunctions RateFunctions::sinusoidal(double amplitude, double frequency) {
  auto gamma = [amplitude, frequency](double t) { return amplitude * std::sin(frequency * t); };
  auto none = [](double) { return 0.0; };
  std::ostringstream desc;
  desc << "sinusoidal(amplitude=" << amplitude << ", frequency=" << frequency << ")";
  return RateFunctions{gamma, gamma, none, none,
                       std::numeric_limits<double>::infinity(), desc.str()};
}

RateFunctions RateFunctions::constant(double gamma, double lamb) {
  auto g = [gamma](double) { return gamma; };
  auto l = [lamb](double) { return lamb; };
  std::ostringstream desc;
  desc << "constant(gamma=" << gamma << ", lambda=" << lamb << ")";
  return RateFunctions{g, g, l, l, std::numeric_limits<double>::infinity(), desc.str()};
}

RateFunctions RateFunctions::zero() {
  RateFunctions r = constant(0.0, 0.0);
  r.description = "zero";
  return r;
}

RateFunctions RateFunctions::tabulated(TabulatedFunction gamma1, TabulatedFunction gamma2,
                                       TabulatedFunction lambda1, TabulatedFunction lambda2) {
  double lo = std::max({gamma1.t_min(), gamma2.t_min(), lambda1.t_min(), lambda2.t_min()});
  double hi = std::min({gamma1.t_max(), gamma2.t_max(), lambda1.t_max(), lambda2.t_max()});
  if (lo > 0.0) {
    throw Error(ErrorCode::ValidationError, "rate tables must start at t <= 0");
  }
  return RateFunctions{std::move(gamma1), std::move(gamma2), std::move(lambda1),
                       std::move(lambda2), hi, "tabulated"};
}

std::vector<double> uniform_grid(double t_max, int steps) {
  if (!(t_max > 0.0) || steps < 1) {
    throw Error(ErrorCode::ValidationError, "grid needs t_max > 0 and steps >= 1");
  }
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) grid[k] = t_max * k / steps;
  grid.back() = t_max;
  return grid;
}

MapCoefficients lambda_map_coefficients(const RateFunctions& rates,
                                        const std::vector<double>& grid, double tol_cpt) {
  check_grid(grid);
  if (grid.back() > rates.horizon) {
    throw Error(ErrorCode::ValidationError, "grid extends past the rate horizon");
  }
  MapCoefficients c;
  c.grid = grid;
  const std::vector<double> gamma1 = sample(rates.gamma1, grid);
  const std::vector<double> gamma2 = sample(rates.gamma2, grid);
  c.decay1 = cumulative_trapezoid(grid, gamma1);
  c.decay2 = cumulative_trapezoid(grid, gamma2);
  c.shift1 = cumulative_trapezoid(grid, sample(rates.lambda1, grid));
  c.shift2 = cumulative_trapezoid(grid, sample(rates.lambda2, grid));

  const std::size_t n = grid.size();
  std::vector<double> w1(n);
  std::vector<double> w2(n);
  c.f.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double damping = std::exp(-(c.decay1[k] + c.decay2[k]));
    w1[k] = gamma1[k] * damping;
    w2[k] = gamma2[k] * damping;
    c.f[k] = std::sqrt(damping) * std::polar(1.0, -(c.shift1[k] + c.shift2[k]));
  }
  c.g1 = cumulative_trapezoid(grid, w1);
  c.g2 = cumulative_trapezoid(grid, w2);

  const bool finite = all_finite(c.decay1) && all_finite(c.decay2) && all_finite(c.shift1) &&
                      all_finite(c.shift2) && all_finite(c.g1) && all_finite(c.g2);
  if (!finite) throw Error(ErrorCode::QuadratureFailure, "non-finite map coefficients");

  const CptReport report = validate_cpt(c, tol_cpt);
  if (!report.valid) {
    std::ostringstream msg;
    msg << "max |g1+g2+|f|^2-1| = " << report.worst_identity << " at t = "
        << report.worst_identity_time << ", min g = " << report.min_g << " at t = "
        << report.min_g_time;
    throw Error(ErrorCode::CptViolation, msg.str());
  }
  return c;
}

CptReport validate_cpt(const MapCoefficients& coeffs, double tol_cpt) {
  CptReport r;
  r.min_g = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double identity =
        std::abs(coeffs.g1[k] + coeffs.g2[k] + std::norm(coeffs.f[k]) - 1.0);
    if (!(identity <= r.worst_identity)) {
      r.worst_identity = identity;
      r.worst_identity_time = coeffs.grid[k];
    }
    const double g = std::min(coeffs.g1[k], coeffs.g2[k]);
    if (!(g >= r.min_g)) {
      r.min_g = g;
      r.min_g_time = coeffs.grid[k];
    }
  }
  r.valid = r.worst_identity <= tol_cpt && r.min_g >= -tol_cpt;
  return r;
}

Matrix apply_lambda_map(const MapPoint& p, const Matrix& op) {
  require_lambda_dim(static_cast<int>(op.rows()), false);
  Matrix out = op;
  const Eigen::Index n = op.rows();
  const Complex aa = op(kA, kA);
  out(kA, kA) = std::norm(p.f) * aa;
  for (Eigen::Index j = 1; j < n; ++j) {
    out(kA, j) = p.f * op(kA, j);
    out(j, kA) = std::conj(p.f) * op(j, kA);
  }
  out(kB, kB) += p.g1 * aa;
  out(kC, kC) += p.g2 * aa;
  return out;
}

DensityMatrix apply_lambda_map(const MapPoint& point, const DensityMatrix& rho) {
  require_lambda_dim(rho.dim(), true);
  // Quadrature leaves g1 + g2 + |f|^2 - 1 at the CPT tolerance, not at
  // round-off; accept that trace drift and renormalize.
  Tolerances tol;
  tol.trace = kDefaultCptTolerance;
  return DensityMatrix::make(apply_lambda_map(point, rho.matrix()), tol);
}

StateTrajectory evolve(const MapCoefficients& coeffs, const DensityMatrix& rho0) {
  require_lambda_dim(rho0.dim(), true);
  StateTrajectory traj;
  traj.grid = coeffs.grid;
  traj.states.reserve(coeffs.size());
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    traj.states.push_back(apply_lambda_map(coeffs.at(k), rho0));
  }
  return traj;
}

Matrix lambda_generator(const RateFunctions& rates, double t, const Matrix& rho) {
  require_lambda_dim(static_cast<int>(rho.rows()), false);
  const double g1 = rates.gamma1(t);
  const double g2 = rates.gamma2(t);
  const double shift = rates.lambda1(t) + rates.lambda2(t);
  const Eigen::Index n = rho.rows();
  const Complex i_unit(0.0, 1.0);

  Matrix out = Matrix::Zero(n, n);
  // -i (lambda1 + lambda2) [|a><a|, rho] and -(g1 + g2)/2 {rho, |a><a|}
  for (Eigen::Index j = 0; j < n; ++j) {
    out(kA, j) += -i_unit * shift * rho(kA, j) - 0.5 * (g1 + g2) * rho(kA, j);
    out(j, kA) += i_unit * shift * rho(j, kA) - 0.5 * (g1 + g2) * rho(j, kA);
  }
  out(kB, kB) += g1 * rho(kA, kA);
  out(kC, kC) += g2 * rho(kA, kA);
  return out;
}

std::vector<Matrix> propagate_operator(const RateFunctions& rates, const Matrix& op0,
                                       const std::vector<double>& grid) {
  check_grid(grid);
  std::vector<Matrix> out;
  out.reserve(grid.size());
  out.push_back(op0);
  Matrix x = op0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double t = grid[k - 1];
    const double h = grid[k] - t;
    const Matrix k1 = lambda_generator(rates, t, x);
    const Matrix k2 = lambda_generator(rates, t + 0.5 * h, x + 0.5 * h * k1);
    const Matrix k3 = lambda_generator(rates, t + 0.5 * h, x + 0.5 * h * k2);
    const Matrix k4 = lambda_generator(rates, t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(x);
  }
  return out;
}

StateTrajectory lindblad_integrate(const RateFunctions& rates, const DensityMatrix& rho0,
                                   const std::vector<double>& grid, const Tolerances& tol) {
  require_lambda_dim(rho0.dim(), true);
  check_grid(grid);
  Tolerances loose = tol;
  loose.psd = 10.0 * tol.psd;

  StateTrajectory traj;
  traj.grid = grid;
  traj.states.reserve(grid.size());
  traj.states.push_back(rho0);
  Matrix x = rho0.matrix();
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double t = grid[k - 1];
    const double h = grid[k] - t;
    const Matrix k1 = lambda_generator(rates, t, x);
    const Matrix k2 = lambda_generator(rates, t + 0.5 * h, x + 0.5 * h * k1);
    const Matrix k3 = lambda_generator(rates, t + 0.5 * h, x + 0.5 * h * k2);
    const Matrix k4 = lambda_generator(rates, t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw Error(ErrorCode::IntegratorDiverged,
                  "non-finite state at t = " + std::to_string(grid[k]));
    }
    x = 0.5 * (x + x.adjoint()).eval();
    const double tr = x.trace().real();
    if (std::abs(tr - 1.0) > tol.trace) {
      throw Error(ErrorCode::IntegratorDiverged,
                  "trace drifted to " + std::to_string(tr) + " at t = " + std::to_string(grid[k]));
    }
    x /= tr;
    try {
      traj.states.push_back(DensityMatrix::make(x, loose));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotPositive) throw;
      throw Error(ErrorCode::PositivityLost,
                  std::string(e.what()) + " at t = " + std::to_string(grid[k]));
    }
  }
  return traj;
}

}  // namespace backflow
