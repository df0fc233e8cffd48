#pragma once

#include "backflow/statespace.hpp"

namespace backflow {

/// The pair of overlapping eigenvectors that drives the joint translation.
struct OverlapSelection {
  Vector first;        // eigenvector of rho1
  Vector second;       // eigenvector of rho2, phase-rotated so <first|second> > 0
  double overlap;      // alpha in (0, 1]
  double weight_first;
  double weight_second;
};

/// Everything needed to shift a non-orthogonal pair into the interior of the
/// state space: A = epsilon * B with
///   B = P+ - r P- - (1 - r) 1/N,   r = (c+/c-)^2 = (1 - alpha)/(1 + alpha).
struct ShiftConstruction {
  OverlapSelection selection;
  HermitianOperator projector_plus;
  HermitianOperator projector_minus;
  double norm_ratio;
  double epsilon_max;
  double epsilon;
  HermitianOperator direction;  // B
  HermitianOperator shift;      // A = epsilon * B
};

struct TranslatedPair {
  DensityMatrix first;
  DensityMatrix second;
  ShiftConstruction construction;
};

/// Test hook: `FlipShiftSign` builds A = -epsilon * B, which pushes a
/// boundary pair out of the state space.
enum class ShiftFault { None, FlipShiftSign };

OverlapSelection overlap_selection(const DensityMatrix& a, const DensityMatrix& b,
                                   const Tolerances& tol = {});

/// g(x) = p x^2 + 4 c+^2 epsilon (alpha/N - x) with c+^2 = 1/(2(1 + alpha)).
double quadratic_bound(double p, double alpha, int dim, double epsilon, double x);

/// Supremum of admissible epsilon: alpha * 2(1 + alpha) * min(p1, p2) / N.
double epsilon_upper_bound(double alpha, double min_weight, int dim);

ShiftConstruction build_shift_operator(const DensityMatrix& a, const DensityMatrix& b,
                                       double epsilon_fraction = 0.5,
                                       ShiftFault fault = ShiftFault::None,
                                       const Tolerances& tol = {});

/// Returns (rho1 - A, rho2 - A). Both results are strictly interior; throws
/// PositivityFailure if that check does not hold numerically.
TranslatedPair jointly_translate(const DensityMatrix& a, const DensityMatrix& b,
                                 double epsilon_fraction = 0.5,
                                 ShiftFault fault = ShiftFault::None,
                                 const Tolerances& tol = {});

bool is_jointly_translatable(const DensityMatrix& a, const DensityMatrix& b,
                             const Tolerances& tol = {});

}  // namespace backflow
