#include "backflow/translation.hpp"

#include <cmath>
#include <string>

#include "backflow/errors.hpp"

namespace backflow {

namespace {

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

Matrix projector(const Vector& v) { return v * v.adjoint(); }

}  // namespace

OverlapSelection overlap_selection(const DensityMatrix& a, const DensityMatrix& b,
                                   const Tolerances& tol) {
  require_same_dim(a, b);
  if (is_orthogonal(a, b, tol.psd)) {
    throw Error(ErrorCode::OrthogonalPair, "pair has unit trace distance");
  }
  int best_i = -1;
  int best_j = -1;
  double best = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    if (a.eigenvalues()(i) <= tol.psd) continue;
    for (int j = 0; j < b.dim(); ++j) {
      if (b.eigenvalues()(j) <= tol.psd) continue;
      const double mag = std::abs(a.eigenvectors().col(i).dot(b.eigenvectors().col(j)));
      if (mag > best) {
        best = mag;
        best_i = i;
        best_j = j;
      }
    }
  }
  if (best_i < 0 || best <= 1e-12) {
    throw Error(ErrorCode::OrthogonalPair, "supports have no overlapping eigenvectors");
  }
  const Vector first = a.eigenvectors().col(best_i);
  Vector second = b.eigenvectors().col(best_j);
  // <first|second> = |.| e^{i phi}; rotate second by e^{-i phi}.
  const Complex inner = first.dot(second);
  second *= std::conj(inner) / std::abs(inner);
  return OverlapSelection{first, second, std::min(best, 1.0), a.eigenvalues()(best_i),
                          b.eigenvalues()(best_j)};
}

double quadratic_bound(double p, double alpha, int dim, double epsilon, double x) {
  if (!(p > 0.0 && p <= 1.0) || !(alpha > 0.0 && alpha <= 1.0) || dim < 2 ||
      !(epsilon > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::DomainError, "quadratic_bound arguments out of range");
  }
  const double c_plus_sq = 1.0 / (2.0 * (1.0 + alpha));
  return p * x * x + 4.0 * c_plus_sq * epsilon * (alpha / dim - x);
}

double epsilon_upper_bound(double alpha, double min_weight, int dim) {
  return alpha * 2.0 * (1.0 + alpha) * min_weight / dim;
}

ShiftConstruction build_shift_operator(const DensityMatrix& a, const DensityMatrix& b,
                                       double epsilon_fraction, ShiftFault fault,
                                       const Tolerances& tol) {
  if (!(epsilon_fraction > 0.0 && epsilon_fraction < 1.0)) {
    throw Error(ErrorCode::DomainError, "epsilon fraction must lie in (0, 1)");
  }
  OverlapSelection sel = overlap_selection(a, b, tol);
  const int n = a.dim();
  const double alpha = sel.overlap;

  const Vector sum = sel.first + sel.second;
  const Vector diff = sel.first - sel.second;
  const Matrix p_plus = projector(sum / sum.norm());
  const Matrix p_minus =
      diff.norm() < 1e-12 ? Matrix::Zero(n, n) : projector(diff / diff.norm());

  const double ratio = (1.0 - alpha) / (1.0 + alpha);
  const Matrix identity = Matrix::Identity(n, n);
  const Matrix b_op = p_plus - ratio * p_minus - (1.0 - ratio) / n * identity;

  const double eps_max =
      epsilon_upper_bound(alpha, std::min(sel.weight_first, sel.weight_second), n);
  const double eps = epsilon_fraction * eps_max;
  const double sign = fault == ShiftFault::FlipShiftSign ? -1.0 : 1.0;

  return ShiftConstruction{std::move(sel),
                           HermitianOperator::make(p_plus, false, tol),
                           HermitianOperator::make(p_minus, false, tol),
                           ratio,
                           eps_max,
                           eps,
                           HermitianOperator::make(b_op, true, tol),
                           HermitianOperator::make(sign * eps * b_op, true, tol)};
}

TranslatedPair jointly_translate(const DensityMatrix& a, const DensityMatrix& b,
                                 double epsilon_fraction, ShiftFault fault,
                                 const Tolerances& tol) {
  ShiftConstruction shift = build_shift_operator(a, b, epsilon_fraction, fault, tol);
  auto translate = [&](const DensityMatrix& rho, const char* which) {
    try {
      DensityMatrix out = DensityMatrix::make(rho.matrix() - shift.shift.matrix(), tol);
      if (out.min_eigenvalue() <= tol.psd) {
        throw Error(ErrorCode::PositivityFailure,
                    std::string(which) + " translated state is not interior, min eigenvalue " +
                        std::to_string(out.min_eigenvalue()));
      }
      return out;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::PositivityFailure) throw;
      throw Error(ErrorCode::PositivityFailure,
                  std::string(which) + " translated state invalid: " + e.what());
    }
  };
  DensityMatrix first = translate(a, "first");
  DensityMatrix second = translate(b, "second");
  return TranslatedPair{std::move(first), std::move(second), std::move(shift)};
}

bool is_jointly_translatable(const DensityMatrix& a, const DensityMatrix& b,
                             const Tolerances& tol) {
  require_same_dim(a, b);
  return !is_orthogonal(a, b, tol.psd);
}

}  // namespace backflow
