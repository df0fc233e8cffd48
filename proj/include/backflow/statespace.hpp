#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "backflow/rng.hpp"

namespace backflow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Absolute tolerances used when validating states and operators.
struct Tolerances {
  double herm = 1e-10;
  double trace = 1e-10;
  double psd = 1e-9;
};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending
/// order. Each eigenvector has its first component of modulus > 1e-12 made
/// real and positive so that spectral data is reproducible.
struct Spectrum {
  RealVector values;
  Matrix vectors;
};

Spectrum hermitian_spectrum(const Matrix& m);

/// Eigenvalues only, ascending.
RealVector hermitian_eigenvalues(const Matrix& m);

/// Largest absolute deviation from Hermiticity, max |m - m^dagger|.
double hermiticity_defect(const Matrix& m);

/// Half the trace norm of a Hermitian matrix.
double half_trace_norm(const Matrix& hermitian);

class DensityMatrix {
 public:
  /// Validates and normalizes `entries`. Throws Error with NotHermitian,
  /// NotPositive, BadTrace or BadDimension.
  static DensityMatrix make(const Matrix& entries, const Tolerances& tol = {});

  static DensityMatrix maximally_mixed(int dim);
  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix diagonal(const std::vector<double>& weights);

  int dim() const noexcept { return static_cast<int>(rho_.rows()); }
  const Matrix& matrix() const noexcept { return rho_; }
  Complex operator()(int i, int j) const { return rho_(i, j); }

  const RealVector& eigenvalues() const noexcept { return spectrum_.values; }
  const Matrix& eigenvectors() const noexcept { return spectrum_.vectors; }
  double min_eigenvalue() const { return spectrum_.values(dim() - 1); }
  double purity() const;
  /// Number of eigenvalues above `tol`.
  int rank(double tol = Tolerances{}.psd) const;

 private:
  DensityMatrix(Matrix rho, Spectrum spectrum)
      : rho_(std::move(rho)), spectrum_(std::move(spectrum)) {}

  Matrix rho_;
  Spectrum spectrum_;
};

inline DensityMatrix make_density_matrix(const Matrix& entries,
                                         const Tolerances& tol = {}) {
  return DensityMatrix::make(entries, tol);
}

class HermitianOperator {
 public:
  static HermitianOperator make(const Matrix& entries, bool traceless = false,
                                const Tolerances& tol = {});

  int dim() const noexcept { return static_cast<int>(a_.rows()); }
  const Matrix& matrix() const noexcept { return a_; }
  bool traceless() const noexcept { return traceless_; }
  double trace() const { return a_.trace().real(); }

 private:
  HermitianOperator(Matrix a, bool traceless)
      : a_(std::move(a)), traceless_(traceless) {}

  Matrix a_;
  bool traceless_;
};

/// rho1 - rho2 = positive - negative with orthogonal positive parts.
struct JordanHahnParts {
  HermitianOperator positive;
  HermitianOperator negative;
  double weight;  // Tr positive = Tr negative
};

struct RescaledPair {
  DensityMatrix first;
  DensityMatrix second;
  double lambda;
};

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

JordanHahnParts jordan_hahn(const DensityMatrix& a, const DensityMatrix& b,
                            const Tolerances& tol = {});

bool is_orthogonal(const DensityMatrix& a, const DensityMatrix& b,
                   double tol = Tolerances{}.psd);

bool is_boundary(const DensityMatrix& rho, double tol = Tolerances{}.psd);

/// Maps a pair onto the orthogonal pair (P1/lambda, P2/lambda) built from
/// its Jordan-Hahn parts. Orthogonal inputs come back unchanged with
/// lambda = 1.
RescaledPair rescale_pair(const DensityMatrix& a, const DensityMatrix& b,
                          const Tolerances& tol = {});

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// diag(R) absorbed into Q.
Matrix sample_haar_unitary(int dim, RngStream& rng);

std::pair<DensityMatrix, DensityMatrix> sample_pure_orthogonal_pair(
    int dim, RngStream& rng);

/// Random rank-r state: r Haar-orthonormal vectors mixed with flat-Dirichlet
/// weights.
DensityMatrix sample_random_state(int dim, int rank, RngStream& rng);

/// Random orthogonal pair of generally mixed states: a Haar basis is split
/// into two complementary blocks and each side carries a Hilbert-Schmidt
/// random state supported on its block.
std::pair<DensityMatrix, DensityMatrix> sample_orthogonal_mixed_pair(
    int dim, RngStream& rng);

/// Pads a state with zero rows/columns up to `dim`.
DensityMatrix embed(const DensityMatrix& rho, int dim);

}  // namespace backflow
