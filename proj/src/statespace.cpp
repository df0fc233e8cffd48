#include "backflow/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "backflow/errors.hpp"

namespace backflow {

namespace {

std::string describe(double value) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << value;
  return os.str();
}

void fix_phase(Eigen::Ref<Vector> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-12) {
      v *= std::conj(v(i)) / mag;
      v(i) = Complex(mag, 0.0);
      return;
    }
  }
}

Matrix ginibre(int rows, int cols, RngStream& rng) {
  Matrix z(rows, cols);
  const double scale = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(i, j) = Complex(re, im) * scale;
    }
  }
  return z;
}

bool entrywise_less(const Matrix& x, const Matrix& y) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (x(i, j).real() != y(i, j).real()) return x(i, j).real() < y(i, j).real();
      if (x(i, j).imag() != y(i, j).imag()) return x(i, j).imag() < y(i, j).imag();
    }
  }
  return false;
}

DensityMatrix state_on_block(const Matrix& basis, RngStream& rng) {
  const int k = static_cast<int>(basis.cols());
  const Matrix g = ginibre(k, k, rng);
  Matrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityMatrix::make(basis * w * basis.adjoint());
}

}  // namespace

Spectrum hermitian_spectrum(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  const Eigen::Index n = m.rows();
  Spectrum out{RealVector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    fix_phase(out.vectors.col(k));
  }
  return out;
}

RealVector hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double half_trace_norm(const Matrix& hermitian) {
  return 0.5 * hermitian_eigenvalues(hermitian).cwiseAbs().sum();
}

DensityMatrix DensityMatrix::make(const Matrix& entries, const Tolerances& tol) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw Error(ErrorCode::BadDimension,
                "density matrix must be square and non-empty");
  }
  if (!entries.allFinite()) {
    throw Error(ErrorCode::NotHermitian, "matrix has non-finite entries");
  }
  const double herm = hermiticity_defect(entries);
  if (herm > tol.herm) {
    throw Error(ErrorCode::NotHermitian,
                "max |rho - rho^dagger| = " + describe(herm));
  }
  Matrix rho = 0.5 * (entries + entries.adjoint());
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > tol.trace) {
    throw Error(ErrorCode::BadTrace, "|Tr rho - 1| = " + describe(std::abs(tr - 1.0)));
  }
  rho /= tr;
  Spectrum spectrum = hermitian_spectrum(rho);
  const double min_eig = spectrum.values(spectrum.values.size() - 1);
  if (min_eig < -tol.psd) {
    throw Error(ErrorCode::NotPositive, "min eigenvalue = " + describe(min_eig));
  }
  return DensityMatrix(std::move(rho), std::move(spectrum));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim < 1) throw Error(ErrorCode::BadDimension, "dimension must be >= 1");
  return make(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double norm = psi.norm();
  if (psi.size() < 1 || !(norm > 0.0)) {
    throw Error(ErrorCode::BadDimension, "pure state needs a nonzero vector");
  }
  const Vector u = psi / norm;
  return make(u * u.adjoint());
}

DensityMatrix DensityMatrix::diagonal(const std::vector<double>& weights) {
  RealVector w = Eigen::Map<const RealVector>(weights.data(),
                                              static_cast<Eigen::Index>(weights.size()));
  return make(w.cast<Complex>().asDiagonal().toDenseMatrix());
}

double DensityMatrix::purity() const { return rho_.cwiseAbs2().sum(); }

int DensityMatrix::rank(double tol) const {
  return static_cast<int>((spectrum_.values.array() > tol).count());
}

HermitianOperator HermitianOperator::make(const Matrix& entries, bool traceless,
                                          const Tolerances& tol) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw Error(ErrorCode::BadDimension, "operator must be square and non-empty");
  }
  const double herm = hermiticity_defect(entries);
  if (herm > tol.herm) {
    throw Error(ErrorCode::NotHermitian,
                "max |A - A^dagger| = " + describe(herm));
  }
  Matrix a = 0.5 * (entries + entries.adjoint());
  if (traceless && std::abs(a.trace().real()) > tol.trace) {
    throw Error(ErrorCode::BadTrace,
                "traceless operator has |Tr A| = " + describe(std::abs(a.trace().real())));
  }
  return HermitianOperator(std::move(a), traceless);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  // Fixed operand order makes D(a, b) and D(b, a) bitwise equal.
  const bool swap = entrywise_less(b.matrix(), a.matrix());
  const Matrix& x = swap ? b.matrix() : a.matrix();
  const Matrix& y = swap ? a.matrix() : b.matrix();
  return std::clamp(half_trace_norm(x - y), 0.0, 1.0);
}

JordanHahnParts jordan_hahn(const DensityMatrix& a, const DensityMatrix& b,
                            const Tolerances& tol) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const Matrix delta = a.matrix() - b.matrix();
  const Spectrum spec = hermitian_spectrum(delta);
  if (spec.values.cwiseAbs().maxCoeff() <= tol.psd) {
    throw Error(ErrorCode::IdenticalStates, "states differ by at most " +
                                                describe(spec.values.cwiseAbs().maxCoeff()));
  }
  const int n = a.dim();
  Matrix pos = Matrix::Zero(n, n);
  Matrix neg = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double v = spec.values(k);
    const Matrix proj = spec.vectors.col(k) * spec.vectors.col(k).adjoint();
    if (v > 0.0) {
      pos += v * proj;
    } else if (v < 0.0) {
      neg -= v * proj;
    }
  }
  const double weight = 0.5 * spec.values.cwiseAbs().sum();
  return JordanHahnParts{HermitianOperator::make(pos), HermitianOperator::make(neg),
                         std::min(weight, 1.0)};
}

bool is_orthogonal(const DensityMatrix& a, const DensityMatrix& b, double tol) {
  return trace_distance(a, b) >= 1.0 - tol;
}

bool is_boundary(const DensityMatrix& rho, double tol) {
  return rho.min_eigenvalue() <= tol;
}

RescaledPair rescale_pair(const DensityMatrix& a, const DensityMatrix& b,
                          const Tolerances& tol) {
  JordanHahnParts parts = jordan_hahn(a, b, tol);
  if (is_orthogonal(a, b, tol.psd)) return RescaledPair{a, b, 1.0};
  const double lambda = parts.weight;
  return RescaledPair{DensityMatrix::make(parts.positive.matrix() / lambda, tol),
                      DensityMatrix::make(parts.negative.matrix() / lambda, tol),
                      lambda};
}

Matrix sample_haar_unitary(int dim, RngStream& rng) {
  if (dim < 1) throw Error(ErrorCode::BadDimension, "dimension must be >= 1");
  const Matrix z = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (int k = 0; k < dim; ++k) {
    const Complex d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(k) *= d / mag;
  }
  return q;
}

std::pair<DensityMatrix, DensityMatrix> sample_pure_orthogonal_pair(
    int dim, RngStream& rng) {
  if (dim < 2) throw Error(ErrorCode::BadDimension, "orthogonal pair needs dim >= 2");
  const Matrix u = sample_haar_unitary(dim, rng);
  return {DensityMatrix::pure(u.col(0)), DensityMatrix::pure(u.col(1))};
}

DensityMatrix sample_random_state(int dim, int rank, RngStream& rng) {
  if (dim < 1 || rank < 1 || rank > dim) {
    throw Error(ErrorCode::BadDimension, "need 1 <= rank <= dim, got rank " +
                                             std::to_string(rank) + " in dim " +
                                             std::to_string(dim));
  }
  const Matrix u = sample_haar_unitary(dim, rng);
  std::vector<double> w(rank);
  double total = 0.0;
  for (double& x : w) {
    x = rng.exponential();
    total += x;
  }
  Matrix rho = Matrix::Zero(dim, dim);
  for (int k = 0; k < rank; ++k) {
    rho += (w[k] / total) * (u.col(k) * u.col(k).adjoint());
  }
  return DensityMatrix::make(rho);
}

std::pair<DensityMatrix, DensityMatrix> sample_orthogonal_mixed_pair(
    int dim, RngStream& rng) {
  if (dim < 2) throw Error(ErrorCode::BadDimension, "orthogonal pair needs dim >= 2");
  const Matrix u = sample_haar_unitary(dim, rng);
  const int split = rng.uniform_int(1, dim - 1);
  DensityMatrix first = state_on_block(u.leftCols(split), rng);
  DensityMatrix second = state_on_block(u.rightCols(dim - split), rng);
  return {std::move(first), std::move(second)};
}

DensityMatrix embed(const DensityMatrix& rho, int dim) {
  if (dim < rho.dim()) {
    throw Error(ErrorCode::BadDimension, "cannot embed dim " + std::to_string(rho.dim()) +
                                             " into dim " + std::to_string(dim));
  }
  if (dim == rho.dim()) return rho;
  Matrix m = Matrix::Zero(dim, dim);
  m.topLeftCorner(rho.dim(), rho.dim()) = rho.matrix();
  return DensityMatrix::make(m);
}

}  // namespace backflow
