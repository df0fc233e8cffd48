#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "backflow/errors.hpp"
#include "backflow/statespace.hpp"
#include "test_helpers.hpp"

using namespace backflow;
using backflow::testing::expect_error;

namespace {

Vector basis(int dim, int k) {
  Vector v = Vector::Zero(dim);
  v(k) = 1.0;
  return v;
}

Vector plus_state() {
  Vector v(2);
  v << 1.0, 1.0;
  return v / std::sqrt(2.0);
}

}  // namespace

TEST(DensityMatrix, MaximallyMixedQubit) {
  const DensityMatrix rho = DensityMatrix::make(Matrix::Identity(2, 2) / 2.0);
  EXPECT_NEAR(rho.eigenvalues()(0), 0.5, 1e-15);
  EXPECT_NEAR(rho.eigenvalues()(1), 0.5, 1e-15);
  EXPECT_FALSE(is_boundary(rho));
}

TEST(DensityMatrix, DiagonalPureState) {
  const DensityMatrix rho = DensityMatrix::diagonal({1.0, 0.0, 0.0});
  EXPECT_NEAR(rho.purity(), 1.0, 1e-15);
  EXPECT_EQ(rho.rank(), 1);
}

TEST(DensityMatrix, RejectsNegativeEigenvalue) {
  expect_error(ErrorCode::NotPositive, [] { DensityMatrix::diagonal({1.2, -0.2}); });
}

TEST(DensityMatrix, RejectsNonHermitian) {
  Matrix m = Matrix::Identity(2, 2) / 2.0;
  m(0, 1) = 0.1;
  expect_error(ErrorCode::NotHermitian, [&] { DensityMatrix::make(m); });
}

TEST(DensityMatrix, RejectsBadTraceAndRenormalizesSmallDrift) {
  expect_error(ErrorCode::BadTrace, [] { DensityMatrix::diagonal({0.6, 0.6}); });
  const DensityMatrix rho = DensityMatrix::diagonal({0.5 + 2e-11, 0.5});
  EXPECT_EQ(rho.matrix().trace().real(), 1.0);
}

TEST(DensityMatrix, ErrorMessageNamesMagnitude) {
  try {
    DensityMatrix::diagonal({1.2, -0.2});
    FAIL() << "expected NotPositive";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("-2.000e-01"), std::string::npos) << e.what();
  }
}

TEST(DensityMatrix, SpectrumDescendingWithFixedPhase) {
  RngStream rng(3);
  const DensityMatrix rho = sample_random_state(4, 4, rng);
  for (int k = 0; k + 1 < 4; ++k) EXPECT_GE(rho.eigenvalues()(k), rho.eigenvalues()(k + 1));
  for (int k = 0; k < 4; ++k) {
    const Vector v = rho.eigenvectors().col(k);
    int first = 0;
    while (std::abs(v(first)) <= 1e-12) ++first;
    EXPECT_EQ(v(first).imag(), 0.0);
    EXPECT_GT(v(first).real(), 0.0);
  }
}

TEST(TraceDistance, Examples) {
  const DensityMatrix a = DensityMatrix::diagonal({1.0, 0.0, 0.0});
  const DensityMatrix bc = DensityMatrix::diagonal({0.0, 0.5, 0.5});
  EXPECT_EQ(trace_distance(a, a), 0.0);
  EXPECT_NEAR(trace_distance(a, bc), 1.0, 1e-15);
  EXPECT_NEAR(trace_distance(DensityMatrix::diagonal({0.6, 0.4}),
                             DensityMatrix::diagonal({0.4, 0.6})),
              0.2, 1e-15);
  expect_error(ErrorCode::DimensionMismatch, [&] {
    trace_distance(a, DensityMatrix::maximally_mixed(2));
  });
}

TEST(TraceDistance, MetricAxiomsOnRandomTriples) {
  RngStream rng(11);
  for (int dim = 2; dim <= 4; ++dim) {
    for (int t = 0; t < 200; ++t) {
      const DensityMatrix a = sample_random_state(dim, rng.uniform_int(1, dim), rng);
      const DensityMatrix b = sample_random_state(dim, rng.uniform_int(1, dim), rng);
      const DensityMatrix c = sample_random_state(dim, rng.uniform_int(1, dim), rng);
      EXPECT_EQ(trace_distance(a, b), trace_distance(b, a));
      EXPECT_EQ(trace_distance(a, a), 0.0);
      EXPECT_LE(trace_distance(a, c), trace_distance(a, b) + trace_distance(b, c) + 1e-12);
    }
  }
}

TEST(TraceDistance, UnitaryInvariance) {
  RngStream rng(12);
  for (int dim = 2; dim <= 4; ++dim) {
    for (int t = 0; t < 50; ++t) {
      const DensityMatrix a = sample_random_state(dim, rng.uniform_int(1, dim), rng);
      const DensityMatrix b = sample_random_state(dim, rng.uniform_int(1, dim), rng);
      const Matrix u = sample_haar_unitary(dim, rng);
      const DensityMatrix ua = DensityMatrix::make(u * a.matrix() * u.adjoint());
      const DensityMatrix ub = DensityMatrix::make(u * b.matrix() * u.adjoint());
      EXPECT_NEAR(trace_distance(ua, ub), trace_distance(a, b), 1e-10);
    }
  }
}

TEST(JordanHahn, DiagonalExamples) {
  const JordanHahnParts orth =
      jordan_hahn(DensityMatrix::diagonal({1.0, 0.0}), DensityMatrix::diagonal({0.0, 1.0}));
  EXPECT_NEAR((orth.positive.matrix() - DensityMatrix::diagonal({1.0, 0.0}).matrix()).norm(), 0.0,
              1e-15);
  EXPECT_NEAR((orth.negative.matrix() - DensityMatrix::diagonal({0.0, 1.0}).matrix()).norm(), 0.0,
              1e-15);
  EXPECT_NEAR(orth.weight, 1.0, 1e-15);

  const JordanHahnParts close =
      jordan_hahn(DensityMatrix::diagonal({0.6, 0.4}), DensityMatrix::diagonal({0.4, 0.6}));
  EXPECT_NEAR(close.positive.matrix()(0, 0).real(), 0.2, 1e-15);
  EXPECT_NEAR(std::abs(close.positive.matrix()(1, 1)), 0.0, 1e-15);
  EXPECT_NEAR(close.negative.matrix()(1, 1).real(), 0.2, 1e-15);
  EXPECT_NEAR(close.weight, 0.2, 1e-15);
}

TEST(JordanHahn, IdenticalStatesRejected) {
  const DensityMatrix rho = DensityMatrix::maximally_mixed(3);
  expect_error(ErrorCode::IdenticalStates, [&] { jordan_hahn(rho, rho); });
}

// Oracle: a general (non-Hermitian) eigensolver on the difference.
TEST(JordanHahn, RandomPairsAgainstGeneralEigensolver) {
  RngStream rng(21);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix a = sample_random_state(3, rng.uniform_int(1, 3), rng);
    const DensityMatrix b = sample_random_state(3, rng.uniform_int(1, 3), rng);
    const Matrix delta = a.matrix() - b.matrix();
    Eigen::ComplexEigenSolver<Matrix> oracle(delta);
    double positive_mass = 0.0;
    for (int k = 0; k < 3; ++k) positive_mass += std::max(0.0, oracle.eigenvalues()(k).real());

    const JordanHahnParts jh = jordan_hahn(a, b);
    EXPECT_LE((delta - (jh.positive.matrix() - jh.negative.matrix())).cwiseAbs().maxCoeff(),
              1e-12);
    EXPECT_NEAR(jh.positive.trace(), positive_mass, 1e-10);
    EXPECT_NEAR(jh.negative.trace(), positive_mass, 1e-10);
    EXPECT_NEAR(jh.weight, trace_distance(a, b), 1e-10);
    EXPECT_GE(hermitian_eigenvalues(jh.positive.matrix()).minCoeff(), -1e-9);
    EXPECT_GE(hermitian_eigenvalues(jh.negative.matrix()).minCoeff(), -1e-9);
    EXPECT_LE((jh.positive.matrix() * jh.negative.matrix()).norm(), 1e-9);
  }
}

TEST(Orthogonality, Examples) {
  const DensityMatrix zero = DensityMatrix::pure(basis(2, 0));
  EXPECT_TRUE(is_orthogonal(zero, DensityMatrix::pure(basis(2, 1))));
  EXPECT_FALSE(is_orthogonal(zero, DensityMatrix::pure(plus_state())));
  EXPECT_TRUE(is_orthogonal(DensityMatrix::diagonal({1.0, 0.0, 0.0}),
                            DensityMatrix::diagonal({0.0, 0.5, 0.5})));
}

TEST(Orthogonality, UnitDistanceIffDisjointSupports) {
  RngStream rng(31);
  for (int dim = 2; dim <= 4; ++dim) {
    for (int t = 0; t < 100; ++t) {
      auto [a, b] = sample_orthogonal_mixed_pair(dim, rng);
      EXPECT_NEAR(trace_distance(a, b), 1.0, 1e-12);
      EXPECT_TRUE(is_boundary(a));
      EXPECT_TRUE(is_boundary(b));
      const double s = 0.05 + 0.9 * rng.uniform();
      const DensityMatrix overlapping =
          DensityMatrix::make((1.0 - s) * b.matrix() + s * a.matrix());
      EXPECT_LT(trace_distance(a, overlapping), 1.0 - 1e-8);
    }
  }
}

TEST(Boundary, Examples) {
  RngStream rng(5);
  for (int dim = 2; dim <= 5; ++dim) {
    Vector psi = Vector::Zero(dim);
    for (int i = 0; i < dim; ++i) psi(i) = Complex(rng.normal(), rng.normal());
    EXPECT_TRUE(is_boundary(DensityMatrix::pure(psi)));
    EXPECT_FALSE(is_boundary(DensityMatrix::maximally_mixed(dim)));
  }
  EXPECT_TRUE(is_boundary(DensityMatrix::diagonal({0.5, 0.5, 0.0})));
}

TEST(RescalePair, DiagonalExample) {
  const RescaledPair r =
      rescale_pair(DensityMatrix::diagonal({0.6, 0.4}), DensityMatrix::diagonal({0.4, 0.6}));
  EXPECT_NEAR(r.lambda, 0.2, 1e-15);
  EXPECT_NEAR((r.first.matrix() - DensityMatrix::diagonal({1.0, 0.0}).matrix()).norm(), 0.0,
              1e-14);
  EXPECT_NEAR((r.second.matrix() - DensityMatrix::diagonal({0.0, 1.0}).matrix()).norm(), 0.0,
              1e-14);
}

TEST(RescalePair, OrthogonalInputUnchanged) {
  const DensityMatrix a = DensityMatrix::diagonal({1.0, 0.0, 0.0});
  const DensityMatrix b = DensityMatrix::diagonal({0.0, 0.5, 0.5});
  const RescaledPair r = rescale_pair(a, b);
  EXPECT_EQ(r.lambda, 1.0);
  EXPECT_EQ(r.first.matrix(), a.matrix());
  EXPECT_EQ(r.second.matrix(), b.matrix());
}

// |+><+| - |0><0| = [[-1/2, 1/2], [1/2, 1/2]]: eigenvalues +-1/sqrt2 and, for
// a real symmetric [[p, q], [q, r]], eigenvectors along (q, lambda - p).
TEST(RescalePair, PlusVersusZero) {
  const RescaledPair r =
      rescale_pair(DensityMatrix::pure(plus_state()), DensityMatrix::pure(basis(2, 0)));
  EXPECT_NEAR(r.lambda, 1.0 / std::numbers::sqrt2, 1e-12);
  const double lam = 1.0 / std::numbers::sqrt2;
  Vector up(2);
  up << 0.5, lam + 0.5;
  Vector down(2);
  down << 0.5, -lam + 0.5;
  EXPECT_NEAR((r.first.matrix() - DensityMatrix::pure(up).matrix()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((r.second.matrix() - DensityMatrix::pure(down).matrix()).norm(), 0.0, 1e-12);
}

TEST(RescalePair, LawOnRandomPairs) {
  RngStream rng(41);
  for (int dim = 2; dim <= 4; ++dim) {
    for (int t = 0; t < 100; ++t) {
      const DensityMatrix a = sample_random_state(dim, rng.uniform_int(1, dim), rng);
      const DensityMatrix b = sample_random_state(dim, rng.uniform_int(1, dim), rng);
      const RescaledPair r = rescale_pair(a, b);
      EXPECT_NEAR(trace_distance(r.first, r.second), 1.0, 1e-10);
      const Matrix expected = (a.matrix() - b.matrix()) / r.lambda;
      EXPECT_LE(((r.first.matrix() - r.second.matrix()) - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Sampling, PureOrthogonalPairQubit) {
  RngStream rng(2024);
  auto [a, b] = sample_pure_orthogonal_pair(2, rng);
  EXPECT_LE(std::abs((a.matrix() * b.matrix()).trace()), 1e-12);
  EXPECT_NEAR(a.purity(), 1.0, 1e-12);
  EXPECT_NEAR(b.purity(), 1.0, 1e-12);
}

TEST(Sampling, SameSeedSamePairBitwise) {
  RngStream r1(77);
  RngStream r2(77);
  auto [a1, b1] = sample_pure_orthogonal_pair(3, r1);
  auto [a2, b2] = sample_pure_orthogonal_pair(3, r2);
  EXPECT_EQ(a1.matrix(), a2.matrix());
  EXPECT_EQ(b1.matrix(), b2.matrix());
}

TEST(Sampling, PureOrthogonalPairHasUnitDistance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed);
    auto [a, b] = sample_pure_orthogonal_pair(3, rng);
    EXPECT_NEAR(trace_distance(a, b), 1.0, 1e-12);
  }
  RngStream rng(0);
  expect_error(ErrorCode::BadDimension, [&] { sample_pure_orthogonal_pair(1, rng); });
}

TEST(Sampling, RandomStateRanks) {
  RngStream rng(8);
  for (int dim = 2; dim <= 5; ++dim) {
    const DensityMatrix full = sample_random_state(dim, dim, rng);
    EXPECT_GT(full.min_eigenvalue(), 1e-12);
    EXPECT_FALSE(is_boundary(full));
    EXPECT_NEAR(sample_random_state(dim, 1, rng).purity(), 1.0, 1e-12);
    EXPECT_TRUE(is_boundary(sample_random_state(dim, dim - 1, rng)));
  }
  expect_error(ErrorCode::BadDimension, [&] { sample_random_state(3, 4, rng); });
  expect_error(ErrorCode::BadDimension, [&] { sample_random_state(3, 0, rng); });
}

TEST(Sampling, HaarUnitaryIsUnitary) {
  RngStream rng(9);
  const Matrix u = sample_haar_unitary(5, rng);
  EXPECT_LE((u.adjoint() * u - Matrix::Identity(5, 5)).norm(), 1e-12);
}

TEST(Sampling, SplitStreamsAreIndependentOfOrder) {
  const RngStream root(123);
  RngStream a = root.split(5);
  RngStream b = root.split(5);
  RngStream c = root.split(6);
  const double x = a.normal();
  EXPECT_EQ(x, b.normal());
  EXPECT_NE(x, c.normal());
}

TEST(Embed, PadsWithZeros) {
  const DensityMatrix q = DensityMatrix::pure(plus_state());
  const DensityMatrix e = embed(q, 3);
  EXPECT_EQ(e.dim(), 3);
  EXPECT_EQ(e.matrix().topLeftCorner(2, 2), q.matrix());
  EXPECT_EQ(e.matrix()(2, 2), Complex(0.0));
  expect_error(ErrorCode::BadDimension, [&] { embed(e, 2); });
}
