#include <gtest/gtest.h>

#include <sstream>

#include "pairprox/linalg.hpp"
#include "pairprox/matrix_io.hpp"
#include "pairprox/random.hpp"

using namespace pairprox;

namespace {

DenseMatrix random_matrix(std::size_t n, SplitMix64& rng) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.gaussian();
  return m;
}

DenseMatrix random_symmetric(std::size_t n, SplitMix64& rng) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
  return m;
}

const DenseMatrix kKkt{{2, 0, 1}, {0, 2, 1}, {1, 1, 0}};

}  // namespace

TEST(Blas, Basics) {
  EXPECT_EQ(matvec(DenseMatrix::identity(3), Vector{1.0, -2.0, 3.0}), (Vector{1.0, -2.0, 3.0}));
  EXPECT_DOUBLE_EQ(dot(Vector{1.0, 2.0}, Vector{3.0, 4.0}), 11.0);
  EXPECT_DOUBLE_EQ(norm2(Vector{3.0, 4.0}), 5.0);
  Vector y{1.0, 1.0};
  axpy(2.0, Vector{1.0, -1.0}, y);
  EXPECT_EQ(y, (Vector{3.0, -1.0}));
}

TEST(Blas, DimensionMismatchThrows) {
  try {
    dot(Vector{1.0}, Vector{1.0, 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  EXPECT_THROW(matvec(DenseMatrix::identity(2), Vector{1.0}), Error);
}

TEST(Lu, IdentityHasUnitPivots) {
  const auto f = lu_factorize(DenseMatrix::identity(3));
  EXPECT_FALSE(f.singular);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(f.packed(i, i), 1.0);
  EXPECT_EQ(f.solve(Vector{4.0, 5.0, 6.0}), (Vector{4.0, 5.0, 6.0}));
}

TEST(Lu, SingularDiagonalIsFlagged) {
  const auto f = lu_factorize(DenseMatrix::diagonal(Vector{1.0, 0.0}));
  EXPECT_TRUE(f.singular);
  try {
    lu_solve(f, Vector{1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularMatrix);
  }
}

TEST(Lu, NonSquareRejected) {
  try {
    lu_factorize(DenseMatrix(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonSquare);
  }
}

TEST(Lu, SolvesSmallSystems) {
  const Vector x = lu_solve(lu_factorize(DenseMatrix{{2, 0}, {0, 4}}), Vector{2.0, 8.0});
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0, 1e-15);

  const Vector k = lu_solve(lu_factorize(kKkt), Vector{0.0, 0.0, 2.0});
  // A * (1, 1, -2) = (2 - 2, 2 - 2, 1 + 1)
  EXPECT_NEAR(k[0], 1.0, 1e-14);
  EXPECT_NEAR(k[1], 1.0, 1e-14);
  EXPECT_NEAR(k[2], -2.0, 1e-14);
  EXPECT_THROW(lu_solve(lu_factorize(kKkt), Vector{1.0, 2.0}), Error);
}

TEST(Lu, ResidualBoundOnRandomSystems) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 40);
    // Diagonal shift keeps the condition number modest.
    DenseMatrix a = random_matrix(n, rng);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 3.0 * std::sqrt(static_cast<double>(n));
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = rng.gaussian();
    const Vector x = lu_solve(lu_factorize(a), b);
    EXPECT_LE(distance(matvec(a, x), b), 1e-8 * (1.0 + norm2(b))) << "trial " << trial;
  }
}

TEST(Jacobi, DiagonalInput) {
  const auto e = jacobi_eigendecomposition(DenseMatrix::diagonal(Vector{3.0, 1.0, 2.0}));
  EXPECT_EQ(e.eigenvalues, (Vector{1.0, 2.0, 3.0}));
}

TEST(Jacobi, SwapMatrix) {
  const auto e = jacobi_eigendecomposition(DenseMatrix{{0, 1}, {1, 0}});
  EXPECT_NEAR(e.eigenvalues[0], -1.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-14);
}

TEST(Jacobi, IdentityFive) {
  const auto e = jacobi_eigendecomposition(DenseMatrix::identity(5));
  for (double l : e.eigenvalues) EXPECT_DOUBLE_EQ(l, 1.0);
  EXPECT_LE((matmul(e.eigenvectors.transpose(), e.eigenvectors) - DenseMatrix::identity(5)).frobenius_norm(), 1e-12);
}

TEST(Jacobi, RejectsNonSymmetric) {
  try {
    jacobi_eigendecomposition(DenseMatrix{{0, 1}, {0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSymmetric);
  }
}

TEST(Jacobi, ReconstructionAndOrthonormality) {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = trial < 95 ? 1 + static_cast<std::size_t>(trial) : 100 + 25 * static_cast<std::size_t>(trial - 95);
    const DenseMatrix a = random_symmetric(std::min<std::size_t>(n, 200), rng);
    const auto e = jacobi_eigendecomposition(a);
    const std::size_t m = a.rows();
    DenseMatrix scaled = e.eigenvectors;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) scaled(i, j) *= e.eigenvalues[j];
    const DenseMatrix rebuilt = matmul(scaled, e.eigenvectors.transpose());
    EXPECT_LE((rebuilt - a).frobenius_norm(), 1e-8 * (1.0 + a.frobenius_norm())) << "n=" << m;
    EXPECT_LE((matmul(e.eigenvectors.transpose(), e.eigenvectors) - DenseMatrix::identity(m)).frobenius_norm(), 1e-8);
    EXPECT_TRUE(std::is_sorted(e.eigenvalues.begin(), e.eigenvalues.end()));
  }
}

TEST(Jacobi, DiagonalSpectrumSurvivesRotation) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial);
    Vector lambda(n);
    for (std::size_t i = 0; i < n; ++i) lambda[i] = rng.uniform(-5.0, 5.0);
    const DenseMatrix q = householder_q(random_matrix(n, rng));
    DenseMatrix qd = q;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) qd(i, j) *= lambda[j];
    DenseMatrix a = matmul(qd, q.transpose());
    a = 0.5 * (a + a.transpose());
    auto sorted = lambda.values();
    std::sort(sorted.begin(), sorted.end());
    const auto e = jacobi_eigendecomposition(a);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(e.eigenvalues[i], sorted[i], 1e-10);
  }
}

TEST(MatrixIo, RoundTripIsExact) {
  const DenseMatrix m{{1.0 / 3.0, -2.5e-17}, {std::acos(-1.0), 1e300}};
  std::stringstream s;
  write_matrix(s, m);
  EXPECT_EQ(read_matrix(s), m);
}

TEST(MatrixIo, DiagnosticsNameTheLine) {
  std::istringstream bad_header("2\n1 0\n");
  try {
    read_matrix(bad_header, "m.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("rows cols"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("m.txt:1"), std::string::npos);
  }
  std::istringstream bad_entry("2 2\n1 0\n0 x\n");
  try {
    read_matrix(bad_entry, "m.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("m.txt:3"), std::string::npos);
  }
  std::istringstream short_rows("2 2\n1 0\n");
  EXPECT_THROW(read_matrix(short_rows), Error);
}
