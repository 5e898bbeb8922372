#include <gtest/gtest.h>

#include <limits>

#include "pairprox/applications.hpp"
#include "pairprox/instances.hpp"
#include "pairprox/solvers.hpp"

using namespace pairprox;

namespace {

const Vector kOrigin{0.0, 0.0};

SolverConfig full_trace(std::size_t max_iters = 100000) {
  SolverConfig cfg;
  cfg.trace_level = TraceLevel::Full;
  cfg.max_iters = max_iters;
  return cfg;
}

bool nonincreasing(const std::vector<double>& v, double tol) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[k - 1] + tol) return false;
  return true;
}

}  // namespace

TEST(Gppa, QpDiagonalMatchesGeometricSeries) {
  const auto [f, v] = kkt_operator_pair(DenseMatrix::diagonal(Vector{1.0, 0.0}), Vector{1.0, 0.0}, 0.2);
  const auto r = gppa(f, v, kOrigin, full_trace());
  ASSERT_TRUE(r.converged());
  // Range coordinate: x_{k+1} = (1.4 x_k + 1) / 2.4, so x_k = 1 - (1.4 / 2.4)^k.
  const double q = 1.4 / 2.4;
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    EXPECT_NEAR(r.trace.iterates[k][0], 1.0 - std::pow(q, static_cast<double>(k + 1)), 1e-14);
    EXPECT_EQ(r.trace.iterates[k][1], 0.0);
  }
  EXPECT_NEAR(r.solution_preimage[0], 1.0, 1e-7);
  // u_k = (v(x_k) - v(x_{k+1})) = 1.4 (x_{k+1} - x_k): geometric with ratio q.
  const auto& u = residual(r);
  for (std::size_t k = 1; k < u.size(); ++k) EXPECT_NEAR(u[k] / u[k - 1], q, 1e-6);
}

TEST(Gppa, ZeroOfFConvergesInOneStep) {
  const auto r = gppa(instances::sign_block_operator(), instances::swap2(), kOrigin, SolverConfig{});
  EXPECT_TRUE(r.converged());
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.solution_preimage, kOrigin);
  for (double u : residual(r)) EXPECT_EQ(u, 0.0);
}

TEST(Gppa, SignBlockReachesUniqueZero) {
  const auto r = gppa(instances::sign_block_operator(), instances::swap2(), Vector{5.0, -3.0}, SolverConfig{});
  ASSERT_TRUE(r.converged());
  EXPECT_LE(norm2(r.solution_preimage), 1e-8);
  EXPECT_TRUE(nonincreasing(residual(r), 1e-10));
}

TEST(Gppa, UnsupportedStructureSurfaces) {
  try {
    gppa(instances::trig_block_operator(), instances::swap2(), kOrigin, SolverConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedStructure);
  }
}

TEST(Gppa, NonFiniteStartIsRejected) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    gppa(OperatorExpr::identity(2), OperatorExpr::identity(2), Vector{nan, 0.0}, SolverConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteIterate);
  }
}

TEST(Gppa, ImageMonotonicityAndLinearRate) {
  // (diag(2, 1), Id) is strongly monotone with alpha = 1 and L = 1.
  const auto f = OperatorExpr::linear(DenseMatrix::diagonal(Vector{2.0, 1.0}));
  SplitMix64 rng(3);
  for (double gamma : {0.5, 1.0, 2.0}) {
    SolverConfig cfg = full_trace();
    cfg.gamma = GammaSchedule::constant(gamma);
    const Vector x0{rng.uniform(-9, 9), rng.uniform(-9, 9)};
    const auto r = gppa(f, OperatorExpr::identity(2), x0, cfg);
    ASSERT_TRUE(r.converged());
    double prev = norm2(x0);
    for (const auto& img : r.trace.images) {
      EXPECT_LE(norm2(img), prev / (1.0 + gamma) + 1e-10);
      prev = norm2(img);
    }
  }
}

TEST(Gppa, GammaSequenceWarnsOnShortSum) {
  SolverConfig cfg;
  cfg.gamma = GammaSchedule::sequence({1.0, 0.5});
  cfg.max_iters = 50;
  const auto r = gppa(instances::sign_block_operator(), instances::swap2(), Vector{2.0, 1.0}, cfg);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_TRUE(r.converged());

  SolverConfig ok;
  ok.gamma = GammaSchedule::sequence({1.0, 2000.0});
  EXPECT_TRUE(gppa(instances::sign_block_operator(), instances::swap2(), Vector{2.0, 1.0}, ok).warnings.empty());
}

TEST(Gppa, MaxItersAndStall) {
  const auto [f, v] = kkt_operator_pair(DenseMatrix::diagonal(Vector{1.0, 0.0}), Vector{1.0, 0.0}, 0.2);
  SolverConfig cfg;
  cfg.max_iters = 3;
  const auto r = gppa(f, v, kOrigin, cfg);
  EXPECT_EQ(r.status, SolveStatus::MaxIters);
  EXPECT_EQ(r.iterations, 3u);

  SolverConfig stall;
  stall.tol_residual = 1e-300;
  stall.tol_step = 1e-3;
  const auto s = gppa(f, v, kOrigin, stall);
  EXPECT_EQ(s.status, SolveStatus::Failed);
  EXPECT_EQ(s.failure_reason, "Stalled");
}

TEST(Gppa1, SignBlockFirstStepAndLimit) {
  const auto r = gppa1(instances::sign_block_operator(), instances::swap2(), Vector{3.0, 1.0}, full_trace());
  ASSERT_TRUE(r.converged());
  EXPECT_LE(distance(r.trace.iterates[0], Vector{1.0, 1.0}), 1e-15);
  EXPECT_LE(norm2(r.solution_image), 1e-8);
  EXPECT_LE(norm2(r.solution_preimage), 1e-8);
}

TEST(Gppa1, FixedPointIsImmediate) {
  const auto r = gppa1(instances::sign_block_operator(), instances::swap2(), kOrigin, SolverConfig{});
  EXPECT_TRUE(r.converged());
  EXPECT_EQ(r.iterations, 1u);
}

TEST(Gppa1, QpLinearFactor) {
  const double kappa = 0.2;
  const auto [f, v] = kkt_operator_pair(DenseMatrix::diagonal(Vector{1.0, 0.0}), Vector{1.0, 0.0}, kappa);
  const auto r = gppa1(f, v, kOrigin, full_trace());
  ASSERT_TRUE(r.converged());
  // Fix T = v(zer F) contains v((1, 0)) = (1.4, 0); the only nonzero eigenvalue is 1.
  const Vector fixed{1.4, 0.0};
  const double factor = (1.0 + 2 * kappa) / (2.0 + 2 * kappa);
  double prev = distance(kOrigin, fixed);
  for (const auto& x : r.trace.iterates) {
    EXPECT_LE(distance(x, fixed), factor * prev + 1e-12);
    prev = distance(x, fixed);
  }
  EXPECT_NEAR(r.solution_preimage[0], 1.0, 1e-7);
}

TEST(Gppa1, FejerInequality) {
  SplitMix64 rng(12);
  for (int run = 0; run < 20; ++run) {
    const Vector x0{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    SolverConfig cfg = full_trace();
    cfg.gamma = GammaSchedule::constant(rng.uniform(0.2, 3.0));
    const auto r = gppa1(instances::sign_block_operator(), instances::swap2(), x0, cfg);
    ASSERT_TRUE(r.converged());
    Vector prev = x0;
    for (const auto& x : r.trace.iterates) {
      const double d0 = dot(prev, prev), d1 = dot(x, x);
      EXPECT_LE(d1, d0 - std::pow(distance(prev, x), 2) + 1e-9 * (1.0 + d0));
      prev = x;
    }
    EXPECT_TRUE(nonincreasing(residual(r), 1e-10));
  }
}

TEST(Gppa2, ScalarHalpernMatchesRecurrence) {
  SolverConfig cfg = full_trace(20000);
  cfg.tol_residual = 1e-300;
  cfg.halpern = HalpernConfig{Vector{4.0}, {}};
  const auto r = gppa2(OperatorExpr::identity(1), OperatorExpr::identity(1), Vector{10.0}, cfg);
  // T(x) = x / 2 and x_{k+1} = 4 / (k + 1) + (1 - 1 / (k + 1)) x_k / 2.
  double x = 10.0;
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    const double a = 1.0 / static_cast<double>(k + 1);
    x = a * 4.0 + (1.0 - a) * 0.5 * x;
    EXPECT_NEAR(r.trace.iterates[k][0], x, 1e-12 * (1.0 + std::abs(x)));
  }
  EXPECT_LE(std::abs(r.trace.iterates.back()[0]), 1e-3);
}

TEST(Gppa2, SignBlockConverges) {
  SolverConfig cfg;
  cfg.max_iters = 10000;
  cfg.halpern = HalpernConfig{Vector{1.0, 1.0}, {}};
  cfg.error_fn = iterate_distance_to(kOrigin);
  cfg.tol_residual = 1e-300;
  const auto r = gppa2(instances::sign_block_operator(), instances::swap2(), Vector{3.0, 1.0}, cfg);
  EXPECT_LE(r.trace.err_to_ref.back(), 1e-3);
}

TEST(Gppa2, AnchorAtFixedPointIsConstant) {
  SolverConfig cfg = full_trace(20);
  cfg.halpern = HalpernConfig{kOrigin, {}};
  const auto r = gppa2(instances::sign_block_operator(), instances::swap2(), kOrigin, cfg);
  for (const auto& x : r.trace.iterates) EXPECT_EQ(x, kOrigin);
}

TEST(Gppa2, ConfigurationErrors) {
  EXPECT_THROW(gppa2(OperatorExpr::identity(1), OperatorExpr::identity(1), Vector{1.0}, SolverConfig{}), Error);
  SolverConfig cfg;
  cfg.halpern = HalpernConfig{Vector{0.0}, {}};
  cfg.gamma = GammaSchedule::sequence({1.0, 2.0});
  EXPECT_THROW(gppa2(OperatorExpr::identity(1), OperatorExpr::identity(1), Vector{1.0}, cfg), Error);
}

TEST(Dca, IdentityHalvesTheError) {
  const Vector b(3, 1.0);
  const auto r = dca_baseline(DenseMatrix::identity(3), b, 1.0, Vector(3), full_trace());
  ASSERT_TRUE(r.converged());
  EXPECT_LE(distance(r.solution_preimage, b), 1e-8);
  const auto& e = r.trace.residual;
  for (std::size_t k = 1; k < e.size(); ++k) EXPECT_NEAR(e[k] / e[k - 1], 0.5, 1e-9);
}

TEST(Dca, IndefiniteDiverges) {
  const auto r = dca_baseline(DenseMatrix::diagonal(Vector{1.0, -1.0}), kOrigin, 2.0, Vector{1.0, 1.0}, SolverConfig{});
  EXPECT_EQ(r.status, SolveStatus::Failed);
  EXPECT_EQ(r.failure_reason, "Diverged");
  // x_k = ((2/3)^k, 2^k), so e_k = |((2/3)^k, -2^k)|.
  const auto& e = r.trace.residual;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double p = static_cast<double>(k + 1);
    EXPECT_NEAR(e[k], std::hypot(std::pow(2.0 / 3.0, p), std::pow(2.0, p)), 1e-12 * e[k]);
  }
}

TEST(Dca, ConsistentStartIsFixed) {
  const DenseMatrix a{{2, 1}, {1, 3}};
  const Vector x0{1.0, -1.0};
  const auto r = dca_baseline(a, matvec(a, x0), 1.0, x0, SolverConfig{});
  EXPECT_TRUE(r.converged());
  EXPECT_EQ(r.solution_preimage, x0);
}

TEST(Trace, DisabledAccessThrows) {
  SolverConfig cfg;
  cfg.trace_level = TraceLevel::None;
  const auto r = gppa(instances::sign_block_operator(), instances::swap2(), Vector{1.0, 1.0}, cfg);
  try {
    residual(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TraceDisabled);
  }
}

TEST(Trace, Deterministic) {
  const auto sys = generate_consistent_system(30, 77, {});
  auto run = [&] { return solve_linear_system(sys.A, sys.b, 0.2, Vector(30), full_trace()); };
  const auto a = run(), b = run();
  EXPECT_EQ(a.trace.residual, b.trace.residual);
  EXPECT_EQ(a.trace.err_to_ref, b.trace.err_to_ref);
  EXPECT_EQ(a.trace.iterates, b.trace.iterates);
}
