#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pairprox/applications.hpp"
#include "pairprox/instances.hpp"
#include "pairprox/operator_json.hpp"
#include "pairprox/operators.hpp"

using namespace pairprox;

TEST(Evaluate, SignAtNonzerosIsSingleton) {
  const auto vs = evaluate(OperatorExpr::sign_block(1.0, {0, 1}), Vector{2.0, -3.0});
  ASSERT_TRUE(vs.is_singleton());
  EXPECT_EQ(vs.point(), (Vector{1.0, -1.0}));
}

TEST(Evaluate, SignAtZeroIsUnitInterval) {
  const auto vs = evaluate(OperatorExpr::sign_block(1.0, {0}), Vector{0.0});
  ASSERT_FALSE(vs.is_singleton());
  EXPECT_EQ(vs.lower(), Vector{-1.0});
  EXPECT_EQ(vs.upper(), Vector{1.0});
}

TEST(Evaluate, TrigBlockAtOrigin) {
  const auto vs = evaluate(instances::trig_block_operator(), Vector{0.0, 0.0});
  ASSERT_TRUE(vs.is_singleton());
  EXPECT_EQ(vs.point(), (Vector{0.0, -1.0}));
}

TEST(Evaluate, TrigBlockMatchesFormula) {
  SplitMix64 rng(3);
  const auto f = instances::trig_block_operator();
  for (int k = 0; k < 200; ++k) {
    const double a = rng.uniform(-7.0, 7.0), b = rng.uniform(-7.0, 7.0);
    const Vector fx = evaluate_point(f, Vector{a, b});
    EXPECT_NEAR(fx[0], b + std::abs(std::sin(a)), 1e-15);
    EXPECT_NEAR(fx[1], a - std::cos(std::abs(b)), 1e-15);
  }
}

TEST(Evaluate, SumOfBoxAndSingletonIsTranslatedBox) {
  const auto f = instances::sign_block_operator();
  const auto vs = evaluate(f, Vector{0.0, 2.0});
  // (Sign(2) + 0, Sign(0) - 2) = (1, [-3, -1])
  EXPECT_EQ(vs.lower(), (Vector{1.0, -3.0}));
  EXPECT_EQ(vs.upper(), (Vector{1.0, -1.0}));
  EXPECT_THROW(evaluate_point(f, Vector{0.0, 2.0}), Error);
}

TEST(Evaluate, ErrorsAreTyped) {
  try {
    evaluate(OperatorExpr::identity(2), Vector{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    OperatorExpr::pointwise("no-such-map", 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownRegistryKey);
  }
  EXPECT_THROW(OperatorExpr::permutation({0, 0}), Error);
  EXPECT_THROW(OperatorExpr::scale(0.0, OperatorExpr::identity(1)), Error);
  EXPECT_THROW(OperatorExpr::sum({OperatorExpr::identity(1), OperatorExpr::identity(2)}), Error);
}

TEST(Evaluate, Deterministic) {
  const auto f = instances::trig_block_operator();
  const Vector x{0.3, -1.7};
  EXPECT_EQ(evaluate(f, x).point(), evaluate(f, x).point());
}

TEST(Evaluate, PermutationIsIsometry) {
  SplitMix64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + k % 7;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.next() % i]);
    std::vector<double> signs(n);
    for (auto& s : signs) s = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const auto p = OperatorExpr::permutation(perm, signs);
    Vector x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.gaussian(), y[i] = rng.gaussian();
    EXPECT_NEAR(distance(evaluate_point(p, x), evaluate_point(p, y)), distance(x, y), 1e-14);
  }
}

TEST(Registry, UserExtension) {
  PointwiseRegistry::instance().add("cube-test", {[](double t) { return t * t * t; }, std::nullopt});
  EXPECT_EQ(evaluate_point(OperatorExpr::pointwise("cube-test", 2), Vector{2.0, -1.0}), (Vector{8.0, -1.0}));
}

TEST(Select, Strategies) {
  const auto box = ValueSet::box(Vector{-1.0}, Vector{1.0});
  EXPECT_EQ(select(box, Selection::Midpoint), Vector{0.0});
  EXPECT_EQ(select(box, Selection::ExtremeHigh), Vector{1.0});
  EXPECT_EQ(select(box, Selection::ExtremeLow), Vector{-1.0});
  const auto single = ValueSet::singleton(Vector{5.0});
  for (auto s : {Selection::ExtremeLow, Selection::ExtremeHigh, Selection::Midpoint}) {
    EXPECT_EQ(select(single, s), Vector{5.0});
  }
}

TEST(PairCheck, TrigBlockWithSwap) {
  const auto rep = check_pair_monotone(instances::trig_block_operator(), instances::swap2(),
                                       SampleBox::cube(2, -5.0, 5.0), 10000, 1);
  EXPECT_FALSE(rep.violated());
  EXPECT_GE(rep.min_inner_product, -1e-12);
  // F alone (paired with the identity) is not monotone.
  EXPECT_TRUE(check_pair_monotone(instances::trig_block_operator(), OperatorExpr::identity(2),
                                  SampleBox::cube(2, -5.0, 5.0), 10000, 1)
                  .violated());
}

TEST(PairCheck, SignBlockWithSwap) {
  const auto rep = check_pair_monotone(instances::sign_block_operator(), instances::swap2(),
                                       SampleBox::cube(2, -5.0, 5.0), 10000, 2);
  EXPECT_FALSE(rep.violated());
}

TEST(PairCheck, NonsymmetricCounterexample) {
  const DenseMatrix a = instances::nonsymmetric_counterexample();
  const auto f = OperatorExpr::linear(a);
  const auto v = OperatorExpr::linear(a.shifted(2.0 * instances::kCounterexampleKappa));
  const auto rep = check_pair_monotone(f, v, SampleBox::cube(3, -0.5, 0.5), 1000, 3,
                                       {{instances::counterexample_point(), Vector(3)}});
  ASSERT_TRUE(rep.violated());
  EXPECT_NEAR(rep.min_inner_product, -0.5, 1e-12);
  ASSERT_EQ(rep.explicit_pairs.size(), 1u);
  EXPECT_NEAR(rep.explicit_pairs[0].inner_product, -0.5, 1e-12);
}

TEST(PairCheck, IdentityQuotientIsOne) {
  const auto id = OperatorExpr::identity(4);
  const auto rep = check_pair_monotone(id, id, SampleBox::cube(4, -3.0, 7.0), 500, 4);
  EXPECT_FALSE(rep.violated());
  EXPECT_GE(rep.min_quotient, 1.0 - 1e-12);
}

TEST(PairCheck, SymmetricPsdAffineIsClassicallyMonotone) {
  SplitMix64 rng(21);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 2 + k % 5;
    DenseMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.gaussian();
    const DenseMatrix s = matmul(g.transpose(), g);
    Vector c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = rng.gaussian();
    const auto rep = check_pair_monotone(OperatorExpr::affine(s, c), OperatorExpr::identity(n),
                                         SampleBox::cube(n, -10.0, 10.0), 300, 100 + k);
    EXPECT_FALSE(rep.violated());
  }
}

TEST(PairCheck, ViolationWitnessReevaluates) {
  std::vector<OperatorExpr> fs{instances::trig_block_operator(), OperatorExpr::linear(DenseMatrix{{0, 1}, {-1, -1}}),
                               instances::sign_block_operator()};
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto rep = check_pair_monotone(fs[k], OperatorExpr::identity(2), SampleBox::cube(2, -5.0, 5.0), 2000, k);
    ASSERT_TRUE(rep.violated()) << k;
    const auto& w = rep.witness();
    EXPECT_LT(w.inner_product, -1e-12);
    EXPECT_NEAR(pair_inner_product(w), w.inner_product, 1e-12);
    EXPECT_TRUE(evaluate(fs[k], w.x).contains(w.fx, 0.0));
    EXPECT_TRUE(evaluate(fs[k], w.y).contains(w.fy, 0.0));
  }
}

TEST(PairCheck, WorkerCountDoesNotChangeResult) {
  const auto f = instances::trig_block_operator();
  const auto box = SampleBox::cube(2, -5.0, 5.0);
  const auto one = check_pair_monotone(f, OperatorExpr::identity(2), box, 3001, 8, {}, 1);
  const auto four = check_pair_monotone(f, OperatorExpr::identity(2), box, 3001, 8, {}, 4);
  EXPECT_EQ(one.min_quotient, four.min_quotient);
  EXPECT_EQ(one.min_inner_product, four.min_inner_product);
  EXPECT_EQ(one.witness().x, four.witness().x);
  EXPECT_EQ(one.sample_count, four.sample_count);
}

TEST(StrongModulus, ScaledIdentity) {
  const auto id = OperatorExpr::identity(3);
  const double a = check_pair_strongly_monotone(OperatorExpr::scale(2.0, id), id, SampleBox::cube(3, -10, 10), 1000, 1);
  EXPECT_NEAR(a, 2.0, 1e-9);
}

TEST(StrongModulus, KernelDirectionGivesZero) {
  const double a = check_pair_strongly_monotone(OperatorExpr::linear(DenseMatrix::diagonal(Vector{1.0, 0.0})),
                                                OperatorExpr::identity(2), SampleBox::cube(2, -10, 10), 1000, 1);
  EXPECT_EQ(a, 0.0);
}

TEST(StrongModulus, KktPairOnAndOffTheRange) {
  const Vector lambda{1.0, 0.0, -0.5};
  const DenseMatrix a = DenseMatrix::diagonal(lambda);
  const double kappa = 0.2;
  const auto [f, v] = kkt_operator_pair(a, Vector{0.3, 0.0, -1.0}, kappa);
  EXPECT_EQ(check_pair_strongly_monotone(f, v, SampleBox::cube(3, -10, 10), 2000, 5), 0.0);

  // Oracle: the quotient along eigendirection i is lambda_i (lambda_i + 2 kappa);
  // on span{e1, e3} the minimum over directions is the smallest of these.
  double oracle = std::numeric_limits<double>::infinity();
  for (std::size_t i : {0u, 2u}) oracle = std::min(oracle, lambda[i] * (lambda[i] + 2.0 * kappa));
  EXPECT_NEAR(oracle, 0.05, 1e-15);
  const SampleBox range_box{Vector{-10.0, 0.0, -10.0}, Vector{10.0, 0.0, 10.0}};
  const double est = check_pair_strongly_monotone(f, v, range_box, 2000, 5);
  EXPECT_GE(est, oracle - 1e-12);
  EXPECT_NEAR(est, oracle, 1e-9);
}

TEST(OperatorJson, RoundTrip) {
  const auto f = instances::trig_block_operator();
  const auto g = operator_from_json(to_json(f));
  SplitMix64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vector x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    EXPECT_EQ(evaluate_point(f, x), evaluate_point(g, x));
  }
  const auto s = instances::sign_block_operator();
  EXPECT_EQ(to_json(operator_from_json(to_json(s))), to_json(s));
}

TEST(OperatorJson, MatrixFileReference) {
  const std::string dir = PAIRPROX_DATA_DIR;
  const auto f = operator_from_json(read_json_file(dir + "/counterexample_pair.json").at("F"), dir);
  EXPECT_EQ(evaluate_point(f, instances::counterexample_point()),
            matvec(instances::nonsymmetric_counterexample(), instances::counterexample_point()));
  EXPECT_THROW(operator_from_json(nlohmann::json{{"kind", "affine"}, {"matrix-file", "malformed_matrix.txt"}}, dir),
               Error);
  EXPECT_THROW(operator_from_json(nlohmann::json{{"kind", "warp"}}), Error);
}
