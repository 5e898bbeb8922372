#pragma once

#include <utility>

#include "pairprox/linalg.hpp"
#include "pairprox/operators.hpp"

// Small reference instances used by the demos and the test suites.
namespace pairprox::instances {

/// v(x1, x2) = (x2, x1)
inline OperatorExpr swap2() { return OperatorExpr::permutation({1, 0}); }

/// F(x1, x2) = (x2 + |sin x1|, x1 - cos|x2|). F alone is not monotone,
/// (F, swap) is.
inline OperatorExpr trig_block_operator() {
  return OperatorExpr::sum({
      OperatorExpr::linear(DenseMatrix{{0.0, 1.0}, {1.0, 0.0}}),
      OperatorExpr::stack(2, {{0, 1, OperatorExpr::pointwise("abs-sin", 1)},
                              {1, 1, OperatorExpr::pointwise("neg-cos-abs", 1)}}),
  });
}

/// F(x1, x2) = (Sign(x2) + x1, Sign(x1) - x2); set-valued, not monotone,
/// (F, swap) monotone, unique zero (0, 0).
inline OperatorExpr sign_block_operator() {
  return OperatorExpr::sum({
      OperatorExpr::sign_block(1.0, {1, 0}),
      OperatorExpr::linear(DenseMatrix{{1.0, 0.0}, {0.0, -1.0}}),
  });
}

/// Non-symmetric A with <Ax, (A + 2 kappa I) x> = -1/2 at x = (0, -3, 2), kappa = 1/4.
inline DenseMatrix nonsymmetric_counterexample() { return DenseMatrix{{0, 0, 0}, {0, 1, 2}, {0, -2, -3}}; }
inline Vector counterexample_point() { return Vector{0.0, -3.0, 2.0}; }
inline constexpr double kCounterexampleKappa = 0.25;

}  // namespace pairprox::instances
