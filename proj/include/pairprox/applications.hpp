#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairprox/error.hpp"
#include "pairprox/linalg.hpp"
#include "pairprox/operator_json.hpp"
#include "pairprox/operators.hpp"
#include "pairprox/random.hpp"
#include "pairprox/solvers.hpp"

namespace pairprox {

// ---------------------------------------------------------------------------
// Equality-constrained QP:  min 1/2 y'Qy + c'y  s.t.  Cy = d

struct QPProblem {
  DenseMatrix Q;  // n1 x n1, symmetric
  Vector c;       // n1
  DenseMatrix C;  // n2 x n1 (n2 may be 0)
  Vector d;       // n2

  std::size_t n1() const noexcept { return Q.rows(); }
  std::size_t n2() const noexcept { return C.rows(); }

  void validate() const {
    require(Q.is_square(), ErrorCode::NonSquare, "Q must be square");
    require(Q.is_symmetric(1e-10), ErrorCode::NotSymmetric, "Q must be symmetric");
    check_same_size(c.size(), n1(), "QP c");
    if (n2() > 0) check_same_size(C.cols(), n1(), "QP C columns");
    check_same_size(d.size(), n2(), "QP d");
  }
};

/// Saddle system A x = b with A = [[Q, C'], [C, 0]], b = (-c, d), x = (y, lambda).
struct KKTSystem {
  DenseMatrix A;
  Vector b;
  std::size_t split = 0;  // n1

  Vector primal(const Vector& x) const { return x.slice(0, split); }
  Vector multipliers(const Vector& x) const { return x.slice(split, x.size() - split); }
};

inline KKTSystem build_kkt(const QPProblem& qp) {
  qp.validate();
  const std::size_t n1 = qp.n1();
  const std::size_t n2 = qp.n2();
  const std::size_t n = n1 + n2;
  KKTSystem kkt;
  kkt.A = DenseMatrix(n, n);
  kkt.b = Vector(n);
  kkt.split = n1;
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n1; ++j) kkt.A(i, j) = qp.Q(i, j);
    kkt.b[i] = -qp.c[i];
  }
  for (std::size_t r = 0; r < n2; ++r) {
    for (std::size_t j = 0; j < n1; ++j) {
      kkt.A(n1 + r, j) = qp.C(r, j);
      kkt.A(j, n1 + r) = qp.C(r, j);
    }
    kkt.b[n1 + r] = qp.d[r];
  }
  return kkt;
}

// ---------------------------------------------------------------------------

struct KappaSelection {
  double alpha_abs = 0.0;  // smallest |lambda| among non-zero eigenvalues
  double kappa = 0.0;
  SymmetricEigenDecomposition eigen;
};

/// kappa = fraction * |alpha|, where eigenvalues with |lambda| <= zero_threshold * max|lambda| count as zero.
inline KappaSelection select_kappa(const DenseMatrix& a, double fraction = 0.4, double zero_threshold = 1e-10) {
  require(fraction > 0.0 && fraction < 0.5, ErrorCode::InvalidArgument, "kappa fraction must lie in (0, 0.5)");
  KappaSelection sel;
  sel.eigen = jacobi_eigendecomposition(a);
  const double cutoff = zero_threshold * max_abs(sel.eigen.eigenvalues);
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : sel.eigen.eigenvalues) {
    const double m = std::abs(lambda);
    if (m > cutoff && m > 0.0) best = std::min(best, m);
  }
  if (!std::isfinite(best)) fail(ErrorCode::AllEigenvaluesZero, "every eigenvalue is zero");
  sel.alpha_abs = best;
  sel.kappa = fraction * best;
  return sel;
}

struct PairLemmaReport {
  double min_value = 0.0;   // min over eigenvalues of lambda (lambda + 2 kappa)
  double alpha_abs = 0.0;   // 0 when every eigenvalue is zero
  bool monotone = false;    // min_value >= -1e-12
  bool kappa_below_half_alpha = false;
};

/// Monotonicity of (Ax - b, (A + 2 kappa I) x) for symmetric A via the
/// spectrum of A (A + 2 kappa I).
inline PairLemmaReport verify_pair_lemma(const DenseMatrix& a, double kappa) {
  require(kappa > 0.0, ErrorCode::InvalidArgument, "kappa must be positive");
  const auto eig = jacobi_eigendecomposition(a);
  PairLemmaReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  const double cutoff = 1e-10 * max_abs(eig.eigenvalues);
  double alpha = std::numeric_limits<double>::infinity();
  for (double lambda : eig.eigenvalues) {
    rep.min_value = std::min(rep.min_value, lambda * (lambda + 2.0 * kappa));
    if (std::abs(lambda) > cutoff && lambda != 0.0) alpha = std::min(alpha, std::abs(lambda));
  }
  rep.alpha_abs = std::isfinite(alpha) ? alpha : 0.0;
  rep.monotone = rep.min_value >= -1e-12;
  rep.kappa_below_half_alpha = std::isfinite(alpha) && kappa < alpha / 2.0;
  return rep;
}

// ---------------------------------------------------------------------------

/// F(x) = Ax - b paired with the kernel v(x) = (A + 2 kappa I) x.
inline std::pair<OperatorExpr, OperatorExpr> kkt_operator_pair(const DenseMatrix& a, const Vector& b, double kappa) {
  return {OperatorExpr::affine(a, -b), OperatorExpr::linear(a.shifted(2.0 * kappa))};
}

struct KKTSolveResult {
  SolveResult result;  // err_to_ref column holds e_k = |A x_k - b|
  Vector y;
  Vector lambda;
};

/// GPPA with gamma = 1 on (Ax - b, A + 2 kappa I), i.e.
/// x_{k+1} = (2A + 2 kappa I)^{-1} (A x_k + 2 kappa x_k + b); stops on e_k <= tol_residual.
/// A singular 2A + 2 kappa I surfaces as SingularMatrix on the first step.
inline SolveResult solve_linear_system(const DenseMatrix& a, const Vector& b, double kappa, const Vector& x0,
                                       SolverConfig cfg) {
  require(a.is_symmetric(1e-10), ErrorCode::NotSymmetric, "A must be symmetric");
  check_same_size(a.rows(), b.size(), "right-hand side");
  const auto [f, v] = kkt_operator_pair(a, b, kappa);
  cfg.gamma = GammaSchedule::constant(1.0);
  cfg.converge_on_error = true;
  cfg.error_fn = [&a, &b](const IterateView& it) { return distance(matvec(a, it.preimage), b); };
  return gppa(f, v, x0, cfg);
}

inline KKTSolveResult solve_kkt(const KKTSystem& kkt, double kappa, const Vector& x0, const SolverConfig& cfg) {
  KKTSolveResult out;
  out.result = solve_linear_system(kkt.A, kkt.b, kappa, x0, cfg);
  out.y = kkt.primal(out.result.solution_preimage);
  out.lambda = kkt.multipliers(out.result.solution_preimage);
  return out;
}

struct LeastSquaresResult {
  SolveResult result;                // err_to_ref column holds r_k = |A^2 x_k - A b|
  std::vector<double> residual_ls;   // r_k for k = 0..iterations
  std::vector<double> error;         // e_k = |A x_k - b| for k = 0..iterations
  std::vector<double> image_step;    // |A (x_{k+1} - x_k)| for k = 0..iterations-1
};

/// Same iteration as solve_linear_system, for b possibly outside ran A;
/// stops on r_k = |A^2 x_k - A b| <= tol_residual.
inline LeastSquaresResult least_squares_iterate(const DenseMatrix& a, const Vector& b, double kappa,
                                                const Vector& x0, SolverConfig cfg) {
  require(a.is_symmetric(1e-10), ErrorCode::NotSymmetric, "A must be symmetric");
  check_same_size(a.rows(), b.size(), "right-hand side");
  const Vector ab = matvec(a, b);
  LeastSquaresResult out;
  Vector prev_ax = matvec(a, x0);
  out.error.push_back(distance(prev_ax, b));
  out.residual_ls.push_back(distance(matvec(a, prev_ax), ab));

  const auto [f, v] = kkt_operator_pair(a, b, kappa);
  cfg.gamma = GammaSchedule::constant(1.0);
  cfg.converge_on_error = true;
  cfg.error_fn = [&a, &ab](const IterateView& it) { return distance(matvec(a, matvec(a, it.preimage)), ab); };
  auto user_observer = cfg.observer;
  cfg.observer = [&](std::size_t iter, const IterateView& it) {
    Vector ax = matvec(a, it.preimage);
    out.error.push_back(distance(ax, b));
    out.residual_ls.push_back(distance(matvec(a, ax), ab));
    out.image_step.push_back(distance(ax, prev_ax));
    prev_ax = std::move(ax);
    if (user_observer) user_observer(iter, it);
  };
  out.result = gppa(f, v, x0, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// Seeded consistent test systems: A = V diag(lambda) V', b = A z.

struct GeneratorParams {
  double spectrum_lo = 0.5;  // |lambda| drawn uniformly from [lo, hi] with random sign
  double spectrum_hi = 2.0;
  double zero_fraction = 0.1;
};

struct ConsistentSystem {
  DenseMatrix A;
  Vector b;
  Vector z;  // a solution of A x = b
  Vector eigenvalues;
};

inline DenseMatrix random_orthogonal(std::size_t n, SplitMix64& rng) {
  DenseMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  return householder_q(g);
}

/// Symmetric V diag(lambda) V'.
inline DenseMatrix spectral_matrix(const DenseMatrix& vmat, const Vector& lambda) {
  const std::size_t n = vmat.rows();
  DenseMatrix w = vmat;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) w(i, k) *= lambda[k];
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double s = dot(w.row(i), vmat.row(j));
      a(i, j) = s;
      a(j, i) = s;
    }
  }
  return a;
}

/// round(zero_fraction * n) eigenvalues are exactly 0, the rest have
/// magnitude uniform in [spectrum_lo, spectrum_hi] and a fair random sign.
inline ConsistentSystem generate_consistent_system(std::size_t n, std::uint64_t seed,
                                                   const GeneratorParams& params = {}) {
  require(n >= 1, ErrorCode::InvalidArgument, "generator needs n >= 1");
  require(params.spectrum_lo > 0.0 && params.spectrum_lo <= params.spectrum_hi, ErrorCode::InvalidArgument,
          "spectrum interval must satisfy 0 < lo <= hi");
  require(params.zero_fraction >= 0.0 && params.zero_fraction < 1.0, ErrorCode::InvalidArgument,
          "zero fraction must lie in [0, 1)");
  SplitMix64 rng(seed);
  const DenseMatrix vmat = random_orthogonal(n, rng);
  const auto zeros = static_cast<std::size_t>(std::llround(params.zero_fraction * static_cast<double>(n)));
  ConsistentSystem sys;
  sys.eigenvalues = Vector(n);
  for (std::size_t i = zeros; i < n; ++i) {
    const double mag = rng.uniform(params.spectrum_lo, params.spectrum_hi);
    sys.eigenvalues[i] = rng.uniform() < 0.5 ? -mag : mag;
  }
  sys.A = spectral_matrix(vmat, sys.eigenvalues);
  sys.z = Vector(n);
  for (std::size_t i = 0; i < n; ++i) sys.z[i] = rng.gaussian();
  sys.b = matvec(sys.A, sys.z);
  return sys;
}

// ---------------------------------------------------------------------------
// Problem files
//   QP:            {"Q": <matrix>, "c": [...], "C": <matrix>, "d": [...]}   (C, d optional)
//   least squares: {"A": <matrix>, "b": [...]}
// <matrix> is an inline [[...]], a file name, {"matrix": [[...]]} or {"matrix-file": ...}.

inline QPProblem qp_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    QPProblem qp;
    qp.Q = matrix_from_json(detail::json_field(j, "Q"), base_dir);
    qp.c = detail::json_vector(detail::json_field(j, "c"));
    if (j.contains("C")) {
      qp.C = matrix_from_json(j.at("C"), base_dir);
      qp.d = detail::json_vector(detail::json_field(j, "d"));
    } else {
      qp.C = DenseMatrix(0, qp.Q.rows());
    }
    qp.validate();
    return qp;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("QP json: ") + e.what());
  }
}

inline QPProblem read_qp_file(const std::string& path) {
  return qp_from_json(read_json_file(path), std::filesystem::path(path).parent_path());
}

struct LinearProblem {
  DenseMatrix A;
  Vector b;
};

inline LinearProblem read_linear_problem_file(const std::string& path) {
  const auto j = read_json_file(path);
  try {
    LinearProblem p;
    p.A = matrix_from_json(detail::json_field(j, "A"), std::filesystem::path(path).parent_path());
    p.b = detail::json_vector(detail::json_field(j, "b"));
    require(p.A.is_square(), ErrorCode::NonSquare, "A must be square");
    check_same_size(p.A.rows(), p.b.size(), "b");
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
}

}  // namespace pairprox
