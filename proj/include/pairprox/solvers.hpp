#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairprox/error.hpp"
#include "pairprox/linalg.hpp"
#include "pairprox/operators.hpp"
#include "pairprox/resolvents.hpp"

namespace pairprox {

/// Step sizes gamma_n. A single value is a constant schedule; a longer list
/// is used in order and its last entry repeats.
class GammaSchedule {
 public:
  static GammaSchedule constant(double gamma) { return GammaSchedule({gamma}); }
  static GammaSchedule sequence(std::vector<double> gammas) { return GammaSchedule(std::move(gammas)); }

  double at(std::size_t n) const { return values_[std::min(n, values_.size() - 1)]; }
  bool is_constant() const noexcept { return values_.size() == 1; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  explicit GammaSchedule(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), ErrorCode::InvalidArgument, "empty gamma schedule");
    for (double g : values_) require(g > 0.0 && std::isfinite(g), ErrorCode::InvalidArgument, "gamma must be > 0");
  }
  std::vector<double> values_;
};

/// Anchored (Halpern) averaging. An empty alpha list means alpha_k = 1/(k+1).
struct HalpernConfig {
  Vector anchor;
  std::vector<double> alphas;

  double alpha(std::size_t k) const {
    if (alphas.empty()) return 1.0 / static_cast<double>(k + 1);
    return alphas[std::min(k, alphas.size() - 1)];
  }
};

enum class TraceLevel { None, Norms, Full };

/// What an iteration produced. For GPPA the iterate is the preimage x_{n+1}
/// and image = v(x_{n+1}); for GPPA1 the iterate is image = T(x_n) with
/// preimage z_{n+1}; for GPPA2 the iterate is the anchored average.
struct IterateView {
  const Vector& iterate;
  const Vector& preimage;
  const Vector& image;
};

struct SolverConfig {
  GammaSchedule gamma = GammaSchedule::constant(1.0);
  double tol_residual = 1e-8;
  double tol_step = 0.0;
  std::size_t max_iters = 100000;
  std::optional<HalpernConfig> halpern;
  TraceLevel trace_level = TraceLevel::Norms;

  // Fills the err_to_ref trace column when set.
  std::function<double(const IterateView&)> error_fn;
  // Stop on error_fn <= tol_residual instead of |u_n| <= tol_residual.
  bool converge_on_error = false;
  std::function<void(std::size_t iter, const IterateView&)> observer;
};

inline std::function<double(const IterateView&)> image_distance_to(Vector reference) {
  return [ref = std::move(reference)](const IterateView& it) { return distance(it.image, ref); };
}

inline std::function<double(const IterateView&)> iterate_distance_to(Vector reference) {
  return [ref = std::move(reference)](const IterateView& it) { return distance(it.iterate, ref); };
}

struct IterationTrace {
  TraceLevel level = TraceLevel::Norms;
  std::vector<double> residual;    // |u_n|
  std::vector<double> step;        // |x_{n+1} - x_n|
  std::vector<double> err_to_ref;  // NaN when no error_fn is configured
  std::vector<double> seconds;     // cumulative wall time
  std::vector<Vector> iterates;    // Full only
  std::vector<Vector> preimages;   // Full only
  std::vector<Vector> images;      // Full only

  std::size_t size() const noexcept { return residual.size(); }
};

enum class SolveStatus { Converged, MaxIters, Failed };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::Failed: return "Failed";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIters;
  std::string failure_reason;  // set when status == Failed
  Vector solution_preimage;
  Vector solution_image;
  std::size_t iterations = 0;
  // Value compared with tol_residual at the stopping test.
  double final_metric = std::numeric_limits<double>::quiet_NaN();
  IterationTrace trace;
  std::vector<std::string> warnings;

  bool converged() const noexcept { return status == SolveStatus::Converged; }
};

/// Recorded residual norms |u_n|.
inline const std::vector<double>& residual(const IterationTrace& trace) {
  require(trace.level != TraceLevel::None, ErrorCode::TraceDisabled, "trace level None records no residuals");
  return trace.residual;
}

inline const std::vector<double>& residual(const SolveResult& result) { return residual(result.trace); }

namespace detail {

class EngineCache {
 public:
  EngineCache(const OperatorExpr& f, const OperatorExpr& v) : f_(f), v_(v) {}

  const ResolventEngine& get(double gamma) {
    auto it = engines_.find(gamma);
    if (it == engines_.end()) it = engines_.emplace(gamma, ResolventEngine(f_, v_, gamma)).first;
    return it->second;
  }

 private:
  const OperatorExpr& f_;
  const OperatorExpr& v_;
  std::map<double, ResolventEngine> engines_;
};

class TraceRecorder {
 public:
  explicit TraceRecorder(const SolverConfig& cfg) : cfg_(cfg), start_(std::chrono::steady_clock::now()) {
    trace_.level = cfg.trace_level;
  }

  double error(const IterateView& view) const {
    return cfg_.error_fn ? cfg_.error_fn(view) : std::numeric_limits<double>::quiet_NaN();
  }

  void record(double residual, double step, double err, const IterateView& view) {
    if (cfg_.trace_level == TraceLevel::None) return;
    trace_.residual.push_back(residual);
    trace_.step.push_back(step);
    trace_.err_to_ref.push_back(err);
    trace_.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
    if (cfg_.trace_level == TraceLevel::Full) {
      trace_.iterates.push_back(view.iterate);
      trace_.preimages.push_back(view.preimage);
      trace_.images.push_back(view.image);
    }
  }

  IterationTrace take() { return std::move(trace_); }

 private:
  const SolverConfig& cfg_;
  std::chrono::steady_clock::time_point start_;
  IterationTrace trace_;
};

inline void require_finite(const Vector& x, std::size_t iter) {
  if (!x.all_finite()) fail(ErrorCode::NonFiniteIterate, "non-finite iterate at iteration " + std::to_string(iter));
}

inline void validate_config(const SolverConfig& cfg, SolveResult& result) {
  require(cfg.tol_residual > 0.0, ErrorCode::InvalidArgument, "tol_residual must be positive");
  require(cfg.tol_step >= 0.0, ErrorCode::InvalidArgument, "tol_step must be non-negative");
  require(!cfg.converge_on_error || cfg.error_fn, ErrorCode::InvalidArgument, "converge_on_error needs error_fn");
  if (!cfg.gamma.is_constant()) {
    double total = 0.0;
    for (std::size_t n = 0; n < cfg.max_iters && total < 1e6; ++n) total += cfg.gamma.at(n) * cfg.gamma.at(n);
    if (total < 1e6) {
      result.warnings.push_back("gamma schedule has sum of squares " + std::to_string(total) + " < 1e6 over max_iters;"
                                " the divergent-sum condition may not hold");
    }
  }
}

// Shared stopping logic. Returns true when the loop should stop.
inline bool check_stop(const SolverConfig& cfg, double residual, double step, double err, SolveResult& result) {
  const double metric = cfg.converge_on_error ? err : residual;
  result.final_metric = metric;
  if (metric <= cfg.tol_residual) {
    result.status = SolveStatus::Converged;
    return true;
  }
  if (step <= cfg.tol_step) {
    result.status = SolveStatus::Failed;
    result.failure_reason = "Stalled";
    return true;
  }
  return false;
}

}  // namespace detail

/// GPPA: x_{n+1} = J_{gamma_n F}^v(x_n), u_n = (v(x_n) - v(x_{n+1})) / gamma_n.
inline SolveResult gppa(const OperatorExpr& f, const OperatorExpr& v, const Vector& x0, const SolverConfig& cfg) {
  check_same_size(f.dim(), x0.size(), "gppa initial point");
  SolveResult result;
  detail::validate_config(cfg, result);
  detail::EngineCache engines(f, v);
  detail::TraceRecorder recorder(cfg);

  Vector x = x0;
  Vector vx = engines.get(cfg.gamma.at(0)).apply_v(x);
  result.status = SolveStatus::MaxIters;
  if (cfg.converge_on_error) {
    const double e0 = recorder.error({x, x, vx});
    result.final_metric = e0;
    if (e0 <= cfg.tol_residual) result.status = SolveStatus::Converged;
  }

  for (std::size_t n = 0; n < cfg.max_iters && result.status == SolveStatus::MaxIters; ++n) {
    const double gamma = cfg.gamma.at(n);
    ResolventOutput out = engines.get(gamma).warped_from_image(vx);
    detail::require_finite(out.preimage, n + 1);
    detail::require_finite(out.image, n + 1);
    const double res = distance(vx, out.image) / gamma;
    const double step = distance(x, out.preimage);
    x = std::move(out.preimage);
    vx = std::move(out.image);
    const IterateView view{x, x, vx};
    const double err = recorder.error(view);
    recorder.record(res, step, err, view);
    if (cfg.observer) cfg.observer(n + 1, view);
    result.iterations = n + 1;
    if (detail::check_stop(cfg, res, step, err, result)) break;
  }
  result.solution_preimage = std::move(x);
  result.solution_image = std::move(vx);
  result.trace = recorder.take();
  return result;
}

/// GPPA1: x_{n+1} = T_{gamma_n F}^v(x_n) with x_0 in ran v,
/// u_n = (x_n - x_{n+1}) / gamma_n. The preimage z_{n+1} of each step is kept;
/// the last one is the recovered solution candidate.
inline SolveResult gppa1(const OperatorExpr& f, const OperatorExpr& v, const Vector& x0, const SolverConfig& cfg) {
  check_same_size(f.dim(), x0.size(), "gppa1 initial point");
  SolveResult result;
  detail::validate_config(cfg, result);
  detail::EngineCache engines(f, v);
  detail::TraceRecorder recorder(cfg);

  Vector x = x0;
  Vector z;
  result.status = SolveStatus::MaxIters;
  for (std::size_t n = 0; n < cfg.max_iters; ++n) {
    const double gamma = cfg.gamma.at(n);
    ResolventOutput out = engines.get(gamma).transformed(x);
    detail::require_finite(out.preimage, n + 1);
    detail::require_finite(out.image, n + 1);
    const double step = distance(x, out.image);
    const double res = step / gamma;
    x = std::move(out.image);
    z = std::move(out.preimage);
    const IterateView view{x, z, x};
    const double err = recorder.error(view);
    recorder.record(res, step, err, view);
    if (cfg.observer) cfg.observer(n + 1, view);
    result.iterations = n + 1;
    if (detail::check_stop(cfg, res, step, err, result)) break;
  }
  result.solution_preimage = std::move(z);
  result.solution_image = std::move(x);
  result.trace = recorder.take();
  return result;
}

/// GPPA2: x_{k+1} = alpha_k a + (1 - alpha_k) T_{gamma F}^v(x_k) with anchor a.
/// Returns the preimage of the last resolvent evaluation and its image.
inline SolveResult gppa2(const OperatorExpr& f, const OperatorExpr& v, const Vector& x0, const SolverConfig& cfg) {
  check_same_size(f.dim(), x0.size(), "gppa2 initial point");
  require(cfg.halpern.has_value(), ErrorCode::InvalidArgument, "gppa2 needs a Halpern anchor");
  require(cfg.gamma.is_constant(), ErrorCode::InvalidArgument, "gppa2 uses a constant gamma");
  const HalpernConfig& h = *cfg.halpern;
  check_same_size(h.anchor.size(), x0.size(), "gppa2 anchor");
  SolveResult result;
  detail::validate_config(cfg, result);
  const double gamma = cfg.gamma.at(0);
  const ResolventEngine engine(f, v, gamma);
  detail::TraceRecorder recorder(cfg);

  Vector x = x0;
  ResolventOutput last;
  result.status = SolveStatus::MaxIters;
  for (std::size_t k = 0; k < cfg.max_iters; ++k) {
    last = engine.transformed(x);
    detail::require_finite(last.image, k + 1);
    const double alpha = h.alpha(k);
    require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::InvalidArgument, "Halpern weights must lie in [0, 1]");
    Vector next = alpha * h.anchor + (1.0 - alpha) * last.image;
    detail::require_finite(next, k + 1);
    const double step = distance(x, next);
    const double res = step / gamma;
    x = std::move(next);
    const IterateView view{x, last.preimage, last.image};
    const double err = recorder.error(view);
    recorder.record(res, step, err, view);
    if (cfg.observer) cfg.observer(k + 1, view);
    result.iterations = k + 1;
    if (detail::check_stop(cfg, res, step, err, result)) break;
  }
  result.solution_preimage = std::move(last.preimage);
  result.solution_image = std::move(last.image);
  result.trace = recorder.take();
  return result;
}

/// DCA baseline for Ax = b with A = (A + mI) - mI:
/// (A + mI) x_{k+1} = m x_k + b. Reports e_k = |A x_k - b| as residual.
/// Fails with "Diverged" once e_k > 1e8 (1 + e_0).
inline SolveResult dca_baseline(const DenseMatrix& a, const Vector& b, double m, const Vector& x0,
                                const SolverConfig& cfg) {
  require(a.is_symmetric(1e-10), ErrorCode::NotSymmetric, "DCA baseline expects a symmetric matrix");
  check_same_size(a.rows(), b.size(), "dca right-hand side");
  check_same_size(a.rows(), x0.size(), "dca initial point");
  require(m > 0.0, ErrorCode::InvalidArgument, "DCA shift m must be positive");
  const auto lu = lu_factorize(a.shifted(m));
  require(!lu.singular, ErrorCode::SingularMatrix, "A + mI is singular");

  SolveResult result;
  detail::TraceRecorder recorder(cfg);
  auto error_of = [&](const Vector& x) { return distance(matvec(a, x), b); };
  Vector x = x0;
  const double e0 = error_of(x);
  result.final_metric = e0;
  result.status = e0 <= cfg.tol_residual ? SolveStatus::Converged : SolveStatus::MaxIters;
  for (std::size_t k = 0; k < cfg.max_iters && result.status == SolveStatus::MaxIters; ++k) {
    Vector rhs = m * x;
    rhs += b;
    Vector next = lu_solve(lu, rhs);
    detail::require_finite(next, k + 1);
    const double step = distance(x, next);
    x = std::move(next);
    const double e = error_of(x);
    const IterateView view{x, x, x};
    recorder.record(e, step, e, view);
    if (cfg.observer) cfg.observer(k + 1, view);
    result.iterations = k + 1;
    result.final_metric = e;
    if (e <= cfg.tol_residual) {
      result.status = SolveStatus::Converged;
    } else if (e > 1e8 * (1.0 + e0)) {
      result.status = SolveStatus::Failed;
      result.failure_reason = "Diverged";
    }
  }
  result.solution_preimage = x;
  result.solution_image = std::move(x);
  result.trace = recorder.take();
  return result;
}

}  // namespace pairprox
