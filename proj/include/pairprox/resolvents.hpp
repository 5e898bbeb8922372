#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pairprox/error.hpp"
#include "pairprox/linalg.hpp"
#include "pairprox/operators.hpp"

namespace pairprox {

/// Unique z with y in s*Sign(z) + c*z + d, for s >= 0 and c > 0.
inline double scalar_sign_affine_inverse(double s, double c, double d, double y) {
  require(c > 0.0, ErrorCode::NonPositiveSlope, "slope must be positive, got " + std::to_string(c));
  require(s >= 0.0, ErrorCode::InvalidArgument, "sign scale must be non-negative");
  const double r = y - d;
  if (r > s) return (r - s) / c;
  if (r < -s) return (r + s) / c;
  return 0.0;
}

struct ResolventOutput {
  Vector preimage;  // z in (gamma F + v)^{-1}(input)
  Vector image;     // v(z)
};

enum class ResolventStrategy { AffineAffine, SignSeparable, Unsupported };

inline const char* to_string(ResolventStrategy s) {
  switch (s) {
    case ResolventStrategy::AffineAffine: return "AffineAffine";
    case ResolventStrategy::SignSeparable: return "SignSeparable";
    case ResolventStrategy::Unsupported: return "Unsupported";
  }
  return "?";
}

inline constexpr double kMembershipTolerance = 1e-9;

/// Evaluates (gamma F + v)^{-1} by structural dispatch, and from it the warped
/// resolvent J = (gamma F + v)^{-1} o v and the transformed resolvent
/// T = v o (gamma F + v)^{-1}.
///
/// Immutable after construction; evaluation is safe from several threads.
class ResolventEngine {
 public:
  ResolventEngine(OperatorExpr f, OperatorExpr v, double gamma);

  ResolventStrategy strategy() const noexcept { return strategy_; }
  double gamma() const noexcept { return gamma_; }
  const OperatorExpr& f() const noexcept { return f_; }
  const OperatorExpr& v() const noexcept { return v_; }
  const std::string& unsupported_reason() const noexcept { return reason_; }

  /// Matrix of gamma F + v in the AffineAffine case.
  const DenseMatrix& system_matrix() const;
  const LUFactorization& factorization() const;

  /// Some z with y in (gamma F + v)(z).
  Vector solve_inclusion(const Vector& y) const;

  /// J(x): z in (gamma F + v)^{-1}(v(x)), image v(z).
  ResolventOutput warped(const Vector& x) const { return warped_from_image(apply_v(x)); }

  /// J given the precomputed value v(x); lets iterations reuse v(x_n).
  ResolventOutput warped_from_image(const Vector& vx) const;

  /// T(x): z in (gamma F + v)^{-1}(x), image v(z).
  ResolventOutput transformed(const Vector& x) const;

  Vector apply_v(const Vector& x) const { return evaluate_point(v_, x); }

  /// Largest coordinate distance from input - v(z) to gamma F(z).
  double membership_gap(const Vector& input, const ResolventOutput& out) const {
    return evaluate(scaled_f_, out.preimage).distance_inf(input - out.image);
  }

 private:
  struct Component {
    std::vector<std::size_t> indices;  // z-coordinates, ascending
    bool has_sign = false;
    std::optional<LUFactorization> linear;  // sign-free components
  };

  void require_supported() const {
    if (strategy_ == ResolventStrategy::Unsupported) {
      fail(ErrorCode::UnsupportedStructure, "no closed-form resolvent: " + reason_);
    }
  }

  void plan_sign_separable(const SignAffineForm& form);
  Vector solve_sign_separable(const Vector& y) const;
  std::optional<Vector> enumerate_component(const Component& c, const Vector& r) const;

  OperatorExpr f_;
  OperatorExpr v_;
  OperatorExpr scaled_f_;
  double gamma_;
  ResolventStrategy strategy_ = ResolventStrategy::Unsupported;
  std::string reason_;

  std::optional<SignAffineForm> form_;
  std::optional<LUFactorization> lu_;

  // SignSeparable: z_i = x_{selector_[i]}, M(i, k) = B(i, selector_[k]).
  std::vector<std::size_t> selector_;
  DenseMatrix reduced_;
  std::vector<Component> components_;
};

inline constexpr std::size_t kMaxEnumeratedBlock = 10;

inline ResolventEngine::ResolventEngine(OperatorExpr f, OperatorExpr v, double gamma)
    : f_(std::move(f)), v_(std::move(v)), gamma_(gamma) {
  require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::InvalidArgument, "gamma must be positive");
  check_same_size(f_.dim(), v_.dim(), "resolvent operators");
  scaled_f_ = OperatorExpr::scale(gamma_, f_);
  form_ = to_sign_affine_form(OperatorExpr::sum({scaled_f_, v_}));
  if (!form_) {
    reason_ = "gamma F + v is not of the form affine + Sign (nonlinear pointwise terms)";
    return;
  }
  if (!form_->has_sign_terms()) {
    strategy_ = ResolventStrategy::AffineAffine;
    lu_ = lu_factorize(form_->matrix);
    return;
  }
  plan_sign_separable(*form_);
}

inline const DenseMatrix& ResolventEngine::system_matrix() const {
  require(strategy_ == ResolventStrategy::AffineAffine, ErrorCode::UnsupportedStructure, "not an affine engine");
  return form_->matrix;
}

inline const LUFactorization& ResolventEngine::factorization() const {
  require(strategy_ == ResolventStrategy::AffineAffine, ErrorCode::UnsupportedStructure, "not an affine engine");
  return *lu_;
}

inline void ResolventEngine::plan_sign_separable(const SignAffineForm& form) {
  const std::size_t n = form.matrix.rows();
  // Complete the Sign selector to a bijection; outputs without a Sign term
  // take the unused coordinates.
  selector_.assign(n, SignAffineForm::kNoSign);
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (form.sign_scale[i] == 0.0) continue;
    const std::size_t k = form.sign_selector[i];
    if (used[k]) {
      reason_ = "two outputs take Sign of the same coordinate";
      return;
    }
    used[k] = true;
    selector_[i] = k;
  }
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (selector_[i] != SignAffineForm::kNoSign) continue;
    while (used[next]) ++next;
    selector_[i] = next;
    used[next] = true;
  }

  reduced_ = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) reduced_(i, k) = form.matrix(i, selector_[k]);

  // Connected components of the coupling graph of M.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (i != k && reduced_(i, k) != 0.0) parent[find(i)] = find(k);

  std::vector<std::size_t> slot(n, SignAffineForm::kNoSign);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (slot[root] == SignAffineForm::kNoSign) {
      slot[root] = components_.size();
      components_.emplace_back();
    }
    Component& c = components_[slot[root]];
    c.indices.push_back(i);
    if (form.sign_scale[i] > 0.0) c.has_sign = true;
  }

  for (Component& c : components_) {
    if (c.indices.size() == 1) {
      const std::size_t i = c.indices[0];
      if (c.has_sign && !(reduced_(i, i) > 0.0)) {
        reason_ = "coordinate " + std::to_string(i) + " has Sign with non-positive slope";
        return;
      }
      if (!c.has_sign && reduced_(i, i) == 0.0) {
        reason_ = "coordinate " + std::to_string(i) + " has zero slope";
        return;
      }
      continue;
    }
    if (!c.has_sign) {
      DenseMatrix block(c.indices.size(), c.indices.size());
      for (std::size_t a = 0; a < c.indices.size(); ++a)
        for (std::size_t b = 0; b < c.indices.size(); ++b) block(a, b) = reduced_(c.indices[a], c.indices[b]);
      c.linear = lu_factorize(block);
      continue;
    }
    if (c.indices.size() > kMaxEnumeratedBlock) {
      reason_ = "coupled Sign block of size " + std::to_string(c.indices.size()) + " exceeds case-analysis limit";
      return;
    }
  }
  strategy_ = ResolventStrategy::SignSeparable;
}

// Case analysis over sign patterns p in {-1, 0, +1}^k: coordinates with p_i = 0
// are pinned at 0 and must absorb their residual inside [-s_i, s_i]; the rest
// solve the linear system M_FF z_F = r_F - s_F p_F and must carry sign p_i.
inline std::optional<Vector> ResolventEngine::enumerate_component(const Component& c, const Vector& r) const {
  const std::size_t k = c.indices.size();
  const auto& s = form_->sign_scale;
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < k; ++i) patterns *= 3;

  std::vector<int> sign(k);
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t rest = code;
    for (std::size_t i = 0; i < k; ++i) {
      sign[i] = static_cast<int>(rest % 3) - 1;
      rest /= 3;
    }
    bool pattern_ok = true;
    std::vector<std::size_t> free;
    for (std::size_t a = 0; a < k; ++a) {
      if (sign[a] != 0) {
        free.push_back(a);
      } else if (s[c.indices[a]] == 0.0) {
        // Without a Sign term a coordinate pinned at 0 is only valid if its
        // equation balances exactly; let the free pattern handle it instead.
        pattern_ok = false;
      }
    }
    if (!pattern_ok) continue;

    Vector zf(free.size());
    if (!free.empty()) {
      DenseMatrix m(free.size(), free.size());
      Vector rhs(free.size());
      for (std::size_t a = 0; a < free.size(); ++a) {
        const std::size_t gi = c.indices[free[a]];
        rhs[a] = r[gi] - s[gi] * sign[free[a]];
        for (std::size_t b = 0; b < free.size(); ++b) m(a, b) = reduced_(gi, c.indices[free[b]]);
      }
      const auto lu = lu_factorize(m);
      if (lu.singular) continue;
      zf = lu_solve(lu, rhs);
      for (std::size_t a = 0; a < free.size(); ++a) {
        const std::size_t gi = c.indices[free[a]];
        if (s[gi] > 0.0 && !(zf[a] * sign[free[a]] > 0.0)) {
          pattern_ok = false;
          break;
        }
      }
      if (!pattern_ok) continue;
    }
    Vector z(k);
    for (std::size_t a = 0; a < free.size(); ++a) z[free[a]] = zf[a];
    for (std::size_t a = 0; a < k; ++a) {
      if (sign[a] != 0) continue;
      const std::size_t gi = c.indices[a];
      double lin = 0.0;
      for (std::size_t b = 0; b < k; ++b) lin += reduced_(gi, c.indices[b]) * z[b];
      const double slack = r[gi] - lin;
      if (std::abs(slack) > s[gi] * (1.0 + 1e-12) + 1e-12) {
        pattern_ok = false;
        break;
      }
    }
    if (pattern_ok) return z;
  }
  return std::nullopt;
}

inline Vector ResolventEngine::solve_sign_separable(const Vector& y) const {
  const std::size_t n = y.size();
  const Vector r = y - form_->offset;
  const auto& s = form_->sign_scale;
  Vector z(n);
  for (const Component& c : components_) {
    if (c.indices.size() == 1) {
      const std::size_t i = c.indices[0];
      const double slope = reduced_(i, i);
      z[i] = slope > 0.0 ? scalar_sign_affine_inverse(s[i], slope, 0.0, r[i]) : r[i] / slope;
      continue;
    }
    Vector rc(c.indices.size());
    for (std::size_t a = 0; a < c.indices.size(); ++a) rc[a] = r[c.indices[a]];
    Vector zc;
    if (c.linear) {
      if (c.linear->singular) fail(ErrorCode::SingularMatrix, "singular coupled block in gamma F + v");
      zc = lu_solve(*c.linear, rc);
    } else {
      auto found = enumerate_component(c, r);
      if (!found) fail(ErrorCode::NotInRange, "input is outside ran(gamma F + v)");
      zc = std::move(*found);
    }
    for (std::size_t a = 0; a < c.indices.size(); ++a) z[c.indices[a]] = zc[a];
  }
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[selector_[i]] = z[i];
  return x;
}

inline Vector ResolventEngine::solve_inclusion(const Vector& y) const {
  require_supported();
  check_same_size(y.size(), f_.dim(), "resolvent input");
  if (strategy_ == ResolventStrategy::AffineAffine) {
    if (lu_->singular) fail(ErrorCode::SingularMatrix, "gamma F + v is a singular affine map");
    return lu_solve(*lu_, y - form_->offset);
  }
  return solve_sign_separable(y);
}

inline ResolventOutput ResolventEngine::warped_from_image(const Vector& vx) const {
  ResolventOutput out;
  out.preimage = solve_inclusion(vx);
  out.image = apply_v(out.preimage);
  const double gap = membership_gap(vx, out);
  if (!(gap <= kMembershipTolerance)) {
    fail(ErrorCode::NotInRange, "v(x) - v(z) misses gamma F(z) by " + std::to_string(gap));
  }
  return out;
}

inline ResolventOutput ResolventEngine::transformed(const Vector& x) const {
  ResolventOutput out;
  out.preimage = solve_inclusion(x);
  out.image = apply_v(out.preimage);
  const double gap = membership_gap(x, out);
  if (!(gap <= kMembershipTolerance)) {
    fail(ErrorCode::NotInRange, "x - v(z) misses gamma F(z) by " + std::to_string(gap));
  }
  return out;
}

inline ResolventEngine build_engine(const OperatorExpr& f, const OperatorExpr& v, double gamma) {
  return ResolventEngine(f, v, gamma);
}

}  // namespace pairprox
