#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "pairprox/error.hpp"
#include "pairprox/linalg.hpp"
#include "pairprox/random.hpp"

namespace pairprox {

// ---------------------------------------------------------------------------
// Value sets: the image F(x) of a possibly set-valued operator is either a
// point or an axis-aligned box (Sign contributes [-s, s] at zero).

class ValueSet {
 public:
  enum class Kind { Singleton, Box };

  static ValueSet singleton(Vector point) {
    ValueSet vs;
    vs.kind_ = Kind::Singleton;
    vs.upper_ = point;
    vs.lower_ = std::move(point);
    return vs;
  }

  static ValueSet box(Vector lower, Vector upper) {
    check_same_size(lower.size(), upper.size(), "ValueSet::box");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      require(lower[i] <= upper[i], ErrorCode::InvalidArgument, "box lower bound exceeds upper bound");
    }
    ValueSet vs;
    vs.kind_ = lower == upper ? Kind::Singleton : Kind::Box;
    vs.lower_ = std::move(lower);
    vs.upper_ = std::move(upper);
    return vs;
  }

  Kind kind() const noexcept { return kind_; }
  bool is_singleton() const noexcept { return kind_ == Kind::Singleton; }
  std::size_t size() const noexcept { return lower_.size(); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  const Vector& point() const {
    require(is_singleton(), ErrorCode::InvalidArgument, "value set is not a singleton");
    return lower_;
  }

  /// Membership with every face pushed out by `tol`.
  bool contains(const Vector& y, double tol = 0.0) const {
    check_same_size(y.size(), size(), "ValueSet::contains");
    for (std::size_t i = 0; i < size(); ++i) {
      if (y[i] < lower_[i] - tol || y[i] > upper_[i] + tol) return false;
    }
    return true;
  }

  /// Largest per-coordinate distance from y to the set (0 when inside).
  double distance_inf(const Vector& y) const {
    check_same_size(y.size(), size(), "ValueSet::distance_inf");
    double d = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      d = std::max(d, std::max(lower_[i] - y[i], y[i] - upper_[i]));
    }
    return d;
  }

  ValueSet& operator+=(const ValueSet& other) {
    lower_ += other.lower_;
    upper_ += other.upper_;
    if (!other.is_singleton()) kind_ = Kind::Box;
    return *this;
  }

  /// Multiplication by a non-negative scalar.
  ValueSet& operator*=(double s) {
    require(s >= 0.0, ErrorCode::InvalidArgument, "value sets scale by non-negative factors only");
    lower_ *= s;
    upper_ *= s;
    if (s == 0.0) kind_ = Kind::Singleton;
    return *this;
  }

 private:
  Kind kind_ = Kind::Singleton;
  Vector lower_;
  Vector upper_;
};

enum class Selection { ExtremeLow, ExtremeHigh, Midpoint };

inline Vector select(const ValueSet& vs, Selection strategy) {
  switch (strategy) {
    case Selection::ExtremeLow: return vs.lower();
    case Selection::ExtremeHigh: return vs.upper();
    case Selection::Midpoint: {
      if (vs.is_singleton()) return vs.lower();
      Vector mid = vs.lower();
      for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (vs.lower()[i] + vs.upper()[i]);
      return mid;
    }
  }
  return vs.lower();
}

// ---------------------------------------------------------------------------
// Pointwise registry

struct PointwiseMap {
  std::function<double(double)> fn;
  // Set when the map is t -> k*t; lets resolvent dispatch treat it as linear.
  std::optional<double> linear_coefficient;
};

class PointwiseRegistry {
 public:
  static PointwiseRegistry& instance() {
    static PointwiseRegistry registry;
    return registry;
  }

  /// Registers (or replaces) a user-supplied single-valued scalar map.
  void add(const std::string& name, PointwiseMap map) {
    std::unique_lock lock(mutex_);
    maps_[name] = std::move(map);
  }

  bool contains(const std::string& name) const {
    std::shared_lock lock(mutex_);
    return maps_.count(name) > 0;
  }

  PointwiseMap get(const std::string& name) const {
    std::shared_lock lock(mutex_);
    auto it = maps_.find(name);
    if (it == maps_.end()) fail(ErrorCode::UnknownRegistryKey, "no pointwise map named '" + name + "'");
    return it->second;
  }

 private:
  PointwiseRegistry() {
    maps_["identity"] = {[](double t) { return t; }, 1.0};
    maps_["negation"] = {[](double t) { return -t; }, -1.0};
    maps_["abs-sin"] = {[](double t) { return std::abs(std::sin(t)); }, std::nullopt};
    maps_["cos-abs"] = {[](double t) { return std::cos(std::abs(t)); }, std::nullopt};
    maps_["neg-cos-abs"] = {[](double t) { return -std::cos(std::abs(t)); }, std::nullopt};
  }

  mutable std::shared_mutex mutex_;
  std::map<std::string, PointwiseMap> maps_;
};

// ---------------------------------------------------------------------------
// Operator expressions. All operators map R^n to R^n; `dim()` is n.

struct OperatorNode;

class OperatorExpr {
 public:
  OperatorExpr() = default;

  static OperatorExpr affine(DenseMatrix matrix, Vector offset);
  static OperatorExpr linear(DenseMatrix matrix);
  static OperatorExpr sign_block(double scale, std::vector<std::size_t> selector);
  static OperatorExpr permutation(std::vector<std::size_t> perm, std::vector<double> signs = {});
  static OperatorExpr pointwise(const std::string& name, std::size_t dim);
  static OperatorExpr identity(std::size_t dim) { return pointwise("identity", dim); }
  static OperatorExpr scale(double factor, OperatorExpr inner);
  static OperatorExpr sum(std::vector<OperatorExpr> terms);
  struct Block;
  static OperatorExpr stack(std::size_t dim, std::vector<Block> blocks);

  std::size_t dim() const noexcept { return dim_; }
  bool valid() const noexcept { return node_ != nullptr; }
  const OperatorNode& node() const {
    require(valid(), ErrorCode::InvalidArgument, "empty operator expression");
    return *node_;
  }

 private:
  std::shared_ptr<const OperatorNode> node_;
  std::size_t dim_ = 0;
};

struct AffineOp {
  DenseMatrix matrix;
  Vector offset;
};

/// x -> scale * (Sign(x_{selector[0]}), ..., Sign(x_{selector[n-1]}))
struct SignBlockOp {
  double scale = 1.0;
  std::vector<std::size_t> selector;
};

/// x -> (signs[0] * x_{perm[0]}, ..., signs[n-1] * x_{perm[n-1]})
struct PermutationOp {
  std::vector<std::size_t> perm;
  std::vector<double> signs;
};

struct PointwiseOp {
  std::string name;
  std::size_t dim = 0;
};

struct ScaleOp {
  double factor = 1.0;
  OperatorExpr inner;
};

struct SumOp {
  std::vector<OperatorExpr> terms;
};

struct OperatorExpr::Block {
  std::size_t begin = 0;
  std::size_t count = 0;
  OperatorExpr op;
};

/// Block-diagonal operator: each block reads and writes coordinates
/// [begin, begin + count); uncovered coordinates map to 0.
struct StackOp {
  std::size_t dim = 0;
  std::vector<OperatorExpr::Block> blocks;
};

struct OperatorNode {
  std::variant<AffineOp, SignBlockOp, PermutationOp, PointwiseOp, ScaleOp, SumOp, StackOp> op;
};

namespace detail {

inline void require_bijection(const std::vector<std::size_t>& p, const char* what) {
  std::vector<bool> seen(p.size(), false);
  for (std::size_t k : p) {
    if (k >= p.size() || seen[k]) fail(ErrorCode::InvalidArgument, std::string(what) + " is not a permutation");
    seen[k] = true;
  }
}

}  // namespace detail

inline OperatorExpr OperatorExpr::affine(DenseMatrix matrix, Vector offset) {
  require(matrix.is_square(), ErrorCode::NonSquare, "affine operator needs a square matrix");
  check_same_size(matrix.rows(), offset.size(), "affine operator offset");
  OperatorExpr e;
  e.dim_ = matrix.rows();
  e.node_ = std::make_shared<const OperatorNode>(OperatorNode{AffineOp{std::move(matrix), std::move(offset)}});
  return e;
}

inline OperatorExpr OperatorExpr::linear(DenseMatrix matrix) {
  const std::size_t n = matrix.rows();
  return affine(std::move(matrix), Vector(n));
}

inline OperatorExpr OperatorExpr::sign_block(double scale, std::vector<std::size_t> selector) {
  require(scale >= 0.0 && std::isfinite(scale), ErrorCode::InvalidArgument, "sign block scale must be >= 0");
  detail::require_bijection(selector, "sign block selector");
  OperatorExpr e;
  e.dim_ = selector.size();
  e.node_ = std::make_shared<const OperatorNode>(OperatorNode{SignBlockOp{scale, std::move(selector)}});
  return e;
}

inline OperatorExpr OperatorExpr::permutation(std::vector<std::size_t> perm, std::vector<double> signs) {
  detail::require_bijection(perm, "permutation");
  if (signs.empty()) signs.assign(perm.size(), 1.0);
  check_same_size(perm.size(), signs.size(), "permutation signs");
  for (double s : signs) require(s == 1.0 || s == -1.0, ErrorCode::InvalidArgument, "permutation signs must be +-1");
  OperatorExpr e;
  e.dim_ = perm.size();
  e.node_ = std::make_shared<const OperatorNode>(OperatorNode{PermutationOp{std::move(perm), std::move(signs)}});
  return e;
}

inline OperatorExpr OperatorExpr::pointwise(const std::string& name, std::size_t dim) {
  if (!PointwiseRegistry::instance().contains(name)) {
    fail(ErrorCode::UnknownRegistryKey, "no pointwise map named '" + name + "'");
  }
  OperatorExpr e;
  e.dim_ = dim;
  e.node_ = std::make_shared<const OperatorNode>(OperatorNode{PointwiseOp{name, dim}});
  return e;
}

inline OperatorExpr OperatorExpr::scale(double factor, OperatorExpr inner) {
  require(factor > 0.0 && std::isfinite(factor), ErrorCode::InvalidArgument, "scale factor must be positive");
  require(inner.valid(), ErrorCode::InvalidArgument, "scale of empty operator");
  OperatorExpr e;
  e.dim_ = inner.dim();
  e.node_ = std::make_shared<const OperatorNode>(OperatorNode{ScaleOp{factor, std::move(inner)}});
  return e;
}

inline OperatorExpr OperatorExpr::sum(std::vector<OperatorExpr> terms) {
  require(!terms.empty(), ErrorCode::InvalidArgument, "sum of zero terms");
  for (const auto& t : terms) {
    require(t.valid(), ErrorCode::InvalidArgument, "sum term is empty");
    check_same_size(t.dim(), terms.front().dim(), "sum terms");
  }
  OperatorExpr e;
  e.dim_ = terms.front().dim();
  e.node_ = std::make_shared<const OperatorNode>(OperatorNode{SumOp{std::move(terms)}});
  return e;
}

inline OperatorExpr OperatorExpr::stack(std::size_t dim, std::vector<Block> blocks) {
  std::vector<bool> covered(dim, false);
  for (const auto& b : blocks) {
    require(b.op.valid(), ErrorCode::InvalidArgument, "stack block is empty");
    require(b.begin + b.count <= dim, ErrorCode::DimensionMismatch, "stack block exceeds dimension");
    check_same_size(b.op.dim(), b.count, "stack block operator");
    for (std::size_t i = b.begin; i < b.begin + b.count; ++i) {
      require(!covered[i], ErrorCode::InvalidArgument, "stack blocks overlap");
      covered[i] = true;
    }
  }
  OperatorExpr e;
  e.dim_ = dim;
  e.node_ = std::make_shared<const OperatorNode>(OperatorNode{StackOp{dim, std::move(blocks)}});
  return e;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------------------

inline ValueSet evaluate(const OperatorExpr& op, const Vector& x) {
  check_same_size(op.dim(), x.size(), "evaluate");
  return std::visit(
      overloaded{
          [&](const AffineOp& a) {
            Vector y = matvec(a.matrix, x);
            y += a.offset;
            return ValueSet::singleton(std::move(y));
          },
          [&](const SignBlockOp& s) {
            const std::size_t n = s.selector.size();
            Vector lo(n), hi(n);
            for (std::size_t i = 0; i < n; ++i) {
              const double t = x[s.selector[i]];
              if (t > 0.0) {
                lo[i] = hi[i] = s.scale;
              } else if (t < 0.0) {
                lo[i] = hi[i] = -s.scale;
              } else {
                lo[i] = -s.scale;
                hi[i] = s.scale;
              }
            }
            return ValueSet::box(std::move(lo), std::move(hi));
          },
          [&](const PermutationOp& p) {
            Vector y(p.perm.size());
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = p.signs[i] * x[p.perm[i]];
            return ValueSet::singleton(std::move(y));
          },
          [&](const PointwiseOp& p) {
            const auto map = PointwiseRegistry::instance().get(p.name);
            Vector y(x.size());
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = map.fn(x[i]);
            return ValueSet::singleton(std::move(y));
          },
          [&](const ScaleOp& s) {
            ValueSet vs = evaluate(s.inner, x);
            vs *= s.factor;
            return vs;
          },
          [&](const SumOp& s) {
            ValueSet acc = evaluate(s.terms.front(), x);
            for (std::size_t k = 1; k < s.terms.size(); ++k) acc += evaluate(s.terms[k], x);
            return acc;
          },
          [&](const StackOp& s) {
            Vector lo(s.dim), hi(s.dim);
            for (const auto& b : s.blocks) {
              const ValueSet part = evaluate(b.op, x.slice(b.begin, b.count));
              for (std::size_t i = 0; i < b.count; ++i) {
                lo[b.begin + i] = part.lower()[i];
                hi[b.begin + i] = part.upper()[i];
              }
            }
            return ValueSet::box(std::move(lo), std::move(hi));
          },
      },
      op.node().op);
}

/// Evaluates an operator that must be single-valued at x.
inline Vector evaluate_point(const OperatorExpr& op, const Vector& x) {
  ValueSet vs = evaluate(op, x);
  if (!vs.is_singleton()) fail(ErrorCode::InvalidArgument, "operator is set-valued at the given point");
  return vs.point();
}

// ---------------------------------------------------------------------------
// Structural reduction to y = B x + c + s_i * Sign(x_{sel(i)}).

struct SignAffineForm {
  static constexpr std::size_t kNoSign = std::numeric_limits<std::size_t>::max();

  DenseMatrix matrix;
  Vector offset;
  Vector sign_scale;                       // s_i >= 0
  std::vector<std::size_t> sign_selector;  // kNoSign where s_i == 0

  explicit SignAffineForm(std::size_t n)
      : matrix(n, n), offset(n), sign_scale(n), sign_selector(n, kNoSign) {}

  bool has_sign_terms() const {
    return std::any_of(sign_scale.begin(), sign_scale.end(), [](double s) { return s > 0.0; });
  }
};

inline std::optional<SignAffineForm> to_sign_affine_form(const OperatorExpr& op) {
  const std::size_t n = op.dim();
  using Result = std::optional<SignAffineForm>;
  return std::visit(
      overloaded{
          [&](const AffineOp& a) -> Result {
            SignAffineForm f(n);
            f.matrix = a.matrix;
            f.offset = a.offset;
            return f;
          },
          [&](const SignBlockOp& s) -> Result {
            SignAffineForm f(n);
            if (s.scale > 0.0) {
              for (std::size_t i = 0; i < n; ++i) {
                f.sign_scale[i] = s.scale;
                f.sign_selector[i] = s.selector[i];
              }
            }
            return f;
          },
          [&](const PermutationOp& p) -> Result {
            SignAffineForm f(n);
            for (std::size_t i = 0; i < n; ++i) f.matrix(i, p.perm[i]) = p.signs[i];
            return f;
          },
          [&](const PointwiseOp& p) -> Result {
            const auto map = PointwiseRegistry::instance().get(p.name);
            if (!map.linear_coefficient) return std::nullopt;
            SignAffineForm f(n);
            for (std::size_t i = 0; i < n; ++i) f.matrix(i, i) = *map.linear_coefficient;
            return f;
          },
          [&](const ScaleOp& s) -> Result {
            Result inner = to_sign_affine_form(s.inner);
            if (!inner) return std::nullopt;
            inner->matrix *= s.factor;
            inner->offset *= s.factor;
            inner->sign_scale *= s.factor;
            return inner;
          },
          [&](const SumOp& s) -> Result {
            SignAffineForm f(n);
            for (const auto& term : s.terms) {
              Result t = to_sign_affine_form(term);
              if (!t) return std::nullopt;
              f.matrix += t->matrix;
              f.offset += t->offset;
              for (std::size_t i = 0; i < n; ++i) {
                if (t->sign_scale[i] == 0.0) continue;
                if (f.sign_scale[i] == 0.0) {
                  f.sign_scale[i] = t->sign_scale[i];
                  f.sign_selector[i] = t->sign_selector[i];
                } else if (f.sign_selector[i] == t->sign_selector[i]) {
                  f.sign_scale[i] += t->sign_scale[i];
                } else {
                  return std::nullopt;  // two different Sign arguments in one output
                }
              }
            }
            return f;
          },
          [&](const StackOp& s) -> Result {
            SignAffineForm f(n);
            for (const auto& b : s.blocks) {
              Result t = to_sign_affine_form(b.op);
              if (!t) return std::nullopt;
              for (std::size_t i = 0; i < b.count; ++i) {
                for (std::size_t j = 0; j < b.count; ++j) f.matrix(b.begin + i, b.begin + j) = t->matrix(i, j);
                f.offset[b.begin + i] = t->offset[i];
                f.sign_scale[b.begin + i] = t->sign_scale[i];
                if (t->sign_selector[i] != SignAffineForm::kNoSign) {
                  f.sign_selector[b.begin + i] = b.begin + t->sign_selector[i];
                }
              }
            }
            return f;
          },
      },
      op.node().op);
}

// ---------------------------------------------------------------------------
// Sampling-based pair monotonicity

struct SampleBox {
  Vector lower;
  Vector upper;

  static SampleBox cube(std::size_t n, double lo, double hi) { return {Vector(n, lo), Vector(n, hi)}; }

  Vector sample(SplitMix64& rng) const {
    Vector x(lower.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lower[i], upper[i]);
    return x;
  }
};

struct PairWitness {
  Vector x, y;
  Vector fx, fy;  // selections from F(x), F(y)
  Vector vx, vy;  // selections from v(x), v(y)
  double inner_product = 0.0;
  double quotient = 0.0;
};

struct PairMonotonicityReport {
  enum class Verdict { MonotoneEvidence, ViolationFound };

  std::size_t sample_count = 0;  // number of (x, y) pairs evaluated
  double min_quotient = std::numeric_limits<double>::infinity();
  double min_inner_product = std::numeric_limits<double>::infinity();
  PairWitness quotient_witness;  // achieves min_quotient
  PairWitness inner_witness;     // achieves min_inner_product
  std::vector<PairWitness> explicit_pairs;  // caller-supplied pairs, in order
  Verdict verdict = Verdict::MonotoneEvidence;

  bool violated() const noexcept { return verdict == Verdict::ViolationFound; }
  const PairWitness& witness() const noexcept { return violated() ? inner_witness : quotient_witness; }
};

inline constexpr double kViolationThreshold = -1e-12;

namespace detail {

inline std::vector<Vector> selections(const ValueSet& vs) {
  if (vs.is_singleton()) return {vs.lower()};
  return {select(vs, Selection::ExtremeLow), select(vs, Selection::ExtremeHigh), select(vs, Selection::Midpoint)};
}

struct PairAccumulator {
  double min_quotient = std::numeric_limits<double>::infinity();
  double min_inner = std::numeric_limits<double>::infinity();
  PairWitness quotient_witness;
  PairWitness inner_witness;
  std::size_t count = 0;

  // Strict comparisons keep the earliest pair on ties, so merging chunks in
  // index order gives the same answer for any worker count.
  void offer(const PairWitness& w) {
    if (w.quotient < min_quotient) {
      min_quotient = w.quotient;
      quotient_witness = w;
    }
    if (w.inner_product < min_inner) {
      min_inner = w.inner_product;
      inner_witness = w;
    }
  }

  void merge(const PairAccumulator& other) {
    if (other.min_quotient < min_quotient) {
      min_quotient = other.min_quotient;
      quotient_witness = other.quotient_witness;
    }
    if (other.min_inner < min_inner) {
      min_inner = other.min_inner;
      inner_witness = other.inner_witness;
    }
    count += other.count;
  }
};

/// Worst selection combination for one pair; nullopt when x == y.
inline std::optional<PairWitness> evaluate_pair(const OperatorExpr& f, const OperatorExpr& v, const Vector& x,
                                                const Vector& y) {
  const double dx2 = [&] {
    const double d = distance(x, y);
    return d * d;
  }();
  if (dx2 == 0.0) return std::nullopt;
  const auto fxs = selections(evaluate(f, x));
  const auto fys = selections(evaluate(f, y));
  const auto vxs = selections(evaluate(v, x));
  const auto vys = selections(evaluate(v, y));
  std::optional<PairWitness> worst;
  for (const auto& fx : fxs)
    for (const auto& fy : fys)
      for (const auto& vx : vxs)
        for (const auto& vy : vys) {
          const double ip = dot(fx - fy, vx - vy);
          if (!worst || ip < worst->inner_product) {
            worst = PairWitness{x, y, fx, fy, vx, vy, ip, ip / dx2};
          }
        }
  return worst;
}

}  // namespace detail

/// Inner product <F(x) - F(y), v(x) - v(y)> for fixed selections, recomputed
/// from scratch; used to re-check reported witnesses.
inline double pair_inner_product(const PairWitness& w) { return dot(w.fx - w.fy, w.vx - w.vy); }

/// Sampling check of <F(x) - F(y), v(x) - v(y)> >= 0.
///
/// Sample k draws x, y uniformly from the box (stream k of the seed) and
/// evaluates three pairs: (x, y); (x, x') with x' equal to x except coordinate
/// k mod n taken from y; and (x'', y) with coordinate k mod n of x set to 0
/// when the box contains 0 there, which lands on the kink of Sign. Boxes in
/// F(.) or v(.) are probed at both extremes and the midpoint.
///
/// Evidence only: MonotoneEvidence is not a proof.
inline PairMonotonicityReport check_pair_monotone(const OperatorExpr& f, const OperatorExpr& v, const SampleBox& box,
                                                  std::size_t samples, std::uint64_t seed,
                                                  const std::vector<std::pair<Vector, Vector>>& explicit_pairs = {},
                                                  unsigned workers = 1) {
  check_same_size(f.dim(), v.dim(), "check_pair_monotone operators");
  check_same_size(f.dim(), box.lower.size(), "check_pair_monotone box");
  check_same_size(box.lower.size(), box.upper.size(), "check_pair_monotone box bounds");
  require(samples >= 2, ErrorCode::InvalidArgument, "at least 2 samples required");
  for (std::size_t i = 0; i < box.lower.size(); ++i) {
    require(box.lower[i] <= box.upper[i], ErrorCode::InvalidArgument, "box lower bound exceeds upper bound");
  }
  const std::size_t n = f.dim();
  const SplitMix64 base(seed);

  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    detail::PairAccumulator acc;
    for (std::size_t k = begin; k < end; ++k) {
      SplitMix64 rng = base.split(k);
      const Vector x = box.sample(rng);
      const Vector y = box.sample(rng);
      const std::size_t axis = k % n;
      Vector x_axis = x;
      x_axis[axis] = y[axis];
      std::vector<std::pair<Vector, Vector>> pairs{{x, y}, {x, x_axis}};
      if (box.lower[axis] <= 0.0 && box.upper[axis] >= 0.0) {
        Vector x_kink = x;
        x_kink[axis] = 0.0;
        pairs.emplace_back(std::move(x_kink), y);
      }
      for (const auto& [a, b] : pairs) {
        if (auto w = detail::evaluate_pair(f, v, a, b)) {
          acc.offer(*w);
          ++acc.count;
        }
      }
    }
    return acc;
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(samples)));
  std::vector<detail::PairAccumulator> parts(workers);
  if (workers == 1) {
    parts[0] = run_chunk(0, samples);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (samples + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(samples, w * chunk);
      const std::size_t end = std::min(samples, begin + chunk);
      threads.emplace_back([&, w, begin, end] { parts[w] = run_chunk(begin, end); });
    }
    for (auto& t : threads) t.join();
  }

  detail::PairAccumulator total;
  for (const auto& p : parts) total.merge(p);

  PairMonotonicityReport report;
  for (const auto& [x, y] : explicit_pairs) {
    check_same_size(x.size(), n, "explicit pair");
    check_same_size(y.size(), n, "explicit pair");
    if (auto w = detail::evaluate_pair(f, v, x, y)) {
      total.offer(*w);
      ++total.count;
      report.explicit_pairs.push_back(*w);
    }
  }

  report.sample_count = total.count;
  report.min_quotient = total.min_quotient;
  report.min_inner_product = total.min_inner;
  report.quotient_witness = total.quotient_witness;
  report.inner_witness = total.inner_witness;
  report.verdict = total.min_inner < kViolationThreshold ? PairMonotonicityReport::Verdict::ViolationFound
                                                         : PairMonotonicityReport::Verdict::MonotoneEvidence;
  return report;
}

/// Sampled estimate of the strong monotonicity modulus of (F, v): the minimum
/// observed quotient <dF, dv> / |dx|^2, clamped at 0. A lower-bound
/// estimate, not a certificate.
inline double check_pair_strongly_monotone(const OperatorExpr& f, const OperatorExpr& v, const SampleBox& box,
                                           std::size_t samples, std::uint64_t seed, unsigned workers = 1) {
  const auto report = check_pair_monotone(f, v, box, samples, seed, {}, workers);
  return std::max(0.0, report.min_quotient);
}

}  // namespace pairprox
