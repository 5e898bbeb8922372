#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pairprox/error.hpp"

namespace pairprox {

/// Dense real vector; the ambient space is R^n throughout the library.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  const std::vector<double>& values() const noexcept { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  Vector slice(std::size_t begin, std::size_t count) const {
    require(begin + count <= size(), ErrorCode::DimensionMismatch, "slice out of bounds");
    return Vector(std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(begin),
                                      data_.begin() + static_cast<std::ptrdiff_t>(begin + count)));
  }

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

inline void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": sizes " + std::to_string(a) + " and " + std::to_string(b));
  }
}

inline Vector& Vector::operator+=(const Vector& other) {
  check_same_size(size(), other.size(), "vector +=");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += other.data_[i];
  return *this;
}

inline Vector& Vector::operator-=(const Vector& other) {
  check_same_size(size(), other.size(), "vector -=");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

inline Vector operator+(Vector a, const Vector& b) { return a += b; }
inline Vector operator-(Vector a, const Vector& b) { return a -= b; }
inline Vector operator*(double s, Vector a) { return a *= s; }
inline Vector operator*(Vector a, double s) { return a *= s; }
inline Vector operator-(Vector a) { return a *= -1.0; }

inline double dot(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double dot(const Vector& x, const Vector& y) { return dot(x.span(), y.span()); }

inline double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

inline double max_abs(const Vector& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

/// y += a * x
inline void axpy(double a, const Vector& x, Vector& y) {
  check_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double distance(const Vector& x, const Vector& y) {
  check_same_size(x.size(), y.size(), "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      require(row.size() == cols_, ErrorCode::DimensionMismatch, "ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    require(data_.size() == rows_ * cols_, ErrorCode::DimensionMismatch, "entry count != rows*cols");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static DenseMatrix diagonal(const Vector& d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  const std::vector<double>& entries() const noexcept { return data_; }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  /// |A_ij - A_ji| <= tol * (1 + |A_ij|) for all i, j.
  bool is_symmetric(double tol = 1e-12) const {
    if (!is_square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j) {
        const double a = (*this)(i, j);
        if (std::abs(a - (*this)(j, i)) > tol * (1.0 + std::abs(a))) return false;
      }
    return true;
  }

  DenseMatrix& operator+=(const DenseMatrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, ErrorCode::DimensionMismatch, "matrix +=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, ErrorCode::DimensionMismatch, "matrix -=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }
  DenseMatrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  /// A + s * I
  DenseMatrix shifted(double s) const {
    require(is_square(), ErrorCode::NonSquare, "shift of non-square matrix");
    DenseMatrix m = *this;
    for (std::size_t i = 0; i < rows_; ++i) m(i, i) += s;
    return m;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
inline DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
inline DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

inline Vector matvec(const DenseMatrix& a, const Vector& x) {
  check_same_size(a.cols(), x.size(), "matvec");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x.span());
  return y;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_size(a.cols(), b.rows(), "matmul");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting

struct LUFactorization {
  std::size_t dimension = 0;
  std::vector<std::size_t> permutation;  // row i of PA is row permutation[i] of A
  DenseMatrix packed;                    // unit-lower L below the diagonal, U on and above
  bool singular = false;

  Vector solve(const Vector& b) const;
};

/// Pivots below 1e-12 * max|A| mark the factorization singular instead of
/// throwing; lu_solve is where singularity becomes an error.
inline LUFactorization lu_factorize(const DenseMatrix& a) {
  require(a.is_square(), ErrorCode::NonSquare,
          "LU of " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " matrix");
  const std::size_t n = a.rows();
  LUFactorization f;
  f.dimension = n;
  f.packed = a;
  f.permutation.resize(n);
  std::iota(f.permutation.begin(), f.permutation.end(), std::size_t{0});
  const double threshold = 1e-12 * a.max_abs();
  if (n > 0 && a.max_abs() == 0.0) f.singular = true;

  DenseMatrix& lu = f.packed;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv != k) {
      std::swap_ranges(lu.row(k).begin(), lu.row(k).end(), lu.row(piv).begin());
      std::swap(f.permutation[k], f.permutation[piv]);
    }
    if (best <= threshold || best == 0.0) {
      f.singular = true;
      continue;
    }
    const double pivot = lu(k, k);
    auto rk = lu.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      auto ri = lu.row(i);
      const double m = ri[k] / pivot;
      ri[k] = m;
      if (m == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
    }
  }
  return f;
}

inline Vector lu_solve(const LUFactorization& f, const Vector& b) {
  require(!f.singular, ErrorCode::SingularMatrix, "solve with a singular factorization");
  check_same_size(f.dimension, b.size(), "lu_solve");
  const std::size_t n = f.dimension;
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto ri = f.packed.row(i);
    double s = b[f.permutation[i]];
    for (std::size_t j = 0; j < i; ++j) s -= ri[j] * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    auto ri = f.packed.row(i);
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= ri[j] * x[j];
    x[i] = s / ri[i];
  }
  return x;
}

inline Vector LUFactorization::solve(const Vector& b) const { return lu_solve(*this, b); }

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver for symmetric matrices

struct SymmetricEigenDecomposition {
  Vector eigenvalues;        // ascending
  DenseMatrix eigenvectors;  // column k pairs with eigenvalues[k]
  int sweeps = 0;
};

inline SymmetricEigenDecomposition jacobi_eigendecomposition(const DenseMatrix& input, int max_sweeps = 100) {
  require(input.is_square(), ErrorCode::NonSquare, "eigendecomposition of non-square matrix");
  require(input.is_symmetric(1e-10), ErrorCode::NotSymmetric, "Jacobi eigensolver needs a symmetric matrix");
  const std::size_t n = input.rows();
  DenseMatrix a = input;
  // Work on the exactly symmetric part so rotations stay consistent.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  const double target = 1e-12 * input.frobenius_norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; off_norm() > target; ++sweep) {
    if (sweep >= max_sweeps) {
      fail(ErrorCode::NoConvergence, "Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        auto rp = a.row(p);
        auto rq = a.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = rp[k];
          const double aqk = rq[k];
          rp[k] = c * apk - s * aqk;
          rq[k] = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigenDecomposition out;
  out.eigenvalues = Vector(n);
  out.eigenvectors = DenseMatrix(n, n);
  out.sweeps = sweep;
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Orthogonal factor of a Householder QR, with columns sign-normalized so
/// that diag(R) > 0 (this makes Q Haar-distributed for Gaussian input).
inline DenseMatrix householder_q(const DenseMatrix& g) {
  require(g.is_square(), ErrorCode::NonSquare, "householder_q needs a square matrix");
  const std::size_t n = g.rows();
  DenseMatrix w = g.transpose();  // row j of w is column j of g
  std::vector<Vector> reflectors;
  reflectors.reserve(n);
  std::vector<double> r_sign(n, 1.0);

  for (std::size_t k = 0; k < n; ++k) {
    auto col = w.row(k);
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += col[i] * col[i];
    norm = std::sqrt(norm);
    Vector vk(n - k);
    if (norm == 0.0) {
      reflectors.push_back(vk);
      continue;
    }
    const double alpha = col[k] >= 0.0 ? -norm : norm;  // R_kk
    r_sign[k] = alpha >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = k; i < n; ++i) vk[i - k] = col[i];
    vk[0] -= alpha;
    const double vn = norm2(vk);
    if (vn == 0.0) {
      reflectors.push_back(Vector(n - k));
      continue;
    }
    vk *= 1.0 / vn;
    for (std::size_t j = k; j < n; ++j) {
      auto cj = w.row(j);
      double d = 0.0;
      for (std::size_t i = k; i < n; ++i) d += vk[i - k] * cj[i];
      d *= 2.0;
      for (std::size_t i = k; i < n; ++i) cj[i] -= d * vk[i - k];
    }
    reflectors.push_back(std::move(vk));
  }

  // Q = H_0 H_1 ... H_{n-1}, accumulated right to left.
  DenseMatrix q = DenseMatrix::identity(n);
  std::vector<double> acc(n);
  for (std::size_t k = n; k-- > 0;) {
    const Vector& vk = reflectors[k];
    std::fill(acc.begin() + static_cast<std::ptrdiff_t>(k), acc.end(), 0.0);
    for (std::size_t i = k; i < n; ++i) {
      const double vi = vk[i - k];
      if (vi == 0.0) continue;
      auto qi = q.row(i);
      for (std::size_t j = k; j < n; ++j) acc[j] += vi * qi[j];
    }
    for (std::size_t i = k; i < n; ++i) {
      const double vi = 2.0 * vk[i - k];
      if (vi == 0.0) continue;
      auto qi = q.row(i);
      for (std::size_t j = k; j < n; ++j) qi[j] -= vi * acc[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) q(i, k) *= r_sign[k];
  return q;
}

}  // namespace pairprox
