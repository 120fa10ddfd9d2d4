#pragma once

// Dense row-major linear algebra: just what the solvers need.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustfit/error.hpp"

namespace robustfit {

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string(what) + " has a non-finite entry");
  }
}

}  // namespace detail

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  explicit Vector(std::vector<double> data) : data_(std::move(data)) {
    detail::require_finite(data_, "Vector");
  }
  Vector(std::initializer_list<double> values) : data_(values) {
    detail::require_finite(data_, "Vector");
  }

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw Error(ErrorCode::ShapeMismatch, "Matrix data length != rows*cols");
    detail::require_finite(data_, "Matrix");
  }
  /// Row-by-row literal, e.g. Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error(ErrorCode::ShapeMismatch, "ragged Matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    detail::require_finite(data_, "Matrix");
  }

  static Matrix identity(std::size_t n) {
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  const double* data() const noexcept { return data_.data(); }
  std::span<const double> span() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Vector operator-(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "vector subtraction: length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector operator+(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "vector addition: length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vector operator*(double c, const Vector& a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

/// Distance ||a - b||_2 without materializing the difference.
inline double distance2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "distance2: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Products

inline Vector matvec(const Matrix& A, const Vector& x) {
  if (A.cols() != x.size()) throw Error(ErrorCode::ShapeMismatch, "matvec: A.cols != x.size");
  Vector out(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* a = A.data() + i * A.cols();
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += a[j] * x[j];
    out[i] = s;
  }
  return out;
}

/// A^T x
inline Vector transpose_matvec(const Matrix& A, const Vector& x) {
  if (A.rows() != x.size()) throw Error(ErrorCode::ShapeMismatch, "transpose_matvec: A.rows != x.size");
  Vector out(A.cols());
  double* o = out.data();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* a = A.data() + i * A.cols();
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < A.cols(); ++j) o[j] += a[j] * xi;
  }
  return out;
}

inline Matrix matmul(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.rows()) throw Error(ErrorCode::ShapeMismatch, "matmul: inner dimensions differ");
  Matrix C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    auto c = C.row(i);
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      auto b = B.row(k);
      for (std::size_t j = 0; j < B.cols(); ++j) c[j] += aik * b[j];
    }
  }
  return C;
}

inline Matrix transpose(const Matrix& A) {
  Matrix T(A.cols(), A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
  return T;
}

/// A^T A, exploiting symmetry.
inline Matrix gram(const Matrix& A) {
  const std::size_t n = A.cols();
  Matrix G(n, n);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    auto a = A.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double aj = a[j];
      if (aj == 0.0) continue;
      double* g = &G(j, 0);
      for (std::size_t k = j; k < n; ++k) g[k] += aj * a[k];
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) G(k, j) = G(j, k);
  return G;
}

inline double max_abs(const Matrix& A) { return max_abs(A.span()); }

// ---------------------------------------------------------------------------
// Factorizations

inline constexpr double kPivotTolerance = 1e-12;

/// Upper-triangular U with U^T U = A. Throws NotPositiveDefinite when a pivot
/// falls below kPivotTolerance * trace(A) / n.
inline Matrix cholesky_upper(const Matrix& A) {
  const std::size_t n = A.rows();
  if (A.cols() != n) throw Error(ErrorCode::ShapeMismatch, "cholesky_upper: matrix not square");
  const double scale = max_abs(A);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(A(i, j) - A(j, i)) > 1e-10 * scale)
        throw Error(ErrorCode::NotPositiveDefinite, "cholesky_upper: matrix not symmetric");

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += A(i, i);
  const double floor = n == 0 ? 0.0 : kPivotTolerance * std::abs(trace) / static_cast<double>(n);

  Matrix U(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = A(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= U(k, j) * U(k, j);
    if (!(d > floor))
      throw Error(ErrorCode::NotPositiveDefinite,
                  "cholesky_upper: pivot " + std::to_string(j) + " = " + std::to_string(d));
    const double ujj = std::sqrt(d);
    U(j, j) = ujj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = A(j, i);
      for (std::size_t k = 0; k < j; ++k) s -= U(k, j) * U(k, i);
      U(j, i) = s / ujj;
    }
  }
  return U;
}

/// Solves U x = b, or U^T x = b when `transpose` is set.
inline Vector solve_upper_triangular(const Matrix& U, const Vector& b, bool transpose = false) {
  const std::size_t n = U.rows();
  if (U.cols() != n || b.size() != n) throw Error(ErrorCode::ShapeMismatch, "solve_upper_triangular: shape");
  for (std::size_t i = 0; i < n; ++i)
    if (U(i, i) == 0.0) throw Error(ErrorCode::SingularFactor, "zero diagonal at " + std::to_string(i));

  Vector x(n);
  if (!transpose) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= U(ii, k) * x[k];
      x[ii] = s / U(ii, ii);
    }
  } else {
    // U^T is lower triangular: forward substitution.
    for (std::size_t i = 0; i < n; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= U(k, i) * x[k];
      x[i] = s / U(i, i);
    }
  }
  return x;
}

/// X U^{-1}, row by row: each output row solves U^T p = x_i.
inline Matrix right_solve_upper(const Matrix& X, const Matrix& U) {
  const std::size_t n = U.rows();
  if (X.cols() != n || U.cols() != n) throw Error(ErrorCode::ShapeMismatch, "right_solve_upper: shape");
  for (std::size_t i = 0; i < n; ++i)
    if (U(i, i) == 0.0) throw Error(ErrorCode::SingularFactor, "zero diagonal at " + std::to_string(i));
  Matrix P(X.rows(), n);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto x = X.row(r);
    auto p = P.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= U(k, i) * p[k];
      p[i] = s / U(i, i);
    }
  }
  return P;
}

/// Solves A x = b for SPD A through its upper Cholesky factor.
inline Vector cholesky_solve(const Matrix& U, const Vector& b) {
  return solve_upper_triangular(U, solve_upper_triangular(U, b, true), false);
}

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values[i]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline SymEig sym_eig(const Matrix& A, int max_sweeps = 100) {
  const std::size_t n = A.rows();
  if (A.cols() != n) throw Error(ErrorCode::ShapeMismatch, "sym_eig: matrix not square");
  Matrix a = A;
  Matrix v = Matrix::identity(n);

  auto off_norm2 = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return s;
  };
  double total = 0.0;
  for (double x : a.span()) total += x * x;
  const double eps = std::numeric_limits<double>::epsilon();

  bool converged = n < 2 || total == 0.0;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Skip rotations that cannot change the diagonal at working precision.
        if (sweep > 3 && std::abs(apq) < eps * 1e-2 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
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
    converged = off_norm2() <= eps * eps * total;
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "sym_eig: Jacobi sweeps exhausted");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymEig out{Vector(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

}  // namespace robustfit
