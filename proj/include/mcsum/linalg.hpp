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

#include "mcsum/error.hpp"

namespace mcsum {

using Vector = std::vector<double>;

// Dense row-major matrix of finite doubles.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, Vector data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorKind::DimensionMismatch,
                  "entry count " + std::to_string(data_.size()) + " != " +
                      std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::InvalidArgument, "matrix entry is not finite");
      }
    }
  }

  static Matrix from_rows(const std::vector<Vector>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.front().size();
    Vector data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) {
        throw Error(ErrorKind::DimensionMismatch, "ragged rows");
      }
      data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<Vector> v;
    for (const auto& row : rows) v.emplace_back(row);
    return from_rows(v);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }

  std::vector<Vector> to_rows() const {
    std::vector<Vector> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  // Bitwise comparison; used for determinism checks.
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

namespace detail {
inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, std::string(op) + ": shape mismatch");
  }
}
}  // namespace detail

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  detail::require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
  return out;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  detail::require_same_shape(a, b, "subtract");
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  return out;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) *= s;
  return out;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "multiply: inner dimensions differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

// x^T A
inline Vector left_multiply(std::span<const double> x, const Matrix& a) {
  if (x.size() != a.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "left_multiply: length mismatch");
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += x[i] * a(i, j);
  return out;
}

// A x
inline Vector right_multiply(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "right_multiply: length mismatch");
  }
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

// u v^T
inline Matrix outer(std::span<const double> u, std::span<const double> v) {
  Matrix out(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * v[j];
  return out;
}

inline Matrix diagonal_matrix(std::span<const double> d) {
  Matrix out(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out(i, i) = d[i];
  return out;
}

// Keeps only the diagonal of a square matrix (the "_d" operator).
inline Matrix diagonal_part(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) out(i, i) = a(i, i);
  return out;
}

inline Vector diagonal(const Matrix& a) {
  Vector out(std::min(a.rows(), a.cols()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a(i, i);
  return out;
}

inline double trace(const Matrix& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

inline Vector row_sums(const Matrix& a) {
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j);
  return out;
}

inline Vector col_sums(const Matrix& a) {
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j);
  return out;
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  detail::require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "max_abs_diff: length mismatch");
  }
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

// Maximum absolute column sum.
inline double norm1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

/// Packed partial-pivoting LU factors of a square matrix: row i of P·A is row
/// `perm[i]` of A, L is unit lower triangular (strictly below the diagonal of
/// `lu`) and U is upper triangular (on and above the diagonal).
struct LuFactors {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;

  std::size_t n() const noexcept { return lu.rows(); }

  Matrix lower() const {
    Matrix l = Matrix::identity(n());
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < i; ++j) l(i, j) = lu(i, j);
    return l;
  }

  Matrix upper() const {
    Matrix u(n(), n());
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = i; j < n(); ++j) u(i, j) = lu(i, j);
    return u;
  }

  // Rows of `a` in pivot order, i.e. P·A.
  Matrix permute_rows(const Matrix& a) const {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < n(); ++i) {
      auto src = a.row(perm[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }
};

// Gaussian elimination with largest-magnitude row pivoting; ties go to the
// lowest row index. A pivot below 1e-13 * max|a_ij| is treated as singular.
inline LuFactors lu_factor(const Matrix& a) {
  if (!a.is_square() || a.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "lu_factor requires a non-empty square matrix");
  }
  const std::size_t n = a.rows();
  const double threshold = 1e-13 * max_abs(a);

  LuFactors f{a, std::vector<std::size_t>(n), 1};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  Matrix& lu = f.lu;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (!(best >= threshold) || best == 0.0) {
      throw Error(ErrorKind::SingularMatrix,
                  "pivot " + std::to_string(k) + " has magnitude below threshold");
    }
    if (pivot != k) {
      std::swap_ranges(lu.row(k).begin(), lu.row(k).end(), lu.row(pivot).begin());
      std::swap(f.perm[k], f.perm[pivot]);
      f.sign = -f.sign;
    }
    const double inv_pivot = 1.0 / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) * inv_pivot;
      lu(i, k) = factor;
      if (factor == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= factor * lu(k, j);
    }
  }
  return f;
}

// Solves A X = B column by column.
inline Matrix solve(const LuFactors& f, const Matrix& b) {
  const std::size_t n = f.n();
  if (b.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                "solve: rhs has " + std::to_string(b.rows()) + " rows, expected " +
                    std::to_string(n));
  }
  Matrix x = f.permute_rows(b);
  const Matrix& lu = f.lu;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 1; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= lu(i, k) * x(k, c);
      x(i, c) = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= lu(i, k) * x(k, c);
      x(i, c) = s / lu(i, i);
    }
  }
  return x;
}

inline Vector solve(const LuFactors& f, std::span<const double> b) {
  Matrix rhs(b.size(), 1, Vector(b.begin(), b.end()));
  Matrix x = solve(f, rhs);
  return Vector(x.data().begin(), x.data().end());
}

// Solves A^T y = b using the factors of A.
inline Vector solve_transposed(const LuFactors& f, std::span<const double> b) {
  const std::size_t n = f.n();
  if (b.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "solve_transposed: length mismatch");
  }
  const Matrix& lu = f.lu;
  Vector w(b.begin(), b.end());
  // U^T w = b
  for (std::size_t i = 0; i < n; ++i) {
    double s = w[i];
    for (std::size_t k = 0; k < i; ++k) s -= lu(k, i) * w[k];
    w[i] = s / lu(i, i);
  }
  // L^T v = w
  for (std::size_t i = n; i-- > 0;) {
    double s = w[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= lu(k, i) * w[k];
    w[i] = s;
  }
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[f.perm[i]] = w[i];
  return y;
}

inline Matrix invert(const Matrix& a) {
  const LuFactors f = lu_factor(a);
  return solve(f, Matrix::identity(a.rows()));
}

/// Estimates the 1-norm condition number ||A||_1 ||A^{-1}||_1 with Hager's
/// method plus Higham's alternating-sign safeguard vector. Intended for
/// warnings only. Returns 1e308 if a solve fails or the estimate overflows.
inline double condition_estimate(const LuFactors& f, const Matrix& a) {
  const std::size_t n = f.n();
  auto norm1_vec = [](const Vector& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  };
  try {
    Vector x(n, 1.0 / static_cast<double>(n));
    double estimate = 0.0;
    std::size_t last_j = n;
    for (int iter = 0; iter < 5; ++iter) {
      const Vector y = solve(f, x);
      estimate = std::max(estimate, norm1_vec(y));
      Vector xi(n);
      for (std::size_t i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      const Vector z = solve_transposed(f, xi);
      std::size_t j = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (std::abs(z[i]) > std::abs(z[j])) j = i;
      double ztx = 0.0;
      for (std::size_t i = 0; i < n; ++i) ztx += z[i] * x[i];
      if (std::abs(z[j]) <= ztx || j == last_j) break;
      x.assign(n, 0.0);
      x[j] = 1.0;
      last_j = j;
    }
    Vector alt(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = n > 1 ? 1.0 + static_cast<double>(i) / static_cast<double>(n - 1) : 1.0;
      alt[i] = (i % 2 == 0) ? mag : -mag;
    }
    const double alt_est = 2.0 * norm1_vec(solve(f, alt)) / (3.0 * static_cast<double>(n));
    const double result = norm1(a) * std::max(estimate, alt_est);
    return std::isfinite(result) ? result : 1e308;
  } catch (const Error&) {
    return 1e308;
  }
}

}  // namespace mcsum
