#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "mcsum/chain.hpp"
#include "mcsum/linalg.hpp"
#include "mcsum/residuals.hpp"

namespace mcsum {

/// H = (I - P + e c^T)^{-1}, the g-inverse of I - P built from the column sums.
struct ColsumInverse {
  Matrix h;
  ColumnSums c;

  std::size_t size() const noexcept { return h.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return h(i, j); }
};

/// Z = (I - P + e pi^T)^{-1}, the fundamental matrix, with the pi it was built from.
struct FundamentalMatrix {
  Matrix z;
  StationaryDistribution pi;

  std::size_t size() const noexcept { return z.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return z(i, j); }
};

namespace detail {

inline Vector ones(std::size_t n) { return Vector(n, 1.0); }

// I - P + e u^T
inline Matrix rank_one_update(const Matrix& p, std::span<const double> u) {
  const std::size_t n = p.rows();
  Matrix a = Matrix::identity(n) - p;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) += u[j];
  return a;
}

}  // namespace detail

// e pi^T
inline Matrix stationary_projector(const StationaryDistribution& pi) {
  return outer(detail::ones(pi.size()), pi.pi);
}

inline Matrix colsum_system(const TransitionMatrix& chain) {
  return detail::rank_one_update(chain.p(), column_sums(chain).c);
}

inline ColsumInverse compute_h(const TransitionMatrix& chain) {
  ColumnSums c = column_sums(chain);
  return ColsumInverse{invert(detail::rank_one_update(chain.p(), c.c)), std::move(c)};
}

// `pi` should come from an H-free solver so that Z stays independent of H.
inline FundamentalMatrix compute_z(const TransitionMatrix& chain,
                                   const StationaryDistribution& pi) {
  if (pi.size() != chain.size()) {
    throw Error(ErrorKind::DimensionMismatch, "compute_z: pi length mismatch");
  }
  return FundamentalMatrix{invert(detail::rank_one_update(chain.p(), pi.pi)), pi};
}

// Meyer's group inverse (I - P)^# = Z - e pi^T.
inline Matrix group_inverse(const FundamentalMatrix& z) {
  return z.z - stationary_projector(z.pi);
}

// Z = H + Pi - Pi H
inline FundamentalMatrix z_from_h(const ColsumInverse& h, const StationaryDistribution& pi) {
  const Matrix proj = stationary_projector(pi);
  return FundamentalMatrix{h.h + proj - proj * h.h, pi};
}

// H = Z + Pi/m - e c^T Z / m
inline ColsumInverse h_from_z(const FundamentalMatrix& z, const ColumnSums& c) {
  const std::size_t n = z.size();
  const double inv_m = 1.0 / static_cast<double>(n);
  const Matrix proj = stationary_projector(z.pi);
  const Vector ctz = left_multiply(c.c, z.z);
  Matrix h = z.z + inv_m * proj;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) -= inv_m * ctz[j];
  return ColsumInverse{std::move(h), c};
}

/// Residuals of the row, column and element identities satisfied by H, plus
/// the relations that tie pi, H and Z together through c. Each identity is
/// evaluated along its own route (row vectors, column vectors or explicit
/// elementwise sums) rather than by reusing one matrix product.
inline ResidualReport structural_residuals(const TransitionMatrix& chain,
                                           const ColsumInverse& h,
                                           const FundamentalMatrix& z,
                                           const StationaryDistribution& pi) {
  const Matrix& p = chain.p();
  const Matrix& H = h.h;
  const Matrix& Z = z.z;
  const Vector& c = h.c.c;
  const Vector& w = pi.pi;
  const std::size_t n = chain.size();
  const double m = static_cast<double>(n);
  auto delta = [](std::size_t i, std::size_t j) { return i == j ? 1.0 : 0.0; };

  ResidualReport r;

  r.add("colsum_weighted_h_is_pi", max_abs_diff(left_multiply(c, H), w));

  Vector expected_rows(n, 1.0 / m);
  r.add("h_row_sums_are_one_over_m", max_abs_diff(row_sums(H), expected_rows));

  double chesum = 0.0;
  for (double v : left_multiply(c, H)) chesum += v;
  double csum = 0.0;
  for (double v : c) csum += v;
  r.add("colsum_h_total_is_one", std::abs(chesum - 1.0));
  r.add("colsums_total_m", std::abs(csum - m));

  // Row identities, one row vector at a time.
  {
    double res_pi = 0.0, res_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vector pH = left_multiply(p.row(i), H);
      const Vector hP = left_multiply(H.row(i), p);
      for (std::size_t j = 0; j < n; ++j) {
        res_pi = std::max(res_pi, std::abs(H(i, j) - pH[j] - (delta(i, j) - w[j])));
        res_c = std::max(res_c, std::abs(H(i, j) - hP[j] - (delta(i, j) - c[j] / m)));
      }
    }
    r.add("row_h_minus_p_row_h_is_ei_minus_pi", res_pi);
    r.add("row_h_minus_h_row_p_is_ei_minus_c_over_m", res_c);
  }

  // Column identities, one column vector at a time.
  {
    double res_pi = 0.0, res_c = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      Vector hj(n), pj(n);
      for (std::size_t i = 0; i < n; ++i) {
        hj[i] = H(i, j);
        pj[i] = p(i, j);
      }
      const Vector Phj = right_multiply(p, hj);
      const Vector Hpj = right_multiply(H, pj);
      for (std::size_t i = 0; i < n; ++i) {
        res_pi = std::max(res_pi, std::abs(hj[i] - Phj[i] - (delta(i, j) - w[j])));
        res_c = std::max(res_c, std::abs(hj[i] - Hpj[i] - (delta(i, j) - c[j] / m)));
      }
    }
    r.add("col_h_minus_p_col_h_is_ej_minus_pij_e", res_pi);
    r.add("col_h_minus_h_col_p_is_ej_minus_cj_over_m_e", res_c);
  }

  Vector expected_cols(n);
  for (std::size_t j = 0; j < n; ++j) expected_cols[j] = 1.0 - (m - 1.0) * w[j];
  r.add("h_col_sums_are_one_minus_m_minus_one_pi", max_abs_diff(col_sums(H), expected_cols));

  // Elementwise forms with explicit k-sums.
  {
    double res_left = 0.0, res_right = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double left = 0.0, right = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          left += p(i, k) * H(k, j);
          right += H(i, k) * p(k, j);
        }
        res_left = std::max(res_left, std::abs(H(i, j) - (left + delta(i, j) - w[j])));
        res_right = std::max(res_right, std::abs(H(i, j) - (right + delta(i, j) - c[j] / m)));
      }
    }
    r.add("element_h_via_p_left", res_left);
    r.add("element_h_via_p_right", res_right);
  }

  // (1+m) Pi = m Pi H + e c^T Z, as a matrix and as one row vector.
  {
    const Matrix proj = stationary_projector(pi);
    const Matrix lhs = (1.0 + m) * proj;
    const Matrix rhs = m * (proj * H) + outer(detail::ones(n), left_multiply(c, Z));
    r.add("projector_split_matrix", max_abs_diff(lhs, rhs));

    const Vector piH = left_multiply(w, H);
    const Vector cZ = left_multiply(c, Z);
    Vector rhs_row(n);
    for (std::size_t j = 0; j < n; ++j) rhs_row[j] = m * piH[j] + cZ[j];
    Vector lhs_row(n);
    for (std::size_t j = 0; j < n; ++j) lhs_row[j] = (1.0 + m) * w[j];
    r.add("projector_split_row", max_abs_diff(lhs_row, rhs_row));

    double res_elem = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double a = 0.0, b = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        a += w[k] * H(k, j);
        b += c[k] * Z(k, j);
      }
      res_elem = std::max(res_elem, std::abs((1.0 + m) * w[j] - (m * a + b)));
    }
    r.add("projector_split_element", res_elem);
  }
  return r;
}

/// Residuals of the H <-> Z conversions and of the column-constant difference
/// Z - H, computed against an independently built H and Z.
inline ResidualReport conversion_residuals(const TransitionMatrix& chain,
                                           const ColsumInverse& h,
                                           const FundamentalMatrix& z) {
  const std::size_t n = chain.size();
  const double m = static_cast<double>(n);
  const Vector& w = z.pi.pi;
  const Vector& c = h.c.c;
  ResidualReport r;

  r.add("z_from_h_matrix", max_abs_diff(z_from_h(h, z.pi).z, z.z));
  r.add("h_from_z_matrix", max_abs_diff(h_from_z(z, h.c).h, h.h));

  double res13 = 0.0, res14 = 0.0, spread = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double pih = 0.0, cz = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      pih += w[k] * h.h(k, j);
      cz += c[k] * z.z(k, j);
    }
    const double ref = z.z(0, j) - h.h(0, j);
    for (std::size_t i = 0; i < n; ++i) {
      res13 = std::max(res13, std::abs(z.z(i, j) - (h.h(i, j) + w[j] - pih)));
      res14 = std::max(res14, std::abs(h.h(i, j) - (z.z(i, j) + w[j] / m - cz / m)));
      spread = std::max(spread, std::abs((z.z(i, j) - h.h(i, j)) - ref));
    }
  }
  r.add("z_from_h_elementwise", res13);
  r.add("h_from_z_elementwise", res14);
  r.add("z_minus_h_column_constant", spread);

  r.add("round_trip_h_z_h", max_abs_diff(h_from_z(z_from_h(h, z.pi), h.c).h, h.h));
  r.add("round_trip_z_h_z", max_abs_diff(z_from_h(h_from_z(z, h.c), z.pi).z, z.z));

  // [I - P + E]^{-1} = [I - P + E/m]^{-1} + (1/m - 1) e pi^T
  const Matrix g_full = invert(detail::rank_one_update(chain.p(), Vector(n, 1.0)));
  const Matrix g_scaled = invert(detail::rank_one_update(chain.p(), Vector(n, 1.0 / m)));
  r.add("uniform_update_reexpression",
        max_abs_diff(g_full, g_scaled + (1.0 / m - 1.0) * stationary_projector(z.pi)));
  return r;
}

struct PositivityMargins {
  double min_h_diagonal;
  double min_z_diagonal;
  double min_h_diagonal_excess;  // min over i != j of h_jj - h_ij
  double min_z_diagonal_excess;

  bool all_positive() const {
    return min_h_diagonal > 0.0 && min_z_diagonal > 0.0 && min_h_diagonal_excess > 0.0 &&
           min_z_diagonal_excess > 0.0;
  }
};

inline PositivityMargins positivity_margins(const ColsumInverse& h, const FundamentalMatrix& z) {
  const std::size_t n = h.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  PositivityMargins out{inf, inf, inf, inf};
  for (std::size_t j = 0; j < n; ++j) {
    out.min_h_diagonal = std::min(out.min_h_diagonal, h.h(j, j));
    out.min_z_diagonal = std::min(out.min_z_diagonal, z.z(j, j));
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      out.min_h_diagonal_excess = std::min(out.min_h_diagonal_excess, h.h(j, j) - h.h(i, j));
      out.min_z_diagonal_excess = std::min(out.min_z_diagonal_excess, z.z(j, j) - z.z(i, j));
    }
  }
  return out;
}

}  // namespace mcsum
