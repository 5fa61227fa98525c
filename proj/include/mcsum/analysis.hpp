#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <variant>
#include <vector>

#include "mcsum/chain.hpp"
#include "mcsum/ginv.hpp"
#include "mcsum/linalg.hpp"
#include "mcsum/oracle.hpp"
#include "mcsum/residuals.hpp"

namespace mcsum {

// pi_j = sum_i c_i h_ij
inline StationaryDistribution stationary_from_h(const ColumnSums& c, const ColsumInverse& h) {
  return StationaryDistribution{left_multiply(c.c, h.h)};
}

// m_jj = 1/pi_j, m_ij = (h_jj - h_ij)/pi_j. Valid because H e = e/m.
inline MfptMatrix mfpt_from_h(const ColsumInverse& h, const StationaryDistribution& pi) {
  const std::size_t n = h.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = i == j ? 1.0 / pi[j] : (h(j, j) - h(i, j)) / pi[j];
    }
  }
  return MfptMatrix{std::move(m)};
}

/// MFPT matrix from an arbitrary g-inverse G of I - P:
///   M = [G Pi - E (G Pi)_d + I - G + E G_d] D,   D = diag(1/pi_j).
/// The caller guarantees G is a g-inverse; H, Z and (I - P)^# all qualify.
inline MfptMatrix mfpt_general(const Matrix& g, const StationaryDistribution& pi) {
  const std::size_t n = g.rows();
  const Matrix proj = stationary_projector(pi);
  const Matrix all_ones(n, n, 1.0);
  const Matrix g_pi = g * proj;
  Vector recurrence(n);
  for (std::size_t j = 0; j < n; ++j) recurrence[j] = 1.0 / pi[j];
  const Matrix inner = g_pi - all_ones * diagonal_part(g_pi) + Matrix::identity(n) - g +
                       all_ones * diagonal_part(g);
  return MfptMatrix{inner * diagonal_matrix(recurrence)};
}

inline double kemeny_from_h(const ColsumInverse& h) {
  return 1.0 - 1.0 / static_cast<double>(h.size()) + trace(h.h);
}

inline double kemeny_from_z(const FundamentalMatrix& z) { return trace(z.z); }

// K = 1 + tr(G) - tr(G Pi) for any g-inverse G.
inline double kemeny_general(const Matrix& g, const StationaryDistribution& pi) {
  return 1.0 + trace(g) - trace(g * stationary_projector(pi));
}

// K_i = sum_j pi_j m_ij; these are all equal to K.
inline Vector kemeny_by_start(const MfptMatrix& mfpt, const StationaryDistribution& pi) {
  return right_multiply(mfpt.mfpt, pi.pi);
}

/// Rebuilds H from mean first passage times:
///   h_jj = pi_j (1 + sum_{k != j} c_k m_kj) / m,   h_ij = h_jj - pi_j m_ij.
inline ColsumInverse h_from_mfpt(const MfptMatrix& mfpt, const StationaryDistribution& pi,
                                 const ColumnSums& c) {
  const std::size_t n = mfpt.size();
  const double m = static_cast<double>(n);
  Matrix h(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double weighted = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) weighted += c[k] * mfpt(k, j);
    const double hjj = pi[j] * (1.0 + weighted) / m;
    for (std::size_t i = 0; i < n; ++i) h(i, j) = i == j ? hjj : hjj - pi[j] * mfpt(i, j);
  }
  return ColsumInverse{std::move(h), c};
}

// Matrix form of h_from_mfpt: H = Pi/m + (C/m - I)(M - M_d) Pi_d, C = e c^T.
inline Matrix h_from_mfpt_matrix_form(const MfptMatrix& mfpt, const StationaryDistribution& pi,
                                      const ColumnSums& c) {
  const std::size_t n = mfpt.size();
  const double inv_m = 1.0 / static_cast<double>(n);
  const Matrix colsum_rank_one = outer(Vector(n, 1.0), c.c);
  return inv_m * stationary_projector(pi) +
         (inv_m * colsum_rank_one - Matrix::identity(n)) * (mfpt.mfpt - diagonal_part(mfpt.mfpt)) *
             diagonal_matrix(pi.pi);
}

namespace detail {

// |pi - num/den|, switching to the cross-multiplied form when den is tiny
// (e.g. every other state enters j in exactly one step).
inline double ratio_residual(double pi, double num, double den) {
  if (std::abs(den) > 1e-6) return std::abs(pi - num / den);
  return std::abs(pi * den - num);
}

}  // namespace detail

/// Residuals of the MFPT relations: the defining equation (I - P)M = E - P M_d,
/// the column-sum relations for sum_i m_ij and sum_i c_i m_ij, and both printed
/// forms of each of the three pi_j representations.
inline ResidualReport identity_residuals(const TransitionMatrix& chain, const ColsumInverse& h,
                                         const MfptMatrix& mfpt, const StationaryDistribution& pi,
                                         const ColumnSums& c) {
  const std::size_t n = chain.size();
  const double m = static_cast<double>(n);
  const Matrix& M = mfpt.mfpt;
  ResidualReport r;

  {
    const Matrix lhs = (Matrix::identity(n) - chain.p()) * M;
    const Matrix rhs = Matrix(n, n, 1.0) - chain.p() * diagonal_part(M);
    r.add("mfpt_defining_equation", max_abs_diff(lhs, rhs));
  }

  double r23a = 0, r23b = 0, r24 = 0, r25 = 0;
  double r26a = 0, r26b = 0, r27a = 0, r27b = 0, r28a = 0, r28b = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0, weighted = 0.0, col_off = 0.0, weighted_off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      col += M(i, j);
      weighted += c[i] * M(i, j);
      if (i != j) {
        col_off += M(i, j);
        weighted_off += c[i] * M(i, j);
      }
    }
    const double mjj = M(j, j);
    const double hjj = h(j, j);
    r23a = std::max(r23a, std::abs((col - weighted) - (m - c[j] * mjj)));
    r23b = std::max(r23b, std::abs((col - weighted) - (m - c[j] / pi[j])));
    r24 = std::max(r24, std::abs(weighted - (c[j] * mjj - 1.0 + m * hjj * mjj)));
    r25 = std::max(r25, std::abs(col - (m - 1.0 + m * hjj * mjj)));

    r26a = std::max(r26a, detail::ratio_residual(pi[j], c[j], m - col + weighted));
    r26b = std::max(r26b, detail::ratio_residual(pi[j], 1.0, m - col_off + weighted_off));
    r27a = std::max(r27a, detail::ratio_residual(pi[j], c[j] + m * hjj, 1.0 + weighted));
    r27b = std::max(r27b, detail::ratio_residual(pi[j], m * hjj, 1.0 + weighted_off));
    r28a = std::max(r28a, detail::ratio_residual(pi[j], m * hjj, 1.0 + col - m));
    r28b = std::max(r28b, detail::ratio_residual(pi[j], m * hjj - 1.0, 1.0 + col_off - m));
  }
  r.add("mfpt_colsum_minus_weighted_colsum", r23a);
  r.add("mfpt_colsum_minus_weighted_colsum_via_pi", r23b);
  r.add("mfpt_weighted_colsum", r24);
  r.add("mfpt_colsum", r25);
  r.add("pi_from_colsums_full", r26a);
  r.add("pi_from_colsums_offdiagonal", r26b);
  r.add("pi_from_h_diag_weighted_full", r27a);
  r.add("pi_from_h_diag_weighted_offdiagonal", r27b);
  r.add("pi_from_h_diag_colsum_full", r28a);
  r.add("pi_from_h_diag_colsum_offdiagonal", r28b);
  return r;
}

struct BoundsReport {
  double kemeny = 0.0;
  double kemeny_lower = 0.0;         // (m + 1)/2
  double kemeny_margin = 0.0;
  double trace_h = 0.0;
  double trace_h_lower = 0.0;        // (m - 1)/2 + 1/m
  double trace_h_margin = 0.0;
  double trace_h_weak_margin = 0.0;  // tr(H) - 1/m
  Vector pi_upper_margin;            // m h_jj - pi_j, strictly positive
  Vector pi_lower_bound_offdiagonal; // 1 / (m + sum_{i != j} c_i m_ij)
  Vector pi_lower_bound_weighted;    // c_j / (1 + sum_i c_i m_ij)
  Vector pi_lower_margin;            // pi_j - max(both lower bounds), strictly positive

  double min_pi_upper_margin() const {
    return pi_upper_margin.empty() ? 0.0
                                   : *std::min_element(pi_upper_margin.begin(), pi_upper_margin.end());
  }
  double min_pi_lower_margin() const {
    return pi_lower_margin.empty() ? 0.0
                                   : *std::min_element(pi_lower_margin.begin(), pi_lower_margin.end());
  }

  // Non-strict bounds within -tol; the per-state bounds must be strictly
  // positive except for the one-state chain, where they are equalities.
  bool holds(double tol = 1e-12) const {
    const bool single = pi_upper_margin.size() <= 1;
    auto strict = [&](double v) { return single ? v >= -tol : v > 0.0; };
    return kemeny_margin >= -tol && trace_h_margin >= -tol && strict(trace_h_weak_margin) &&
           strict(min_pi_upper_margin()) && strict(min_pi_lower_margin());
  }
};

inline BoundsReport bounds_check(const ColsumInverse& h, const StationaryDistribution& pi,
                                 const MfptMatrix& mfpt, const ColumnSums& c) {
  const std::size_t n = h.size();
  const double m = static_cast<double>(n);
  BoundsReport b;
  b.trace_h = trace(h.h);
  b.kemeny = 1.0 - 1.0 / m + b.trace_h;
  b.kemeny_lower = (m + 1.0) / 2.0;
  b.kemeny_margin = b.kemeny - b.kemeny_lower;
  b.trace_h_lower = (m - 1.0) / 2.0 + 1.0 / m;
  b.trace_h_margin = b.trace_h - b.trace_h_lower;
  b.trace_h_weak_margin = b.trace_h - 1.0 / m;
  b.pi_upper_margin.resize(n);
  b.pi_lower_bound_offdiagonal.resize(n);
  b.pi_lower_bound_weighted.resize(n);
  b.pi_lower_margin.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double weighted = 0.0, weighted_off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weighted += c[i] * mfpt(i, j);
      if (i != j) weighted_off += c[i] * mfpt(i, j);
    }
    b.pi_upper_margin[j] = m * h(j, j) - pi[j];
    b.pi_lower_bound_offdiagonal[j] = 1.0 / (m + weighted_off);
    b.pi_lower_bound_weighted[j] = c[j] / (1.0 + weighted);
    b.pi_lower_margin[j] =
        pi[j] - std::max(b.pi_lower_bound_offdiagonal[j], b.pi_lower_bound_weighted[j]);
  }
  return b;
}

struct DoublyStochasticReport {
  double max_colsum_deviation = 0.0;
  ResidualReport residuals;
  Vector mfpt_row_sums;
  double min_row_sum_margin = 0.0;  // min_i m_i. - m(m+1)/2
};

struct NotApplicable {
  double max_colsum_deviation = 0.0;
};

using DoublyStochasticOutcome = std::variant<DoublyStochasticReport, NotApplicable>;

/// Specialized identities for chains whose column sums are all one: uniform
/// pi, H = Z + ((1-m)/m^2) E, column and row sums of M in terms of diag(H),
/// diag(Z), tr(H), tr(Z) and K, and the row-sum lower bound m(m+1)/2.
inline DoublyStochasticOutcome doubly_stochastic_report(const TransitionMatrix& chain,
                                                        double threshold = 1e-9) {
  const std::size_t n = chain.size();
  const double m = static_cast<double>(n);
  const ColumnSums c = column_sums(chain);
  double deviation = 0.0;
  for (double v : c.c) deviation = std::max(deviation, std::abs(v - 1.0));
  if (!(deviation < threshold)) return NotApplicable{deviation};

  const ColsumInverse h = compute_h(chain);
  const StationaryDistribution pi = stationary_from_h(c, h);
  const FundamentalMatrix z = compute_z(chain, oracle::stationary_direct(chain));
  const MfptMatrix mfpt = mfpt_from_h(h, pi);
  const double K = kemeny_from_z(z);
  const double tr_h = trace(h.h);
  const double tr_z = trace(z.z);

  DoublyStochasticReport rep;
  rep.max_colsum_deviation = deviation;
  auto& r = rep.residuals;

  r.add("pi_uniform", max_abs_diff(pi.pi, Vector(n, 1.0 / m)));
  r.add("h_is_z_shifted", max_abs_diff(h.h, z.z + ((1.0 - m) / (m * m)) * Matrix(n, n, 1.0)));

  const Vector col = col_sums(mfpt.mfpt);
  const Vector row = row_sums(mfpt.mfpt);
  double r30a = 0, r30b = 0;
  for (std::size_t j = 0; j < n; ++j) {
    r30a = std::max(r30a, std::abs(col[j] - (m - 1.0 + m * m * h(j, j))));
    r30b = std::max(r30b, std::abs(col[j] - m * m * z(j, j)));
  }
  r.add("mfpt_colsum_from_h_diag", r30a);
  r.add("mfpt_colsum_from_z_diag", r30b);

  double r36a = 0, r36b = 0, r36c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r36a = std::max(r36a, std::abs(row[i] - m * K));
    r36b = std::max(r36b, std::abs(row[i] - (m - 1.0 + m * tr_h)));
    r36c = std::max(r36c, std::abs(row[i] - m * tr_z));
  }
  r.add("mfpt_rowsum_is_m_kemeny", r36a);
  r.add("mfpt_rowsum_from_trace_h", r36b);
  r.add("mfpt_rowsum_from_trace_z", r36c);

  double total = 0.0;
  for (double v : row) total += v;
  r.add("kemeny_is_mfpt_total_over_m_squared", std::abs(K - total / (m * m)));
  r.add("kemeny_from_h_matches_trace_z", std::abs(kemeny_from_h(h) - tr_z));

  rep.mfpt_row_sums = row;
  rep.min_row_sum_margin = *std::min_element(row.begin(), row.end()) - m * (m + 1.0) / 2.0;
  return rep;
}

}  // namespace mcsum
