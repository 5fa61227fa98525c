#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcsum/analysis.hpp"
#include "mcsum/chain.hpp"
#include "mcsum/ginv.hpp"
#include "mcsum/linalg.hpp"
#include "mcsum/oracle.hpp"
#include "mcsum/residuals.hpp"
#include "mcsum/scan.hpp"

namespace mcsum {

struct AnalyzeOptions {
  bool reorder = false;
  double condition_warning_threshold = 1e8;
};

struct KemenyVariants {
  double value = 0.0;               // tr(Z), the canonical value
  double from_group_inverse = 0.0;  // 1 + tr(G) - tr(G Pi) with G = (I - P)^#
  double from_h = 0.0;              // 1 - 1/m + tr(H)
  double from_z = 0.0;              // tr(Z)
  double max_deviation = 0.0;
};

struct ChainReport {
  std::vector<std::string> labels;
  std::size_t m = 0;
  std::optional<std::vector<std::size_t>> permutation;  // new state k is old state [k]
  Matrix p;
  ColumnSums column_sums;
  StationaryDistribution stationary;
  KemenyVariants kemeny;
  MfptMatrix mfpt;
  Matrix h_matrix;
  Matrix z_matrix;
  ResidualReport structural_residuals;  // H identities and H <-> Z conversions
  ResidualReport identity_residuals;    // MFPT relations
  ResidualReport cross_checks;          // oracle agreement and g-inverse invariance
  PositivityMargins positivity{};
  BoundsReport bounds;
  DoublyStochasticOutcome doubly_stochastic = NotApplicable{};
  OrderingRecord ordering;
  double condition_estimate = 0.0;
  bool condition_warning = false;

  // Max over every residual table.
  double max_residual() const {
    return std::max({structural_residuals.max(), identity_residuals.max(), cross_checks.max()});
  }
};

namespace detail {
inline double max_relative_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    const double ref = std::abs(b.data()[k]);
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]) / (ref > 0.0 ? ref : 1.0));
  }
  return m;
}
}  // namespace detail

/// Full analysis of one chain. Z is built from the direct stationary solve so
/// that everything derived from H can be checked against an H-free route.
inline ChainReport analyze(const TransitionMatrix& input, const AnalyzeOptions& options = {}) {
  ChainReport rep;
  TransitionMatrix chain = input;
  if (options.reorder) {
    Reordering r = reorder_by_column_sums(input);
    chain = std::move(r.chain);
    rep.permutation = std::move(r.order);
  }
  const std::size_t n = chain.size();
  const double m = static_cast<double>(n);
  rep.labels = chain.labels();
  rep.m = n;
  rep.p = chain.p();

  const ColumnSums c = column_sums(chain);
  const Matrix system = colsum_system(chain);
  const LuFactors factors = lu_factor(system);
  rep.condition_estimate = condition_estimate(factors, system);
  rep.condition_warning = rep.condition_estimate >= options.condition_warning_threshold;

  const ColsumInverse h{solve(factors, Matrix::identity(n)), c};
  const StationaryDistribution pi = stationary_from_h(c, h);
  const StationaryDistribution pi_direct = oracle::stationary_direct(chain);
  const FundamentalMatrix z = compute_z(chain, pi_direct);
  const Matrix group = group_inverse(z);
  const MfptMatrix mfpt = mfpt_from_h(h, pi);

  rep.column_sums = c;
  rep.stationary = pi;
  rep.mfpt = mfpt;
  rep.h_matrix = h.h;
  rep.z_matrix = z.z;

  rep.kemeny.from_h = kemeny_from_h(h);
  rep.kemeny.from_z = kemeny_from_z(z);
  rep.kemeny.from_group_inverse = kemeny_general(group, pi_direct);
  rep.kemeny.value = rep.kemeny.from_z;
  rep.kemeny.max_deviation =
      std::max({std::abs(rep.kemeny.from_h - rep.kemeny.from_z),
                std::abs(rep.kemeny.from_h - rep.kemeny.from_group_inverse),
                std::abs(rep.kemeny.from_z - rep.kemeny.from_group_inverse)});

  rep.structural_residuals = structural_residuals(chain, h, z, pi);
  rep.structural_residuals.append(conversion_residuals(chain, h, z));
  rep.identity_residuals = identity_residuals(chain, h, mfpt, pi, c);

  auto& x = rep.cross_checks;
  x.add("stationary_vs_direct_solve", max_abs_diff(pi.pi, pi_direct.pi));
  x.add("mfpt_vs_direct_solve_relative",
        detail::max_relative_diff(mfpt.mfpt, oracle::mfpt_direct(chain, pi_direct).mfpt));
  x.add("mfpt_general_with_h", max_abs_diff(mfpt_general(h.h, pi).mfpt, mfpt.mfpt));
  x.add("mfpt_general_with_z", max_abs_diff(mfpt_general(z.z, pi_direct).mfpt, mfpt.mfpt));
  x.add("mfpt_general_with_group_inverse",
        max_abs_diff(mfpt_general(group, pi_direct).mfpt, mfpt.mfpt));
  x.add("kemeny_variant_spread", rep.kemeny.max_deviation);
  x.add("kemeny_general_with_h", std::abs(kemeny_general(h.h, pi) - rep.kemeny.value));
  x.add("kemeny_general_with_z", std::abs(kemeny_general(z.z, pi_direct) - rep.kemeny.value));
  {
    const Vector by_start = kemeny_by_start(mfpt, pi);
    double spread = 0.0;
    for (double k : by_start) spread = std::max(spread, std::abs(k - rep.kemeny.value));
    x.add("kemeny_independent_of_start", spread);
    double weighted = 0.0;
    for (std::size_t k = 0; k < n; ++k) weighted += c[k] * by_start[k];
    x.add("kemeny_colsum_weighted_average", std::abs(weighted / m - rep.kemeny.value));
  }
  x.add("h_from_mfpt_round_trip", max_abs_diff(h_from_mfpt(mfpt, pi, c).h, h.h));
  x.add("h_from_mfpt_matrix_form", max_abs_diff(h_from_mfpt_matrix_form(mfpt, pi, c), h.h));
  {
    const Matrix colsum_rank_one = outer(Vector(n, 1.0), c.c);
    const Matrix proj = stationary_projector(pi);
    x.add("colsum_rank_one_times_h_is_projector", max_abs_diff(colsum_rank_one * h.h, proj));
    x.add("colsum_rank_one_times_projector", max_abs_diff(colsum_rank_one * proj, m * proj));
    x.add("colsum_rank_one_squared",
          max_abs_diff(colsum_rank_one * colsum_rank_one, m * colsum_rank_one));
  }
  {
    const Matrix ip = Matrix::identity(n) - chain.p();
    x.add("h_is_g_inverse", max_abs_diff(ip * h.h * ip, ip));
    x.add("group_inverse_annihilates_e", max_abs(right_multiply(group, Vector(n, 1.0))));
    x.add("group_inverse_annihilates_pi", max_abs(left_multiply(pi_direct.pi, group)));
  }

  rep.positivity = positivity_margins(h, z);
  rep.bounds = bounds_check(h, pi, mfpt, c);
  rep.doubly_stochastic = doubly_stochastic_report(chain);
  rep.ordering = ordering_report(chain, c, pi, h, z, mfpt);
  return rep;
}

}  // namespace mcsum
