#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "mcsum/analysis.hpp"
#include "mcsum/chain.hpp"
#include "mcsum/ginv.hpp"
#include "mcsum/oracle.hpp"
#include "mcsum/rng.hpp"

namespace mcsum {

/// Random irreducible chain: each row is a flat Dirichlet draw (normalized unit
/// exponentials). With sparsity s > 0, entries below the cutoff
/// 1 - (1 - s)^{1/(m-1)} (the level a flat Dirichlet marginal falls below with
/// probability s) are zeroed, keeping each row's largest entry, and the row is
/// renormalized. Reducible draws are retried with a derived seed.
inline TransitionMatrix random_chain(std::size_t m, std::uint64_t seed, double sparsity = 0.0) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "random_chain needs m >= 2");
  if (!(sparsity >= 0.0 && sparsity <= 0.8)) {
    throw Error(ErrorKind::InvalidArgument, "sparsity must lie in [0, 0.8]");
  }
  const double cutoff =
      sparsity > 0.0 ? 1.0 - std::pow(1.0 - sparsity, 1.0 / static_cast<double>(m - 1)) : 0.0;
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    SplitMix64 rng(derive_seed(seed, {attempt}));
    Matrix raw(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      auto row = raw.row(i);
      double sum = 0.0;
      for (double& v : row) sum += (v = rng.exponential());
      for (double& v : row) v /= sum;
      if (cutoff > 0.0) {
        const auto largest = std::max_element(row.begin(), row.end());
        for (auto it = row.begin(); it != row.end(); ++it)
          if (it != largest && *it < cutoff) *it = 0.0;
        sum = 0.0;
        for (double v : row) sum += v;
        for (double& v : row) v /= sum;
      }
    }
    if (is_irreducible(raw)) return validate(raw);
  }
  throw Error(ErrorKind::GenerationFailed,
              "no irreducible chain after 100 attempts (m=" + std::to_string(m) + ")");
}

/// Random doubly stochastic chain: a flat-Dirichlet mixture of the cyclic
/// shift and `extra` uniformly random permutation matrices. The cyclic shift
/// keeps the mixture irreducible.
inline TransitionMatrix random_doubly_stochastic(std::size_t m, std::uint64_t seed,
                                                 std::size_t extra = 3) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "random_doubly_stochastic needs m >= 2");
  SplitMix64 rng(seed);
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> shift(m);
  for (std::size_t i = 0; i < m; ++i) shift[i] = (i + 1) % m;
  perms.push_back(shift);
  for (std::size_t k = 0; k < extra; ++k) {
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = m - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.next() % (i + 1));
      std::swap(perm[i], perm[j]);
    }
    perms.push_back(std::move(perm));
  }
  Vector weights(perms.size());
  double total = 0.0;
  for (double& w : weights) total += (w = rng.exponential());
  Matrix raw(m, m);
  for (std::size_t k = 0; k < perms.size(); ++k)
    for (std::size_t i = 0; i < m; ++i) raw(i, perms[k][i]) += weights[k] / total;
  return validate(raw);
}

// Hash of the raw IEEE-754 bit patterns of P, little-endian byte order.
inline std::uint64_t chain_digest(const TransitionMatrix& chain) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : chain.p().data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    h = fnv1a(bytes, 8, h);
  }
  return h;
}

inline constexpr double kSignTieTolerance = 1e-12;

// -1, 0 or +1; |x - y| below the tie tolerance counts as 0.
inline int tolerant_sign(double x, double y, double tie = kSignTieTolerance) {
  const double d = x - y;
  if (std::abs(d) < tie) return 0;
  return d > 0.0 ? 1 : -1;
}

namespace relation {
// Theorem-backed for every chain: pi_i > pi_j exactly when m_ii < m_jj.
inline constexpr std::string_view kPiVsRecurrence = "pi_vs_recurrence";
// Theorem-backed for m = 2 only: c, pi, -m_dd, (b - a) order together, and
// h_dd, M column sums, (a - b) order together.
inline constexpr std::string_view kTwoStateEquivalences = "two_state_equivalences";
// Conjectural: c_i > c_j implies pi_i > pi_j.
inline constexpr std::string_view kColsumImpliesPi = "colsum_implies_pi";
// Conjectural: c_i > c_j implies sum_k m_ki < sum_k m_kj (M column sums in reverse order).
inline constexpr std::string_view kColsumImpliesMfptColsumReverse =
    "colsum_implies_mfpt_colsum_reverse";

inline const std::vector<std::string>& all() {
  static const std::vector<std::string> names{
      std::string(kPiVsRecurrence), std::string(kTwoStateEquivalences),
      std::string(kColsumImpliesPi), std::string(kColsumImpliesMfptColsumReverse)};
  return names;
}

inline bool theorem_backed(std::string_view name) {
  return name == kPiVsRecurrence || name == kTwoStateEquivalences;
}
}  // namespace relation

struct PairSigns {
  std::size_t i = 0;
  std::size_t j = 0;
  int c = 0;
  int pi = 0;
  int h_diag = 0;
  int z_diag = 0;
  int recurrence = 0;  // m_ii vs m_jj
  int mfpt_row = 0;    // sum_k m_ik vs sum_k m_jk
  int mfpt_col = 0;    // sum_k m_ki vs sum_k m_kj
};

struct Violation {
  std::string relation;
  std::size_t i = 0;
  std::size_t j = 0;
};

struct OrderingRecord {
  std::uint64_t digest = 0;
  std::size_t m = 0;
  std::vector<PairSigns> pairs;  // i < j, lexicographic
  std::vector<Violation> violations;

  bool violates(std::string_view relation) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.relation == relation; });
  }
  bool violates(std::string_view relation, std::size_t i, std::size_t j) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) {
      return v.relation == relation && v.i == i && v.j == j;
    });
  }
};

namespace detail {
// True when every nonzero sign in the list agrees.
inline bool signs_agree(std::initializer_list<int> signs) {
  int seen = 0;
  for (int s : signs) {
    if (s == 0) continue;
    if (seen == 0) seen = s;
    else if (s != seen) return false;
  }
  return true;
}
}  // namespace detail

inline OrderingRecord ordering_report(const TransitionMatrix& chain, const ColumnSums& c,
                                      const StationaryDistribution& pi, const ColsumInverse& h,
                                      const FundamentalMatrix& z, const MfptMatrix& mfpt) {
  const std::size_t n = chain.size();
  OrderingRecord rec;
  rec.digest = chain_digest(chain);
  rec.m = n;
  const Vector rows = row_sums(mfpt.mfpt);
  const Vector cols = col_sums(mfpt.mfpt);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      PairSigns s;
      s.i = i;
      s.j = j;
      s.c = tolerant_sign(c[i], c[j]);
      s.pi = tolerant_sign(pi[i], pi[j]);
      s.h_diag = tolerant_sign(h(i, i), h(j, j));
      s.z_diag = tolerant_sign(z(i, i), z(j, j));
      s.recurrence = tolerant_sign(mfpt(i, i), mfpt(j, j));
      s.mfpt_row = tolerant_sign(rows[i], rows[j]);
      s.mfpt_col = tolerant_sign(cols[i], cols[j]);
      rec.pairs.push_back(s);

      auto flag = [&](std::string_view name) {
        rec.violations.push_back(Violation{std::string(name), i, j});
      };
      if (!detail::signs_agree({s.pi, -s.recurrence})) flag(relation::kPiVsRecurrence);
      if (n == 2) {
        const int b_minus_a = tolerant_sign(chain(1, 0), chain(0, 1));
        if (!detail::signs_agree({s.c, s.pi, -s.recurrence, b_minus_a}) ||
            !detail::signs_agree({s.h_diag, s.mfpt_col, -b_minus_a})) {
          flag(relation::kTwoStateEquivalences);
        }
      }
      if (s.c != 0 && s.pi != 0 && s.c != s.pi) flag(relation::kColsumImpliesPi);
      if (s.c != 0 && s.mfpt_col != 0 && s.c == s.mfpt_col) {
        flag(relation::kColsumImpliesMfptColsumReverse);
      }
    }
  }
  return rec;
}

inline OrderingRecord ordering_report(const TransitionMatrix& chain) {
  const ColumnSums c = column_sums(chain);
  const ColsumInverse h = compute_h(chain);
  const StationaryDistribution pi = stationary_from_h(c, h);
  const FundamentalMatrix z = compute_z(chain, oracle::stationary_direct(chain));
  const MfptMatrix mfpt = mfpt_from_h(h, pi);
  return ordering_report(chain, c, pi, h, z, mfpt);
}

struct ScanConfig {
  std::vector<std::size_t> state_counts{3};
  std::size_t trials = 1000;
  std::uint64_t seed = 7;
  double sparsity = 0.0;
  std::vector<std::string> relations;  // empty = all
  std::size_t threads = 1;             // 0 = hardware concurrency
  double identity_tol = 1e-8;
};

struct RelationTally {
  std::string relation;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t violations = 0;  // chains with at least one violating pair
  bool theorem_backed = false;

  double rate() const {
    return trials ? static_cast<double>(violations) / static_cast<double>(trials) : 0.0;
  }
};

struct Counterexample {
  std::size_t m = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  TransitionMatrix chain;
  OrderingRecord record;
};

struct IdentityFailure {
  std::size_t m = 0;
  std::size_t trial = 0;
  std::string what;
  double value = 0.0;
};

struct ScanResult {
  ScanConfig config;
  std::vector<RelationTally> tallies;       // ordered by (m, relation order)
  std::vector<Counterexample> counterexamples;  // ordered by (m, trial)
  std::vector<IdentityFailure> identity_failures;
  double max_identity_residual = 0.0;

  std::size_t theorem_violations() const {
    std::size_t total = 0;
    for (const auto& t : tallies)
      if (t.theorem_backed) total += t.violations;
    return total;
  }
  bool hard_failure() const { return theorem_violations() > 0 || !identity_failures.empty(); }
};

namespace detail {

struct TrialOutcome {
  std::uint64_t seed = 0;
  std::optional<TransitionMatrix> chain;
  OrderingRecord record;
  double max_residual = 0.0;
  std::vector<std::pair<std::string, double>> failures;
};

inline TrialOutcome run_trial(std::size_t m, std::size_t trial, const ScanConfig& cfg) {
  TrialOutcome out;
  out.seed = derive_seed(cfg.seed, {m, trial});
  TransitionMatrix chain = random_chain(m, out.seed, cfg.sparsity);
  const ColumnSums c = column_sums(chain);
  const ColsumInverse h = compute_h(chain);
  const StationaryDistribution pi = stationary_from_h(c, h);
  const FundamentalMatrix z = compute_z(chain, oracle::stationary_direct(chain));
  const MfptMatrix mfpt = mfpt_from_h(h, pi);

  ResidualReport residuals = structural_residuals(chain, h, z, pi);
  residuals.append(conversion_residuals(chain, h, z));
  residuals.append(identity_residuals(chain, h, mfpt, pi, c));
  out.max_residual = residuals.max();
  for (const auto& f : residuals.failures(cfg.identity_tol)) out.failures.emplace_back(f.name, f.value);
  const BoundsReport bounds = bounds_check(h, pi, mfpt, c);
  if (!bounds.holds()) out.failures.emplace_back("bounds", bounds.kemeny_margin);
  if (!positivity_margins(h, z).all_positive()) out.failures.emplace_back("positivity", 0.0);

  out.record = ordering_report(chain, c, pi, h, z, mfpt);
  out.chain = std::move(chain);
  return out;
}

}  // namespace detail

/// Runs `trials` random chains for each state count. Trial t for state count m
/// uses seed derive_seed(config.seed, {m, t}); trials may run on several
/// threads but results are reduced in (m, t) order, so the output does not
/// depend on the thread count.
inline ScanResult scan(const ScanConfig& config) {
  if (config.trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be at least 1");
  for (std::size_t m : config.state_counts)
    if (m < 2) throw Error(ErrorKind::InvalidArgument, "state counts must be at least 2");
  std::vector<std::string> relations = config.relations.empty() ? relation::all() : config.relations;
  for (const auto& r : relations) {
    const auto& known = relation::all();
    if (std::find(known.begin(), known.end(), r) == known.end()) {
      throw Error(ErrorKind::InvalidArgument, "unknown relation '" + r + "'");
    }
  }

  std::size_t threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                            : config.threads;
  threads = std::min(threads, config.trials);

  ScanResult result;
  result.config = config;
  for (std::size_t m : config.state_counts) {
    std::vector<detail::TrialOutcome> outcomes(config.trials);
    std::vector<std::exception_ptr> errors(threads);
    auto worker = [&](std::size_t w) {
      try {
        for (std::size_t t = w; t < config.trials; t += threads) {
          outcomes[t] = detail::run_trial(m, t, config);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker, w);
      for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    std::vector<RelationTally> tallies;
    for (const auto& r : relations) {
      if (r == relation::kTwoStateEquivalences && m != 2) continue;
      tallies.push_back(RelationTally{r, m, config.trials, 0, relation::theorem_backed(r)});
    }
    for (std::size_t t = 0; t < config.trials; ++t) {
      auto& o = outcomes[t];
      result.max_identity_residual = std::max(result.max_identity_residual, o.max_residual);
      for (const auto& [what, value] : o.failures) {
        result.identity_failures.push_back(IdentityFailure{m, t, what, value});
      }
      bool logged = false;
      for (auto& tally : tallies) {
        if (o.record.violates(tally.relation)) {
          ++tally.violations;
          logged = true;
        }
      }
      if (logged) {
        result.counterexamples.push_back(
            Counterexample{m, t, o.seed, std::move(*o.chain), std::move(o.record)});
      }
    }
    result.tallies.insert(result.tallies.end(), tallies.begin(), tallies.end());
  }
  return result;
}

}  // namespace mcsum
