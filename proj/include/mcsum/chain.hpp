#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcsum/error.hpp"
#include "mcsum/linalg.hpp"

namespace mcsum {

class TransitionMatrix;
TransitionMatrix validate(const Matrix& raw,
                          std::optional<std::vector<std::string>> labels = std::nullopt,
                          double row_tol = 1e-9);
TransitionMatrix permute_states(const TransitionMatrix& chain,
                                const std::vector<std::size_t>& order);

// A row-stochastic, irreducible transition matrix with state labels. Only
// validate() and permute_states() can create one.
class TransitionMatrix {
 public:
  std::size_t size() const noexcept { return p_.rows(); }
  const Matrix& p() const noexcept { return p_; }
  double operator()(std::size_t i, std::size_t j) const { return p_(i, j); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  TransitionMatrix(Matrix p, std::vector<std::string> labels)
      : p_(std::move(p)), labels_(std::move(labels)) {}

  friend TransitionMatrix validate(const Matrix&, std::optional<std::vector<std::string>>,
                                   double);
  friend TransitionMatrix permute_states(const TransitionMatrix&,
                                         const std::vector<std::size_t>&);

  Matrix p_;
  std::vector<std::string> labels_;
};

struct ColumnSums {
  Vector c;

  std::size_t size() const noexcept { return c.size(); }
  double operator[](std::size_t j) const { return c[j]; }
};

// Stationary probabilities, one per state.
struct StationaryDistribution {
  Vector pi;

  std::size_t size() const noexcept { return pi.size(); }
  double operator[](std::size_t j) const { return pi[j]; }
};

// Mean first passage times in steps; the diagonal holds the mean return time
// 1/pi_j.
struct MfptMatrix {
  Matrix mfpt;

  std::size_t size() const noexcept { return mfpt.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return mfpt(i, j); }
};

inline std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i + 1);
  return out;
}

namespace detail {

inline std::vector<bool> reachable(const Matrix& p, std::size_t start, bool reverse) {
  const std::size_t n = p.rows();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = reverse ? p(v, u) : p(u, v);
      if (w > 0.0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

// Communicating classes, each sorted, ordered by smallest member. Quadratic
// reachability per state; only used to build error messages.
inline std::vector<std::vector<std::size_t>> communicating_classes(const Matrix& p) {
  const std::size_t n = p.rows();
  std::vector<std::vector<bool>> fwd(n);
  for (std::size_t i = 0; i < n; ++i) fwd[i] = reachable(p, i, false);
  std::vector<bool> assigned(n, false);
  std::vector<std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    std::vector<std::size_t> cls;
    for (std::size_t j = i; j < n; ++j) {
      if (!assigned[j] && fwd[i][j] && fwd[j][i]) {
        cls.push_back(j);
        assigned[j] = true;
      }
    }
    classes.push_back(std::move(cls));
  }
  return classes;
}

inline std::string format_set(const std::vector<std::size_t>& states,
                              const std::vector<std::string>& labels) {
  std::string out = "{";
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (k) out += ",";
    out += labels[states[k]];
  }
  return out + "}";
}

}  // namespace detail

// True iff the directed graph of positive entries is strongly connected.
inline bool is_irreducible(const Matrix& p) {
  if (!p.is_square() || p.rows() == 0) return false;
  const auto fwd = detail::reachable(p, 0, false);
  const auto bwd = detail::reachable(p, 0, true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

/// Checks that `raw` is square, nonnegative, row-stochastic and irreducible.
/// Rows whose sum is within `row_tol` of one are divided by their sum; larger
/// deviations raise NotStochastic. NotIrreducible names the communicating
/// classes and the states that break strong connectivity from the first state.
inline TransitionMatrix validate(const Matrix& raw,
                                 std::optional<std::vector<std::string>> labels,
                                 double row_tol) {
  if (!raw.is_square() || raw.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "transition matrix must be non-empty and square");
  }
  const std::size_t n = raw.rows();
  std::vector<std::string> names = labels ? std::move(*labels) : default_labels(n);
  if (names.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(names.size()) + " labels for " + std::to_string(n) + " states");
  }

  Matrix p = raw;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (raw(i, j) < 0.0 || raw(i, j) > 1.0 + row_tol) {
        throw Error(ErrorKind::NotStochastic, "entry (" + names[i] + "," + names[j] +
                                                  ") = " + std::to_string(raw(i, j)) +
                                                  " outside [0,1]");
      }
      sum += raw(i, j);
    }
    if (!(std::abs(sum - 1.0) < row_tol)) {
      throw Error(ErrorKind::NotStochastic,
                  "row " + names[i] + " sums to " + std::to_string(sum));
    }
    if (std::abs(sum - 1.0) > 4.0 * static_cast<double>(n) * 2.220446049250313e-16) {
      for (std::size_t j = 0; j < n; ++j) p(i, j) = raw(i, j) / sum;
    }
  }

  if (!is_irreducible(p)) {
    const auto classes = detail::communicating_classes(p);
    std::string msg = "communicating classes";
    for (const auto& cls : classes) msg += " " + detail::format_set(cls, names);
    const auto fwd = detail::reachable(p, 0, false);
    const auto bwd = detail::reachable(p, 0, true);
    std::vector<std::size_t> unreachable, no_return;
    for (std::size_t i = 0; i < n; ++i) {
      if (!fwd[i]) unreachable.push_back(i);
      else if (!bwd[i]) no_return.push_back(i);
    }
    if (!unreachable.empty()) {
      msg += "; states " + detail::format_set(unreachable, names) + " unreachable from " +
             detail::format_set(classes.front(), names);
    }
    if (!no_return.empty()) {
      msg += "; states " + detail::format_set(no_return, names) + " cannot return to " +
             detail::format_set(classes.front(), names);
    }
    throw Error(ErrorKind::NotIrreducible, msg);
  }
  return TransitionMatrix(std::move(p), std::move(names));
}

inline ColumnSums column_sums(const TransitionMatrix& chain) {
  return ColumnSums{col_sums(chain.p())};
}

// New state k is old state order[k].
inline TransitionMatrix permute_states(const TransitionMatrix& chain,
                                       const std::vector<std::size_t>& order) {
  const std::size_t n = chain.size();
  if (order.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "permutation length mismatch");
  }
  std::vector<bool> used(n, false);
  for (std::size_t k : order) {
    if (k >= n || used[k]) throw Error(ErrorKind::InvalidArgument, "not a permutation");
    used[k] = true;
  }
  Matrix q(n, n);
  std::vector<std::string> labels(n);
  for (std::size_t a = 0; a < n; ++a) {
    labels[a] = chain.labels()[order[a]];
    for (std::size_t b = 0; b < n; ++b) q(a, b) = chain(order[a], order[b]);
  }
  return TransitionMatrix(std::move(q), std::move(labels));
}

struct Reordering {
  TransitionMatrix chain;
  std::vector<std::size_t> order;  // new state k is old state order[k]
};

// Sorts states by non-increasing column sum; equal sums keep original order.
inline Reordering reorder_by_column_sums(const TransitionMatrix& chain) {
  const ColumnSums c = column_sums(chain);
  std::vector<std::size_t> order(chain.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });
  return Reordering{permute_states(chain, order), order};
}

}  // namespace mcsum
