#pragma once

// Ground-truth solvers and closed forms. Independent of the g-inverse module;
// only the dense kernel in linalg.hpp is shared.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mcsum/chain.hpp"
#include "mcsum/error.hpp"
#include "mcsum/linalg.hpp"
#include "mcsum/rng.hpp"

namespace mcsum::oracle {

// Solves (I - P^T) pi = 0 with the last equation replaced by sum(pi) = 1.
inline StationaryDistribution stationary_direct(const TransitionMatrix& chain) {
  const std::size_t n = chain.size();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - chain(j, i);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  Vector rhs(n, 0.0);
  rhs[n - 1] = 1.0;
  return StationaryDistribution{solve(lu_factor(a), rhs)};
}

// Power iteration on the lazy chain (P + I)/2, starting from uniform.
inline StationaryDistribution stationary_power(const TransitionMatrix& chain, double tol = 1e-12,
                                               std::size_t max_iters = 10'000'000) {
  const std::size_t n = chain.size();
  Vector pi(n, 1.0 / static_cast<double>(n));
  Vector next(n);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    for (std::size_t j = 0; j < n; ++j) next[j] = 0.5 * pi[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double half = 0.5 * pi[i];
      for (std::size_t j = 0; j < n; ++j) next[j] += half * chain(i, j);
    }
    const double change = max_abs_diff(next, pi);
    pi.swap(next);
    if (change < tol) return StationaryDistribution{pi};
  }
  throw Error(ErrorKind::NoConvergence,
              "power iteration did not settle within " + std::to_string(max_iters) + " steps");
}

/// For each target j, solves m_ij = 1 + sum_{k != j} p_ik m_kj over i != j
/// (the chain with j made absorbing), then sets m_jj = 1/pi_j.
inline MfptMatrix mfpt_direct(const TransitionMatrix& chain, const StationaryDistribution& pi) {
  const std::size_t n = chain.size();
  Matrix mfpt(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    mfpt(j, j) = 1.0 / pi[j];
    if (n == 1) continue;
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) others.push_back(k);
    const std::size_t r = others.size();
    Matrix a(r, r);
    for (std::size_t x = 0; x < r; ++x)
      for (std::size_t y = 0; y < r; ++y)
        a(x, y) = (x == y ? 1.0 : 0.0) - chain(others[x], others[y]);
    const Vector t = solve(lu_factor(a), Vector(r, 1.0));
    for (std::size_t x = 0; x < r; ++x) mfpt(others[x], j) = t[x];
  }
  return MfptMatrix{std::move(mfpt)};
}

// gcd of cycle lengths through the level structure of a BFS from state 0.
inline std::size_t period(const TransitionMatrix& chain) {
  const std::size_t n = chain.size();
  std::vector<long> level(n, -1);
  std::vector<std::size_t> queue{0};
  level[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t u = queue[head];
    for (std::size_t v = 0; v < n; ++v) {
      if (chain(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
    }
  }
  long g = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (chain(u, v) > 0.0 && level[u] >= 0 && level[v] >= 0)
        g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
  return g == 0 ? 1 : static_cast<std::size_t>(g);
}

struct MonteCarloEstimate {
  Matrix mfpt;            // sample means of first-passage (or return) step counts
  Matrix standard_error;  // sample standard deviation / sqrt(walks)
  StationaryDistribution pi;  // 1 / estimated mean return time, normalized
  std::size_t period = 1;
  bool stationary_reliable = true;  // false for periodic chains
  std::size_t walks_per_pair = 0;
};

/// Simulates `walks_per_pair` walks for every (start, target) pair. Walk w of
/// pair (i, j) draws from its own SplitMix64 stream derived from
/// (seed, i, j, w), so the result is reproducible and order independent.
inline MonteCarloEstimate mc_estimate(const TransitionMatrix& chain, std::uint64_t seed,
                                      std::size_t walks_per_pair,
                                      std::uint64_t max_steps = 100'000'000) {
  if (walks_per_pair == 0) {
    throw Error(ErrorKind::InvalidArgument, "walks_per_pair must be at least 1");
  }
  const std::size_t n = chain.size();
  std::vector<Vector> cumulative(n, Vector(n));
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) cumulative[i][j] = (s += chain(i, j));
  }
  auto step = [&](std::size_t from, SplitMix64& rng) {
    const double u = rng.uniform() * cumulative[from][n - 1];
    std::size_t last_positive = from;
    for (std::size_t k = 0; k < n; ++k) {
      if (chain(from, k) > 0.0) {
        last_positive = k;
        if (u < cumulative[from][k]) return k;
      }
    }
    return last_positive;
  };

  MonteCarloEstimate est;
  est.mfpt = Matrix(n, n);
  est.standard_error = Matrix(n, n);
  est.walks_per_pair = walks_per_pair;
  const double walks = static_cast<double>(walks_per_pair);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t w = 0; w < walks_per_pair; ++w) {
        SplitMix64 rng(derive_seed(seed, {i, j, w}));
        std::size_t state = i;
        std::uint64_t steps = 0;
        do {
          state = step(state, rng);
          ++steps;
        } while (state != j && steps < max_steps);
        const double t = static_cast<double>(steps);
        sum += t;
        sum_sq += t * t;
      }
      const double mean = sum / walks;
      const double var = walks > 1 ? std::max(0.0, (sum_sq - walks * mean * mean) / (walks - 1)) : 0.0;
      est.mfpt(i, j) = mean;
      est.standard_error(i, j) = std::sqrt(var / walks);
    }
  }
  Vector pi(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += (pi[j] = 1.0 / est.mfpt(j, j));
  for (double& v : pi) v /= total;
  est.pi = StationaryDistribution{std::move(pi)};
  est.period = period(chain);
  est.stationary_reliable = est.period == 1;
  return est;
}

/// Closed forms for P = [[1-a, a], [b, 1-b]].
struct TwoStateClosedForm {
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;  // 1 - a - b
  Matrix p;
  Vector c;
  Vector pi;
  Matrix h;
  Matrix z;
  Matrix mfpt;
  double kemeny = 0.0;
};

inline TwoStateClosedForm two_state_closed_form(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0)) {
    throw Error(ErrorKind::Degenerate, "two-state parameters must lie in [0,1]");
  }
  if (a + b == 0.0) {
    throw Error(ErrorKind::Degenerate, "a + b = 0 gives two absorbing states");
  }
  if (a == 0.0 || b == 0.0) {
    throw Error(ErrorKind::NotIrreducible, "a = 0 or b = 0 leaves an absorbing state");
  }
  TwoStateClosedForm f;
  f.a = a;
  f.b = b;
  f.d = 1.0 - a - b;
  const double s = a + b;
  f.p = Matrix::from_rows({{1.0 - a, a}, {b, 1.0 - b}});
  f.c = {1.0 - (a - b), 1.0 + (a - b)};
  f.pi = {b / s, a / s};
  const double hs = 1.0 / (2.0 * s);
  f.h = Matrix::from_rows({{hs * (1.0 + a), -hs * (1.0 - b)}, {-hs * (1.0 - a), hs * (1.0 + b)}});
  f.z = Matrix::from_rows({{(b + a / s) / s, (a - a / s) / s}, {(b - b / s) / s, (a + b / s) / s}});
  f.mfpt = Matrix::from_rows({{s / b, 1.0 / a}, {1.0 / b, s / a}});
  f.kemeny = 1.0 + 1.0 / s;
  return f;
}

/// Closed forms for the three-state chain
///   [[1-p2-p3, p2, p3], [q1, 1-q1-q3, q3], [r1, r2, 1-r1-r2]].
/// H and Z are assembled from the component matrices A_1..A_3 through
/// G(e, u) = (Pi + u_1 A_1 + u_2 A_2 + u_3 A_3) / (u_1 + u_2 + u_3).
struct ThreeStateClosedForm {
  double p2 = 0, p3 = 0, q1 = 0, q3 = 0, r1 = 0, r2 = 0;
  double delta1 = 0, delta2 = 0, delta3 = 0, delta = 0;
  double tau12 = 0, tau13 = 0, tau21 = 0, tau23 = 0, tau31 = 0, tau32 = 0, tau = 0;
  Matrix p;
  Vector c;
  Vector pi;
  Matrix projector;
  Matrix a1, a2, a3;
  Matrix h;
  Matrix z;
  Matrix mfpt;
  double kemeny = 0.0;
  // max |u^T (u_1 A_1 + u_2 A_2 + u_3 A_3)| for u = c and u = pi
  double annihilation_residual_c = 0.0;
  double annihilation_residual_pi = 0.0;
};

inline ThreeStateClosedForm three_state_closed_form(double p2, double p3, double q1, double q3,
                                                    double r1, double r2) {
  for (double v : {p2, p3, q1, q3, r1, r2}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "three-state parameters must lie in [0,1]");
    }
  }
  auto in_range = [](double s) { return s > 0.0 && s <= 1.0 + 4e-16; };
  if (!in_range(p2 + p3)) throw Error(ErrorKind::InvalidArgument, "need 0 < p2 + p3 <= 1");
  if (!in_range(q1 + q3)) throw Error(ErrorKind::InvalidArgument, "need 0 < q1 + q3 <= 1");
  if (!in_range(r1 + r2)) throw Error(ErrorKind::InvalidArgument, "need 0 < r1 + r2 <= 1");

  ThreeStateClosedForm f;
  f.p2 = p2, f.p3 = p3, f.q1 = q1, f.q3 = q3, f.r1 = r1, f.r2 = r2;
  f.delta1 = q3 * r1 + q1 * r2 + q1 * r1;
  f.delta2 = r1 * p2 + r2 * p3 + r2 * p2;
  f.delta3 = p2 * q3 + p3 * q1 + p3 * q3;
  if (!(f.delta1 > 0.0 && f.delta2 > 0.0 && f.delta3 > 0.0)) {
    throw Error(ErrorKind::NotIrreducible,
                "subdeterminants (" + std::to_string(f.delta1) + ", " + std::to_string(f.delta2) +
                    ", " + std::to_string(f.delta3) + ") must all be positive");
  }
  f.delta = f.delta1 + f.delta2 + f.delta3;
  f.tau12 = p3 + r1 + r2;
  f.tau13 = p2 + q1 + q3;
  f.tau21 = q3 + r1 + r2;
  f.tau23 = q1 + p2 + p3;
  f.tau31 = r2 + q1 + q3;
  f.tau32 = r1 + p2 + p3;
  f.tau = p2 + p3 + q1 + q3 + r1 + r2;

  const double p1 = std::max(0.0, 1.0 - p2 - p3);
  const double q2 = std::max(0.0, 1.0 - q1 - q3);
  const double r3 = std::max(0.0, 1.0 - r1 - r2);
  f.p = Matrix::from_rows({{p1, p2, p3}, {q1, q2, q3}, {r1, r2, r3}});
  f.c = {p1 + q1 + r1, p2 + q2 + r2, p3 + q3 + r3};
  const double D = f.delta;
  f.pi = {f.delta1 / D, f.delta2 / D, f.delta3 / D};

  f.projector = Matrix(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) f.projector(i, j) = f.pi[j];
  const double inv = 1.0 / D;
  f.a1 = inv * Matrix::from_rows({{0.0, 0.0, 0.0},
                                  {-f.tau21, f.tau12, f.tau21 - f.tau12},
                                  {-f.tau31, f.tau31 - f.tau13, f.tau13}});
  f.a2 = inv * Matrix::from_rows({{f.tau21, -f.tau12, f.tau12 - f.tau21},
                                  {0.0, 0.0, 0.0},
                                  {f.tau32 - f.tau23, -f.tau32, f.tau23}});
  f.a3 = inv * Matrix::from_rows({{f.tau31, f.tau13 - f.tau31, -f.tau13},
                                  {f.tau23 - f.tau32, f.tau32, -f.tau23},
                                  {0.0, 0.0, 0.0}});

  auto component_sum = [&](const Vector& u) {
    return u[0] * f.a1 + u[1] * f.a2 + u[2] * f.a3;
  };
  auto g_inverse = [&](const Vector& u) {
    const double total = u[0] + u[1] + u[2];
    return (1.0 / total) * (f.projector + component_sum(u));
  };
  f.h = g_inverse(f.c);
  f.z = g_inverse(f.pi);
  f.annihilation_residual_c = max_abs(left_multiply(f.c, component_sum(f.c)));
  f.annihilation_residual_pi = max_abs(left_multiply(f.pi, component_sum(f.pi)));

  f.mfpt = Matrix::from_rows({{D / f.delta1, f.tau12 / f.delta2, f.tau13 / f.delta3},
                              {f.tau21 / f.delta1, D / f.delta2, f.tau23 / f.delta3},
                              {f.tau31 / f.delta1, f.tau32 / f.delta2, D / f.delta3}});
  f.kemeny = 1.0 + f.tau / D;
  return f;
}

}  // namespace mcsum::oracle
