#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <span>

#include "fixtures.hpp"

using mcsum::ErrorKind;
using mcsum::Matrix;
using mcsum::Vector;
namespace oracle = mcsum::oracle;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const mcsum::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(StationaryDirect, Examples) {
  EXPECT_LT(mcsum::max_abs_diff(oracle::stationary_direct(fixtures::cycle3()).pi, Vector(3, 1.0 / 3)),
            1e-15);
  const auto e5 = fixtures::expected("fix5_expected.json")["stationary"].get<Vector>();
  EXPECT_LT(mcsum::max_abs_diff(oracle::stationary_direct(fixtures::fix5()).pi, e5), 5e-4);
  EXPECT_LT(mcsum::max_abs_diff(oracle::stationary_direct(fixtures::two_state(1, 1)).pi,
                                Vector{0.5, 0.5}),
            1e-15);
}

TEST(StationaryPower, Examples) {
  EXPECT_LT(mcsum::max_abs_diff(oracle::stationary_power(fixtures::two_state(1, 1)).pi,
                                Vector{0.5, 0.5}),
            1e-12);
  const auto f8 = fixtures::fix8();
  EXPECT_LT(mcsum::max_abs_diff(oracle::stationary_power(f8, 1e-12).pi,
                                oracle::stationary_direct(f8).pi),
            1e-10);
  EXPECT_LT(mcsum::max_abs_diff(oracle::stationary_power(fixtures::uniform(3), 1e-12, 1).pi,
                                Vector(3, 1.0 / 3)),
            1e-15);
}

TEST(StationaryPower, ReportsNoConvergence) {
  EXPECT_EQ(kind_of([] { oracle::stationary_power(fixtures::fix8(), 1e-15, 3); }),
            ErrorKind::NoConvergence);
}

TEST(StationaryPower, AgreesWithDirectOnRandomChains) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto chain = mcsum::random_chain(2 + s % 9, s);
    EXPECT_LT(mcsum::max_abs_diff(oracle::stationary_power(chain).pi, oracle::stationary_direct(chain).pi),
              1e-9);
  }
}

TEST(MfptDirect, Examples) {
  const auto c3 = fixtures::cycle3();
  EXPECT_LT(mcsum::max_abs_diff(oracle::mfpt_direct(c3, oracle::stationary_direct(c3)).mfpt,
                                Matrix::from_rows({{3, 1, 2}, {2, 3, 1}, {1, 2, 3}})),
            1e-12);
  const auto t = fixtures::two_state(0.3, 0.1);
  EXPECT_LT(mcsum::max_abs_diff(oracle::mfpt_direct(t, oracle::stationary_direct(t)).mfpt,
                                Matrix::from_rows({{4, 10.0 / 3}, {10, 4.0 / 3}})),
            1e-12);
  const auto f5 = fixtures::fix5();
  const Matrix printed = fixtures::matrix_of(fixtures::expected("fix5_expected.json")["mfpt"]);
  const auto m5 = oracle::mfpt_direct(f5, oracle::stationary_direct(f5));
  EXPECT_LT(mcsum::max_abs_diff(m5.mfpt, printed), 5e-4);
  const Matrix lhs = (Matrix::identity(5) - f5.p()) * m5.mfpt;
  const Matrix rhs = Matrix(5, 5, 1.0) - f5.p() * mcsum::diagonal_part(m5.mfpt);
  EXPECT_LT(mcsum::max_abs_diff(lhs, rhs), 1e-8);
}

TEST(Period, Examples) {
  EXPECT_EQ(oracle::period(fixtures::cycle3()), 3u);
  EXPECT_EQ(oracle::period(fixtures::two_state(1, 1)), 2u);
  EXPECT_EQ(oracle::period(fixtures::fix5()), 1u);
}

TEST(MonteCarlo, CycleIsDeterministic) {
  const auto est = oracle::mc_estimate(fixtures::cycle3(), 5, 1000);
  EXPECT_EQ(est.mfpt(0, 1), 1.0);
  EXPECT_EQ(est.mfpt(0, 0), 3.0);
  EXPECT_EQ(est.standard_error(0, 1), 0.0);
  EXPECT_FALSE(est.stationary_reliable);
  EXPECT_EQ(est.period, 3u);
}

TEST(MonteCarlo, TwoStateWithinFiveStandardErrors) {
  const auto est = oracle::mc_estimate(fixtures::two_state(0.3, 0.1), 42, 100000);
  EXPECT_LT(std::abs(est.mfpt(1, 0) - 10.0), 5.0 * est.standard_error(1, 0));
  EXPECT_TRUE(est.stationary_reliable);
}

TEST(MonteCarlo, Fix5KemenyWithinTwoPercent) {
  const auto f5 = fixtures::fix5();
  const auto est = oracle::mc_estimate(f5, 7, 10000);
  const auto pi = oracle::stationary_direct(f5);
  double k = 0.0;
  for (std::size_t j = 0; j < 5; ++j) k += pi[j] * est.mfpt(0, j);
  EXPECT_NEAR(k, 16.042, 0.02 * 16.042);
  const auto exact = oracle::mfpt_direct(f5, pi);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      EXPECT_LT(std::abs(est.mfpt(i, j) - exact(i, j)), 5.0 * est.standard_error(i, j));
}

TEST(MonteCarlo, Reproducible) {
  const auto a = oracle::mc_estimate(fixtures::fix5(), 99, 50);
  const auto b = oracle::mc_estimate(fixtures::fix5(), 99, 50);
  EXPECT_EQ(a.mfpt, b.mfpt);
  EXPECT_EQ(a.standard_error, b.standard_error);
  EXPECT_NE(a.mfpt, oracle::mc_estimate(fixtures::fix5(), 100, 50).mfpt);
  EXPECT_THROW(oracle::mc_estimate(fixtures::fix5(), 1, 0), mcsum::Error);
}

TEST(TwoStateClosedForm, Examples) {
  const auto f = oracle::two_state_closed_form(0.3, 0.1);
  EXPECT_LT(mcsum::max_abs_diff(f.pi, Vector{0.25, 0.75}), 1e-15);
  EXPECT_NEAR(f.kemeny, 3.5, 1e-15);
  EXPECT_LT(mcsum::max_abs_diff(f.mfpt, Matrix::from_rows({{4, 10.0 / 3}, {10, 4.0 / 3}})), 1e-14);

  const auto g = oracle::two_state_closed_form(1, 1);
  EXPECT_DOUBLE_EQ(g.kemeny, 1.5);
  EXPECT_DOUBLE_EQ(g.d, -1.0);

  const auto h = oracle::two_state_closed_form(0.5, 0.5);
  EXPECT_LT(mcsum::max_abs_diff(h.h, Matrix::from_rows({{0.75, -0.25}, {-0.25, 0.75}})), 1e-15);
  EXPECT_LT(mcsum::max_abs_diff(h.z, Matrix::identity(2)), 1e-15);
}

TEST(TwoStateClosedForm, Errors) {
  EXPECT_EQ(kind_of([] { oracle::two_state_closed_form(0, 0); }), ErrorKind::Degenerate);
  EXPECT_EQ(kind_of([] { oracle::two_state_closed_form(1.5, 0.2); }), ErrorKind::Degenerate);
  EXPECT_EQ(kind_of([] { oracle::two_state_closed_form(0, 0.4); }), ErrorKind::NotIrreducible);
}

TEST(TwoStateClosedForm, SignEquivalencesOnGrid) {
  for (int ia = 1; ia <= 20; ++ia) {
    for (int ib = 1; ib <= 20; ++ib) {
      const double a = ia / 20.0, b = ib / 20.0;
      const auto f = oracle::two_state_closed_form(a, b);
      const int s_ba = mcsum::tolerant_sign(b, a);
      EXPECT_EQ(mcsum::tolerant_sign(f.c[0], f.c[1]), s_ba);
      EXPECT_EQ(mcsum::tolerant_sign(f.pi[0], f.pi[1]), s_ba);
      EXPECT_EQ(mcsum::tolerant_sign(f.mfpt(1, 1), f.mfpt(0, 0)), s_ba);
      EXPECT_EQ(mcsum::tolerant_sign(f.h(0, 0), f.h(1, 1)), -s_ba);
      const double col1 = f.mfpt(0, 0) + f.mfpt(1, 0), col2 = f.mfpt(0, 1) + f.mfpt(1, 1);
      EXPECT_EQ(mcsum::tolerant_sign(col1, col2), -s_ba);
    }
  }
}

TEST(ThreeStateClosedForm, Cycle) {
  const auto f = oracle::three_state_closed_form(1, 0, 0, 1, 1, 0);
  EXPECT_DOUBLE_EQ(f.delta1, 1.0);
  EXPECT_DOUBLE_EQ(f.delta2, 1.0);
  EXPECT_DOUBLE_EQ(f.delta3, 1.0);
  EXPECT_LT(mcsum::max_abs_diff(f.pi, Vector(3, 1.0 / 3)), 1e-15);
  EXPECT_NEAR(f.kemeny, 2.0, 1e-15);
  EXPECT_LT(mcsum::max_abs_diff(f.mfpt, Matrix::from_rows({{3, 1, 2}, {2, 3, 1}, {1, 2, 3}})), 1e-14);
  EXPECT_DOUBLE_EQ(f.tau, f.tau12 + f.tau13);
  EXPECT_DOUBLE_EQ(f.tau, f.tau21 + f.tau23);
  EXPECT_DOUBLE_EQ(f.tau, f.tau31 + f.tau32);
}

TEST(ThreeStateClosedForm, Errors) {
  EXPECT_EQ(kind_of([] { oracle::three_state_closed_form(0.5, 0.5, 0, 0.5, 0, 0.5); }),
            ErrorKind::NotIrreducible);
  EXPECT_EQ(kind_of([] { oracle::three_state_closed_form(0, 0, 0.5, 0.5, 0.5, 0.5); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { oracle::three_state_closed_form(0.7, 0.7, 0.5, 0.5, 0.5, 0.5); }),
            ErrorKind::InvalidArgument);
}

TEST(ThreeStateClosedForm, GenericPointMatchesPipeline) {
  const auto f = oracle::three_state_closed_form(0.2, 0.3, 0.4, 0.1, 0.25, 0.35);
  const auto chain = mcsum::validate(f.p);
  const auto h = mcsum::compute_h(chain);
  const auto pi = mcsum::stationary_from_h(h.c, h);
  const auto z = mcsum::compute_z(chain, oracle::stationary_direct(chain));
  EXPECT_LT(mcsum::max_abs_diff(f.c, h.c.c), 1e-15);
  EXPECT_LT(mcsum::max_abs_diff(f.pi, pi.pi), 1e-10);
  EXPECT_LT(mcsum::max_abs_diff(f.h, h.h), 1e-10);
  EXPECT_LT(mcsum::max_abs_diff(f.z, z.z), 1e-10);
  EXPECT_LT(mcsum::max_abs_diff(f.mfpt, mcsum::mfpt_from_h(h, pi).mfpt), 1e-10);
  EXPECT_NEAR(f.kemeny, mcsum::kemeny_from_z(z), 1e-10);
  EXPECT_LT(f.annihilation_residual_c, 1e-12);
  EXPECT_LT(f.annihilation_residual_pi, 1e-12);
}

namespace {

double scaled_diff(std::span<const double> a, std::span<const double> ref) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst, std::abs(a[k] - ref[k]) / std::max(1.0, std::abs(ref[k])));
  return worst;
}

void expect_pipeline_matches(const Matrix& p, const Vector& pi, const Matrix& h, const Matrix& z,
                             const Matrix& mfpt, double kemeny) {
  const auto chain = mcsum::validate(p);
  const auto hh = mcsum::compute_h(chain);
  const auto pp = mcsum::stationary_from_h(hh.c, hh);
  const auto zz = mcsum::compute_z(chain, oracle::stationary_direct(chain));
  EXPECT_LT(scaled_diff(pp.pi, pi), 1e-10);
  EXPECT_LT(scaled_diff(hh.h.data(), h.data()), 1e-10);
  EXPECT_LT(scaled_diff(zz.z.data(), z.data()), 1e-10);
  EXPECT_LT(scaled_diff(mcsum::mfpt_from_h(hh, pp).mfpt.data(), mfpt.data()), 1e-10);
  EXPECT_LT(std::abs(mcsum::kemeny_from_z(zz) - kemeny) / std::max(1.0, kemeny), 1e-10);
}

}  // namespace

TEST(ClosedFormProperty, RandomTwoStateMatchesPipeline) {
  mcsum::SplitMix64 rng(404);
  for (int t = 0; t < 500; ++t) {
    const double a = 1.0 - rng.uniform(), b = 1.0 - rng.uniform();
    const auto f = oracle::two_state_closed_form(a, b);
    expect_pipeline_matches(f.p, f.pi, f.h, f.z, f.mfpt, f.kemeny);
  }
}

TEST(ClosedFormProperty, RandomThreeStateMatchesPipeline) {
  mcsum::SplitMix64 rng(405);
  int accepted = 0;
  while (accepted < 500) {
    const auto chain = mcsum::random_chain(3, rng.next(), accepted % 4 == 3 ? 0.3 : 0.0);
    const Matrix& p = chain.p();
    oracle::ThreeStateClosedForm f;
    try {
      f = oracle::three_state_closed_form(p(0, 1), p(0, 2), p(1, 0), p(1, 2), p(2, 0), p(2, 1));
    } catch (const mcsum::Error&) {
      continue;
    }
    ++accepted;
    EXPECT_LT(mcsum::max_abs_diff(f.p, p), 1e-15);
    expect_pipeline_matches(f.p, f.pi, f.h, f.z, f.mfpt, f.kemeny);
  }
}

// The oracle header must not depend on the g-inverse pipeline.
TEST(OracleIndependence, HeaderDoesNotIncludeGinv) {
  const std::string text = mcsum::io::read_text(std::string(MCSUM_DATA_DIR) + "/../include/mcsum/oracle.hpp");
  EXPECT_EQ(text.find("ginv.hpp"), std::string::npos);
  EXPECT_EQ(text.find("analysis.hpp"), std::string::npos);
  EXPECT_EQ(text.find("compute_h"), std::string::npos);
}
