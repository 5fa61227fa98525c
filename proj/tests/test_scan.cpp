#include <gtest/gtest.h>

#include "fixtures.hpp"

using mcsum::Matrix;
namespace relation = mcsum::relation;

TEST(RandomChain, TwoStatePositiveOffDiagonals) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto chain = mcsum::random_chain(2, s);
    EXPECT_GT(chain(0, 1), 0.0);
    EXPECT_GT(chain(1, 0), 0.0);
  }
}

TEST(RandomChain, Deterministic) {
  EXPECT_EQ(mcsum::random_chain(5, 42), mcsum::random_chain(5, 42));
  EXPECT_NE(mcsum::random_chain(5, 42), mcsum::random_chain(5, 43));
  EXPECT_EQ(mcsum::chain_digest(mcsum::random_chain(5, 42)),
            mcsum::chain_digest(mcsum::random_chain(5, 42)));
}

TEST(RandomChain, SparseOutputsValidate) {
  std::size_t zeros = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto chain = mcsum::random_chain(8, s, 0.5);
    EXPECT_NO_THROW(mcsum::validate(chain.p()));
    for (double v : chain.p().data()) zeros += v == 0.0;
  }
  const double fraction = static_cast<double>(zeros) / (1000.0 * 64.0);
  EXPECT_GT(fraction, 0.3);
  EXPECT_LT(fraction, 0.6);
}

TEST(RandomChain, RejectsBadArguments) {
  EXPECT_THROW(mcsum::random_chain(1, 0), mcsum::Error);
  EXPECT_THROW(mcsum::random_chain(4, 0, 0.9), mcsum::Error);
}

TEST(RandomDoublyStochastic, ColumnSumsAreOne) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto chain = mcsum::random_doubly_stochastic(3 + s % 6, s);
    for (double c : mcsum::column_sums(chain).c) EXPECT_NEAR(c, 1.0, 1e-12);
  }
}

TEST(TolerantSign, Ties) {
  EXPECT_EQ(mcsum::tolerant_sign(1.0, 1.0 + 1e-13), 0);
  EXPECT_EQ(mcsum::tolerant_sign(1.0, 1.1), -1);
  EXPECT_EQ(mcsum::tolerant_sign(2.0, 1.0), 1);
}

TEST(OrderingReport, TwoStateChainsHaveNoTheoremViolations) {
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto rec = mcsum::ordering_report(mcsum::random_chain(2, s));
    EXPECT_FALSE(rec.violates(relation::kTwoStateEquivalences));
    EXPECT_FALSE(rec.violates(relation::kPiVsRecurrence));
    EXPECT_FALSE(rec.violates(relation::kColsumImpliesPi));
  }
}

TEST(OrderingReport, Fix8FlagsFirstPair) {
  const auto rec = mcsum::ordering_report(fixtures::fix8());
  EXPECT_TRUE(rec.violates(relation::kColsumImpliesPi, 0, 1));
  EXPECT_FALSE(rec.violates(relation::kPiVsRecurrence));
  EXPECT_EQ(rec.m, 8u);
  EXPECT_EQ(rec.pairs.size(), 28u);
}

TEST(OrderingReport, Fix5HasNoViolations) {
  const auto rec = mcsum::ordering_report(fixtures::fix5());
  EXPECT_TRUE(rec.violations.empty());
  for (const auto& p : rec.pairs) {
    EXPECT_EQ(p.c, 1);
    EXPECT_EQ(p.pi, 1);
    EXPECT_EQ(p.mfpt_col, -1);
  }
}

TEST(OrderingReport, RecomputationReproducesRecord) {
  const auto chain = mcsum::random_chain(6, 11);
  const auto a = mcsum::ordering_report(chain);
  const auto b = mcsum::ordering_report(mcsum::validate(chain.p()));
  EXPECT_EQ(a.digest, b.digest);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  for (std::size_t k = 0; k < a.pairs.size(); ++k) {
    EXPECT_EQ(a.pairs[k].c, b.pairs[k].c);
    EXPECT_EQ(a.pairs[k].pi, b.pairs[k].pi);
    EXPECT_EQ(a.pairs[k].mfpt_row, b.pairs[k].mfpt_row);
    EXPECT_EQ(a.pairs[k].mfpt_col, b.pairs[k].mfpt_col);
    for (int s : {a.pairs[k].c, a.pairs[k].pi, a.pairs[k].h_diag, a.pairs[k].z_diag}) {
      EXPECT_GE(s, -1);
      EXPECT_LE(s, 1);
    }
  }
  EXPECT_EQ(a.violations.size(), b.violations.size());
}

TEST(Scan, TwoStatesHaveZeroTheoremViolations) {
  mcsum::ScanConfig cfg;
  cfg.state_counts = {2};
  cfg.trials = 2000;
  const auto r = mcsum::scan(cfg);
  EXPECT_EQ(r.theorem_violations(), 0u);
  EXPECT_TRUE(r.identity_failures.empty());
  EXPECT_FALSE(r.hard_failure());
  EXPECT_LT(r.max_identity_residual, 1e-8);
}

TEST(Scan, ThreeStatesFindColsumPiCounterexamples) {
  mcsum::ScanConfig cfg;
  cfg.state_counts = {3};
  cfg.trials = 2000;
  const auto r = mcsum::scan(cfg);
  std::size_t found = 0;
  for (const auto& t : r.tallies)
    if (t.relation == relation::kColsumImpliesPi) found = t.violations;
  EXPECT_GT(found, 0u);
  EXPECT_FALSE(r.hard_failure());
  for (const auto& cx : r.counterexamples) {
    EXPECT_EQ(cx.record.digest, mcsum::chain_digest(cx.chain));
    EXPECT_EQ(cx.seed, mcsum::derive_seed(cfg.seed, {cx.m, cx.trial}));
  }
}

TEST(Scan, ThreadCountDoesNotChangeOutput) {
  mcsum::ScanConfig cfg;
  cfg.state_counts = {3, 5};
  cfg.trials = 300;
  cfg.sparsity = 0.3;
  const auto serial = mcsum::scan(cfg);
  cfg.threads = 4;
  const auto parallel = mcsum::scan(cfg);
  EXPECT_EQ(mcsum::io::counterexample_log(serial), mcsum::io::counterexample_log(parallel));
  EXPECT_EQ(mcsum::io::scan_summary(serial), mcsum::io::scan_summary(parallel));
  ASSERT_FALSE(serial.counterexamples.empty());
  EXPECT_EQ(mcsum::io::counterexample_log(serial), mcsum::io::counterexample_log(mcsum::scan(cfg)));
}

TEST(Scan, RelationSubsetAndValidation) {
  mcsum::ScanConfig cfg;
  cfg.state_counts = {4};
  cfg.trials = 50;
  cfg.relations = {std::string(relation::kColsumImpliesPi)};
  const auto r = mcsum::scan(cfg);
  ASSERT_EQ(r.tallies.size(), 1u);
  EXPECT_FALSE(r.tallies[0].theorem_backed);
  EXPECT_EQ(r.tallies[0].trials, 50u);

  cfg.relations = {"nonsense"};
  EXPECT_THROW(mcsum::scan(cfg), mcsum::Error);
  cfg.relations.clear();
  cfg.trials = 0;
  EXPECT_THROW(mcsum::scan(cfg), mcsum::Error);
  cfg.trials = 1;
  cfg.state_counts = {1};
  EXPECT_THROW(mcsum::scan(cfg), mcsum::Error);
}
