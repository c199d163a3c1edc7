#include <gtest/gtest.h>

#include <cmath>

#include "bdsc/prob.hpp"
#include "bdsc/source.hpp"
#include "oracles.hpp"

namespace bdsc {
namespace {

double h2(double x) { return -x * std::log2(x) - (1 - x) * std::log2(1 - x); }

JointPMF correlated_triple() {
  return JointPMF({2, 2, 2}, {0.30, 0.05, 0.04, 0.11, 0.07, 0.13, 0.02, 0.28});
}

TEST(Marginal, ProductLawGivesFactor) {
  const JointPMF p({2, 2}, {0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4});
  const auto m = marginal_table(p, SubsetView::from_indices({0}));
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[0], 0.3, 1e-12);
  EXPECT_NEAR(m[1], 0.7, 1e-12);
}

TEST(Marginal, FullSetIsIdentity) {
  const auto p = correlated_triple();
  const auto m = marginal_table(p, SubsetView::full(3));
  for (std::size_t x = 0; x < p.size(); ++x) EXPECT_DOUBLE_EQ(m[x], p[x]);
}

TEST(Marginal, MatchesDirectSummation) {
  const auto p = correlated_triple();
  const std::vector<double> raw(p.mass().begin(), p.mass().end());
  const auto want = oracle::marginal(raw, {2, 2, 2}, {0, 2});
  const auto got = marginal_table(p, SubsetView::from_indices({0, 2}));
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-15);
}

TEST(Entropy, KnownValues) {
  EXPECT_NEAR(entropy(JointPMF::uniform({2}), SubsetView::from_indices({0})), 1.0, 1e-12);
  EXPECT_NEAR(entropy(JointPMF::point_mass({2, 3}, 4)), 0.0, 1e-12);
  EXPECT_NEAR(entropy(JointPMF({3}, {0.5, 0.25, 0.25})), 1.5, 1e-12);
}

TEST(Entropy, ConditionalKnownValues) {
  const JointPMF indep({2, 2}, {0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4});
  EXPECT_NEAR(conditional_entropy(indep, SubsetView::from_indices({1}), SubsetView::from_indices({0})), h2(0.4),
              1e-12);
  const JointPMF copy({2, 2}, {0.4, 0.0, 0.0, 0.6});
  EXPECT_NEAR(conditional_entropy(copy, SubsetView::from_indices({1}), SubsetView::from_indices({0})), 0.0, 1e-12);
  const double f = 0.11;
  const JointPMF dsbs({2, 2}, {0.5 * (1 - f), 0.5 * f, 0.5 * f, 0.5 * (1 - f)});
  EXPECT_NEAR(conditional_entropy(dsbs, SubsetView::from_indices({1}), SubsetView::from_indices({0})), h2(f), 1e-12);
  EXPECT_NEAR(h2(f), 0.5, 0.001);
}

TEST(Entropy, MutualInformationMatchesOracle) {
  const auto p = correlated_triple();
  const std::vector<double> raw(p.mass().begin(), p.mass().end());
  const auto a = SubsetView::from_indices({0});
  const auto b = SubsetView::from_indices({1});
  const auto c = SubsetView::from_indices({2});
  EXPECT_NEAR(conditional_mutual_information(p, a, b, c), oracle::cmi(raw, {2, 2, 2}, {0}, {1}, {2}), 1e-12);
  EXPECT_NEAR(conditional_mutual_information(p, a, c, SubsetView{}), oracle::cmi(raw, {2, 2, 2}, {0}, {2}, {}),
              1e-12);

  const JointPMF indep = JointPMF::uniform({2, 2, 2});
  EXPECT_NEAR(conditional_mutual_information(indep, a, b, c), 0.0, 1e-12);
  const JointPMF copy({2, 2}, {0.25, 0.0, 0.0, 0.75});
  EXPECT_NEAR(conditional_mutual_information(copy, a, b, SubsetView{}), entropy(copy, a), 1e-12);
}

TEST(Types, DirectCount) {
  const std::vector<Sequence> rows = {{0, 0, 1, 1}, {0, 1, 0, 1}};
  const std::vector<int> sizes = {2, 2};
  const auto t = type_of(std::span<const Sequence>(rows), sizes);
  EXPECT_EQ(t.n(), 4);
  for (auto c : t.counts()) EXPECT_EQ(c, 1);
}

TEST(Types, ConstantSequencesArePointMass) {
  const std::vector<Sequence> rows = {{1, 1, 1}, {0, 0, 0}};
  const std::vector<int> sizes = {2, 2};
  const auto t = type_of(std::span<const Sequence>(rows), sizes);
  EXPECT_EQ(t.counts()[2], 3);
  EXPECT_EQ(t.counts()[0] + t.counts()[1] + t.counts()[3], 0);
}

TEST(Types, MatchesIndependentRecount) {
  const auto p = correlated_triple();
  const auto block = sample_block(p, 500, 77);
  const auto t = type_of(std::span<const Sequence>(block.rows), block.alphabet_sizes);
  std::vector<std::int64_t> recount(8, 0);
  for (int i = 0; i < block.n; ++i) ++recount[block.rows[0][i] * 4 + block.rows[1][i] * 2 + block.rows[2][i]];
  for (std::size_t x = 0; x < 8; ++x) EXPECT_EQ(t.counts()[x], recount[x]);
  const auto q = t.normalized();
  double sum = 0.0;
  for (double v : q.mass()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(EtaBall, ExactTypeAtZero) {
  const JointPMF q({2, 2}, {0.25, 0.25, 0.25, 0.25});
  const EmpiricalType t({2, 2}, {2, 2, 2, 2}, 8);
  EXPECT_TRUE(eta_ball_contains(q, t, 0.0));
}

TEST(EtaBall, VacuousRadius) {
  const JointPMF q({2, 2}, {0.7, 0.1, 0.1, 0.1});
  const EmpiricalType t({2, 2}, {0, 0, 0, 8}, 8);
  EXPECT_TRUE(eta_ball_contains(q, t, 4.0));
}

TEST(EtaBall, ConstructedViolation) {
  const double eta = 0.2;
  // Move 2 eta / |X| of mass from cell 0 to cell 3: both cells break the eta / |X| bound.
  const EmpiricalType t({2, 2}, {25, 25, 25, 25}, 100);
  const double shift = 2 * eta / 4;
  const JointPMF q({2, 2}, {0.25 - shift, 0.25, 0.25, 0.25 + shift});
  EXPECT_FALSE(eta_ball_contains(q, t, eta));
  EXPECT_TRUE(eta_ball_contains(q, t, 2 * eta + 1e-9));
}

TEST(StronglyTypical, Extremes) {
  const JointPMF u = JointPMF::uniform({2});
  const std::vector<Sequence> heads = {Sequence(20, 1)};
  EXPECT_FALSE(strongly_typical(std::span<const Sequence>(heads), u, 0.1));
  const std::vector<Sequence> half = {{0, 1, 0, 1, 1, 0}};
  EXPECT_TRUE(strongly_typical(std::span<const Sequence>(half), u, 0.0));
}

TEST(StronglyTypical, IidSamplesAtLargeN) {
  const auto p = correlated_triple();
  int typical = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto block = sample_block(p, 10000, derive_seed(5, "typical", trial));
    // Per-cell tolerance 0.15 / 8 is about 3.7 standard deviations at this n.
    typical += strongly_typical(std::span<const Sequence>(block.rows), p, 0.15);
  }
  EXPECT_GE(typical, 99);
}

TEST(InfoChannel, DeterministicCopyOfHonestSet) {
  const auto p = correlated_triple();
  const auto h = SubsetView::from_indices({0, 1});
  // W = (X0, X1).
  std::vector<double> rows(8 * 4, 0.0);
  for (std::size_t x = 0; x < 8; ++x) rows[x * 4 + (x >> 1)] = 1.0;
  const ConditionalPMF r({2, 2, 2}, 4, rows);
  const auto rt = marginalize_info_channel(r, p, h);
  for (std::size_t xh = 0; xh < 4; ++xh)
    for (int w = 0; w < 4; ++w) EXPECT_NEAR(rt(xh, w), static_cast<std::size_t>(w) == xh ? 1.0 : 0.0, 1e-12);
}

TEST(InfoChannel, IndependentChannelUnchanged) {
  const auto p = correlated_triple();
  const auto r = ConditionalPMF::constant({2, 2, 2}, {0.2, 0.5, 0.3});
  const auto rt = marginalize_info_channel(r, p, SubsetView::from_indices({1}));
  for (std::size_t xh = 0; xh < 2; ++xh) {
    EXPECT_NEAR(rt(xh, 0), 0.2, 1e-12);
    EXPECT_NEAR(rt(xh, 1), 0.5, 1e-12);
    EXPECT_NEAR(rt(xh, 2), 0.3, 1e-12);
  }
}

TEST(InfoChannel, PerfectInformationEmbedsConditional) {
  const JointPMF p({2, 2}, {0.35, 0.15, 0.1, 0.4});
  const auto r = ConditionalPMF::identity({2, 2});
  const auto rt = marginalize_info_channel(r, p, SubsetView::from_indices({0}));
  const std::vector<double> raw(p.mass().begin(), p.mass().end());
  const auto p0 = oracle::marginal(raw, {2, 2}, {0});
  for (int x0 = 0; x0 < 2; ++x0)
    for (int w = 0; w < 4; ++w) {
      const double want = (w >> 1) == x0 ? raw[w] / p0[x0] : 0.0;
      EXPECT_NEAR(rt(x0, w), want, 1e-12);
    }
}

TEST(Conditioning, ZeroProbabilityRowsAreUniformAndFlagged) {
  const JointPMF p({2, 2}, {0.5, 0.5, 0.0, 0.0});
  const auto r = ConditionalPMF::identity({2, 2});
  const auto rt = marginalize_info_channel(r, p, SubsetView::from_indices({0}));
  ASSERT_EQ(rt.degenerate_rows().size(), 1u);
  EXPECT_EQ(rt.degenerate_rows()[0], 1u);
  double sum = 0.0;
  for (int w = 0; w < 4; ++w) sum += rt(1, w);
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Preconditions, RejectsBadTables) {
  EXPECT_THROW(JointPMF({2}, {0.6, 0.6}), precondition_error);
  EXPECT_THROW(JointPMF({2}, {-0.1, 1.1}), precondition_error);
  EXPECT_THROW(JointPMF({2, 2}, {0.5, 0.5}), precondition_error);
}

}  // namespace
}  // namespace bdsc
