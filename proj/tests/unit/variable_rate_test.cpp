#include <gtest/gtest.h>

#include <cmath>

#include "bdsc/variable_rate.hpp"

namespace bdsc {
namespace {

SubsetView S(std::initializer_list<int> idx) { return SubsetView::from_indices(idx); }

JointPMF common_cause(double f) {
  std::vector<double> mass(8, 0.0);
  for (int x = 0; x < 8; ++x)
    for (int z = 0; z < 2; ++z) {
      double v = 0.5;
      for (int k = 0; k < 3; ++k) v *= ((x >> (2 - k)) & 1) == z ? 1 - f : f;
      mass[x] += v;
    }
  return JointPMF({2, 2, 2}, mass);
}

SessionSetup honest_setup(JointPMF p, HonestCollection h, SubsetView h_true) {
  SessionSetup s;
  s.info = InfoModel::perfect(h, p.alphabet_sizes());
  s.r = ConditionalPMF::identity(p.alphabet_sizes());
  s.p = std::move(p);
  s.h = std::move(h);
  s.h_true = h_true;
  return s;
}

bool contains(const std::vector<SubsetView>& v, SubsetView s) { return std::find(v.begin(), v.end(), s) != v.end(); }

TEST(Params, ResolvedDefaults) {
  const auto p = common_cause(0.1);
  const auto h = HonestCollection::threshold_family(3, 1);
  ProtocolParams params;
  bool capped = false;
  const auto r = params.resolved(p, h, &capped);
  EXPECT_NEAR(*r.nu, 5.5 * 0.35, 1e-12);
  EXPECT_GE(*r.eta, 2 * 0.35);
  EXPECT_GE(*r.subcodebooks, 8);
  EXPECT_LE(*r.subcodebooks, 1024);
  EXPECT_TRUE(capped);
  EXPECT_NO_THROW(r.validate());
  auto bad = r;
  bad.nu = 0.3;
  EXPECT_THROW(bad.validate(), precondition_error);
  EXPECT_THROW(params.validate(), precondition_error);
}

TEST(RunSession, HonestPairDecodesWithinBudget) {
  const JointPMF p({2, 2}, {0.47, 0.03, 0.03, 0.47});
  const auto h = HonestCollection::threshold_family(2, 0);
  const auto setup = honest_setup(p, h, S({0, 1}));
  ProtocolParams params;
  params.rounds = 10;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    params.seed = seed;
    const auto rep = run_session(setup, params);
    EXPECT_EQ(rep.honest_errors, 0);
    const double bound = entropy(p, S({0})) + conditional_entropy(p, S({1}), S({0})) +
                         2 * (2 * params.eps + *rep.params.nu);
    EXPECT_LE(rep.sum_rate, bound);
  }
}

TEST(RunSession, PointMassNeedsOneTransactionPerPhase) {
  const auto p = JointPMF::point_mass({2, 2, 2}, 5);
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto setup = honest_setup(p, h, S({0, 1, 2}));
  ProtocolParams params;
  params.rounds = 3;
  params.seed = 2;
  const auto rep = run_session(setup, params);
  EXPECT_EQ(rep.honest_errors, 0);
  for (const auto& round : rep.rounds)
    for (int t : round.transactions) EXPECT_EQ(t, 1);
}

TEST(RunRound, SensorsOutsideUnionAreSkipped) {
  const auto p = common_cause(0.1);
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto setup = honest_setup(p, h, S({0, 1}));
  ProtocolParams params;
  params.seed = 3;
  params = params.resolved(p, h);
  const auto codebooks = make_codebooks(p.alphabet_sizes(), params);
  auto state = DecoderState::initial(h);
  state.v = {S({0, 1})};
  VariableRateTraitor traitor(Strategy::honest(), codebooks);
  const auto block = sample_block(p, params.n, 1);
  const auto w = sample_side_info(setup.r, block, 2);
  const auto rec = run_round(state, setup, params, codebooks, traitor, block, w);
  EXPECT_EQ(rec.transactions[2], 0);
  EXPECT_FALSE(state.estimates[2].has_value());
  for (const auto& t : state.transcript) EXPECT_NE(t.sensor, 2);
}

TEST(UpdateV, HonestSessionsRarelyShrink) {
  const auto p = common_cause(0.1);
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto setup = honest_setup(p, h, S({0, 1}));
  ProtocolParams params;
  params.rounds = 50;
  int unchanged = 0;
  const int sessions = 20;
  for (int s = 0; s < sessions; ++s) {
    params.seed = derive_seed(4, "session", s);
    const auto rep = run_session(setup, params);
    unchanged += rep.v_trajectory.back().size() == h.size();
  }
  EXPECT_GE(unchanged, static_cast<int>(std::ceil((1 - params.alpha) * sessions)));
}

TEST(UpdateV, ChainAttackEliminatesTheOuterPair) {
  // Traitor 2 reports a block drawn from p(x2 | x1), so the pair {0, 2} looks less correlated
  // than it should while {1, 2} looks right. The gap in the {0, 2} marginal is a few hundredths
  // per cell, far below the type fluctuation at protocol block lengths, so the V test is run on
  // long blocks with a radius a few standard deviations wide.
  const auto p = common_cause(0.05);
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto setup = honest_setup(p, h, S({0, 1}));
  const auto p12 = marginal_table(p, S({1, 2}));
  std::vector<double> rows(16);
  for (int w = 0; w < 8; ++w) {
    const int x1 = (w >> 1) & 1;
    const double tot = p12[x1 * 2] + p12[x1 * 2 + 1];
    rows[w * 2] = p12[x1 * 2] / tot;
    rows[w * 2 + 1] = p12[x1 * 2 + 1] / tot;
  }
  const ConditionalPMF q_bar({8}, 2, rows);
  const int n = 20000;
  const double eta = 0.1;
  int eliminated = 0, honest_kept = 0;
  const int sessions = 30;
  for (int s = 0; s < sessions; ++s) {
    const auto block = sample_block(p, n, derive_seed(5, "block", s));
    const auto w = sample_side_info(setup.r, block, derive_seed(5, "w", s));
    const TraitorContext ctx(S({2}), p, setup.r, w, block, derive_seed(5, "traitor", s), 0);
    const auto fake = fabricate_block(ctx, q_bar, derive_seed(5, "fake", s));
    const std::vector<Sequence> reported = {block.rows[0], block.rows[1], fake[0]};
    const auto type = type_of(std::span<const Sequence>(reported), std::vector<int>{2, 2, 2});
    const auto all = S({0, 1, 2});
    eliminated += !keeps_set(type, all, S({0, 2}), setup, eta);
    honest_kept += keeps_set(type, all, S({0, 1}), setup, eta) && keeps_set(type, all, S({1, 2}), setup, eta);
  }
  EXPECT_GE(eliminated, static_cast<int>(0.9 * sessions));
  EXPECT_GE(honest_kept, static_cast<int>(0.9 * sessions));
}

TEST(UpdateV, SingletonCollectionIsConstant) {
  const auto p = common_cause(0.1);
  const auto h = HonestCollection::explicit_list(3, {S({0, 1})});
  auto setup = honest_setup(p, h, S({0, 1}));
  setup.strategy = Strategy::black_hole();
  ProtocolParams params;
  params.rounds = 10;
  params.seed = 6;
  const auto rep = run_session(setup, params);
  for (const auto& v : rep.v_trajectory) {
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0], S({0, 1}));
  }
}

TEST(KeepsSet, ExactAndProjectionRoutesAgree) {
  // The perfect-information interval test and the alternating-projection test on the same
  // ball must reach the same verdict whenever the latter is decided.
  const auto p = common_cause(0.1);
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto exact = honest_setup(p, h, S({0, 1}));
  auto numeric = exact;
  numeric.info.perfect_information = false;
  Rng rng(7);
  int compared = 0, kept = 0, dropped = 0;
  for (int k = 0; k < 300; ++k) {
    std::vector<std::int64_t> counts(8, 0);
    const int n = 12;
    for (int t = 0; t < n; ++t) ++counts[rng.below(8)];
    const EmpiricalType type({2, 2, 2}, counts, n);
    const double eta = 0.3 + 1.5 * rng.uniform01();
    const auto s = h.candidates[rng.below(h.size())];
    const bool a = keeps_set(type, S({0, 1, 2}), s, exact, eta);
    const int idx = h.index_of(s);
    const auto res = q_ball_feasible(type, S({0, 1, 2}), eta, s, numeric.info.channels[idx][0], p);
    if (res.status == Feasibility::indeterminate) continue;
    ++compared;
    EXPECT_EQ(a, res.status == Feasibility::feasible) << "case " << k;
    (a ? kept : dropped) += 1;
  }
  EXPECT_GE(compared, 250);
  EXPECT_GT(kept, 0);
  EXPECT_GT(dropped, 0);
}

TEST(Transcript, JsonLinesOnePerTransaction) {
  const auto p = common_cause(0.1);
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto setup = honest_setup(p, h, S({0, 1, 2}));
  ProtocolParams params;
  params.rounds = 2;
  params.seed = 8;
  const auto rep = run_session(setup, params);
  const auto text = rep.transcript_jsonl();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), rep.transcript.size());
  EXPECT_EQ(text.rfind("{\"round\":0", 0), 0u);
}

}  // namespace
}  // namespace bdsc
