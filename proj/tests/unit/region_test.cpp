#include <gtest/gtest.h>

#include <cmath>

#include "bdsc/region.hpp"
#include "bdsc/source.hpp"
#include "oracles.hpp"

namespace bdsc {
namespace {

SubsetView S(std::initializer_list<int> idx) { return SubsetView::from_indices(idx); }

std::vector<double> raw(const JointPMF& p) { return {p.mass().begin(), p.mass().end()}; }

JointPMF random_law(std::uint64_t seed, std::vector<int> sizes) {
  std::size_t total = 1;
  for (int s : sizes) total *= static_cast<std::size_t>(s);
  return JointPMF::normalized(std::move(sizes), oracle::random_positive_law(seed, total));
}

double h2(double x) { return -x * std::log2(x) - (1 - x) * std::log2(1 - x); }

// X0 = (Y01, Y02), X1 = (Y01, Y12), X2 = (Y02, Y12) with independent biased bits.
JointPMF shared_pieces_law(double b01, double b02, double b12) {
  std::vector<double> mass(64, 0.0);
  for (int y01 = 0; y01 < 2; ++y01)
    for (int y02 = 0; y02 < 2; ++y02)
      for (int y12 = 0; y12 < 2; ++y12) {
        const double pr = (y01 ? b01 : 1 - b01) * (y02 ? b02 : 1 - b02) * (y12 ? b12 : 1 - b12);
        const int x0 = y01 * 2 + y02, x1 = y01 * 2 + y12, x2 = y02 * 2 + y12;
        mass[(x0 * 4 + x1) * 4 + x2] += pr;
      }
  return JointPMF({4, 4, 4}, mass);
}

TEST(MaxEntropy, ChainFamilyFactorsThroughMiddle) {
  const auto p = random_law(1, {2, 2, 2});
  const std::vector<SubsetView> v = {S({0, 1}), S({1, 2})};
  const auto res = max_entropy_with_marginals(p, v);
  ASSERT_TRUE(res.converged);
  const auto r = raw(p);
  const auto p01 = oracle::marginal(r, {2, 2, 2}, {0, 1});
  const auto p12 = oracle::marginal(r, {2, 2, 2}, {1, 2});
  const auto p1 = oracle::marginal(r, {2, 2, 2}, {1});
  for (int x = 0; x < 8; ++x) {
    const int a = x >> 2, b = (x >> 1) & 1, c = x & 1;
    EXPECT_NEAR(res.q[x], p01[a * 2 + b] * p12[b * 2 + c] / p1[b], 1e-9);
  }
  EXPECT_NEAR(res.value,
              oracle::entropy_of(r, {2, 2, 2}, {0, 1}) + oracle::conditional_entropy(r, {2, 2, 2}, {2}, {1}), 1e-9);
}

TEST(MaxEntropy, FullSetReturnsLaw) {
  const auto p = random_law(2, {2, 2, 2});
  const std::vector<SubsetView> v = {S({0, 1, 2})};
  const auto res = max_entropy_with_marginals(p, v);
  for (std::size_t x = 0; x < p.size(); ++x) EXPECT_NEAR(res.q[x], p[x], 1e-10);
  EXPECT_NEAR(res.value, entropy(p), 1e-9);
}

TEST(MaxEntropy, IrreducibleFamilyMatchesGradientOracle) {
  const std::vector<SubsetView> v = {S({0, 1, 2}), S({2, 3, 4}), S({0, 4, 5})};
  const std::vector<std::vector<int>> vo = {{0, 1, 2}, {2, 3, 4}, {0, 4, 5}};
  const std::vector<int> sizes(6, 2);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto p = random_law(100 + seed, sizes);
    const auto res = max_entropy_with_marginals(p, v);
    const auto ora = oracle::max_entropy_projected_gradient(raw(p), sizes, vo);
    ASSERT_LT(ora.residual, 1e-9);
    EXPECT_NEAR(res.value, ora.value, 1e-4) << "seed " << seed;
  }
}

TEST(MaxEntropy, MarginalsAndValueOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(3, "ipf", seed));
    const int m = 2 + static_cast<int>(rng.below(3));
    const std::vector<int> sizes(m, 2);
    const auto p = random_law(derive_seed(3, "law", seed), sizes);
    std::vector<SubsetView> v;
    std::vector<std::vector<int>> vo;
    const int k = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < k; ++i) {
      std::uint32_t mask = 0;
      while (mask == 0) mask = static_cast<std::uint32_t>(rng.below(1u << m));
      const auto s = SubsetView::from_mask(mask);
      if (std::find(v.begin(), v.end(), s) != v.end()) continue;
      v.push_back(s);
      vo.push_back(s.indices());
    }
    const auto res = max_entropy_with_marginals(p, v);
    for (const auto& s : v) {
      const auto want = marginal_table(p, s);
      const auto got = marginal_table(res.q, s);
      for (std::size_t c = 0; c < want.size(); ++c) EXPECT_NEAR(got[c], want[c], 1e-8);
    }
    const auto u = union_of(v);
    EXPECT_GE(res.value, entropy(p, u) - 1e-9);
    // The oracle works on the full table; with U(V) smaller than everything the maximizer is
    // uniform on the remaining coordinates.
    const double extra = static_cast<double>(m - u.size());
    const auto ora = oracle::max_entropy_projected_gradient(raw(p), sizes, vo);
    EXPECT_NEAR(res.value + extra, ora.value, 1e-4) << "seed " << seed;
  }
}

TEST(RStarPerfect, SingleTraitorThreeSensors) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = random_law(200 + seed, {2, 2, 2});
    const auto r = raw(p);
    const std::vector<int> sz = {2, 2, 2};
    const double want = oracle::entropy(r) + std::max({oracle::cmi(r, sz, {0}, {1}, {2}),
                                                       oracle::cmi(r, sz, {0}, {2}, {1}),
                                                       oracle::cmi(r, sz, {1}, {2}, {0})});
    const auto rep = r_star_perfect(p, HonestCollection::threshold_family(3, 1));
    EXPECT_NEAR(rep.r_star, want, 1e-6);
    EXPECT_NEAR(closed_form_t(p, 1), want, 1e-9);
  }
}

TEST(RStarPerfect, AllButOneTraitorsIsSumOfEntropies) {
  const auto p = random_law(7, {2, 3, 2, 2});
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) sum += oracle::entropy_of(raw(p), {2, 3, 2, 2}, {i});
  EXPECT_NEAR(r_star_perfect(p, HonestCollection::threshold_family(4, 3)).r_star, sum, 1e-6);
  EXPECT_NEAR(closed_form_t(p, 3), sum, 1e-9);
}

TEST(RStarPerfect, NoTraitorsIsJointEntropy) {
  const auto p = random_law(8, {2, 2, 3});
  EXPECT_NEAR(r_star_perfect(p, HonestCollection::threshold_family(3, 0)).r_star, entropy(p), 1e-9);
}

TEST(RStarPerfect, ReportInvariants) {
  const auto p = random_law(9, {2, 2, 2, 2});
  const auto rep = r_star_perfect(p, HonestCollection::threshold_family(4, 1));
  double best = 0.0;
  for (const auto& pv : rep.per_pair) best = std::max(best, pv.value);
  EXPECT_NEAR(rep.r_star, best, 1e-9);
  for (const auto& s : rep.maximizer_v) {
    const auto want = marginal_table(p, s);
    const auto got = marginal_table(rep.maximizer_q, s);
    for (std::size_t c = 0; c < want.size(); ++c) EXPECT_NEAR(got[c], want[c], 1e-7);
  }
}

TEST(RStarPerfect, MonotoneInCollection) {
  const auto p = random_law(10, {2, 2, 2});
  const auto small = HonestCollection::explicit_list(3, {S({0, 1})});
  const auto mid = HonestCollection::explicit_list(3, {S({0, 1}), S({1, 2})});
  const auto big = HonestCollection::threshold_family(3, 1);
  const double a = r_star_perfect(p, small).r_star;
  const double b = r_star_perfect(p, mid).r_star;
  const double c = r_star_perfect(p, big).r_star;
  EXPECT_LE(a, b + 1e-9);
  EXPECT_LE(b, c + 1e-9);
}

TEST(ClosedForm, SharedPiecesPenalty) {
  const auto p = shared_pieces_law(0.1, 0.2, 0.4);
  // The most uncertain shared piece sets the penalty.
  EXPECT_NEAR(closed_form_t(p, 1), entropy(p) + h2(0.4), 1e-9);
  EXPECT_NEAR(r_star_perfect(p, HonestCollection::threshold_family(3, 1)).r_star, entropy(p) + h2(0.4), 1e-6);
}

TEST(ClosedForm, IndependentSourcesHaveNoPenalty) {
  std::vector<double> mass(16);
  const double b[4] = {0.1, 0.3, 0.5, 0.8};
  for (int x = 0; x < 16; ++x) {
    double v = 1.0;
    for (int k = 0; k < 4; ++k) v *= ((x >> (3 - k)) & 1) ? b[k] : 1 - b[k];
    mass[x] = v;
  }
  const JointPMF p({2, 2, 2, 2}, mass);
  for (int t : {1, 2, 3}) EXPECT_NEAR(closed_form_t(p, t), entropy(p), 1e-9) << "t = " << t;
  EXPECT_THROW(closed_form_t(p, 0), precondition_error);
}

TEST(QSetFeasible, HonestLawFeasibleUnderRevealingChannel) {
  const auto p = random_law(11, {2, 2, 2});
  const auto s = S({0, 1});
  // Side information that reveals the traitor lets it replay the true conditional.
  const auto r = ConditionalPMF::identity({2, 2, 2});
  EXPECT_EQ(q_set_feasible(p, s, r, p).status, Feasibility::feasible);
}

TEST(QSetFeasible, PerfectInformationNeedsOnlyTheMarginal) {
  const auto p = random_law(12, {2, 2, 2});
  const auto s = S({0, 1});
  const auto rt = ConditionalPMF::identity({2, 2, 2});
  // Same S-marginal, X2 replaced by an arbitrary function of X1.
  const auto p01 = marginal_table(p, s);
  std::vector<double> q(8, 0.0);
  for (int x01 = 0; x01 < 4; ++x01) q[x01 * 2 + (x01 & 1)] = p01[x01];
  EXPECT_EQ(q_set_feasible(JointPMF({2, 2, 2}, q), s, rt, p).status, Feasibility::feasible);
  // A different S-marginal is never feasible.
  std::vector<double> bad(8, 0.125);
  EXPECT_EQ(q_set_feasible(JointPMF({2, 2, 2}, bad), s, rt, p).status, Feasibility::infeasible);
}

TEST(QSetFeasible, ConstantChannelForbidsCorrelation) {
  const JointPMF p({2, 2}, {0.25, 0.25, 0.25, 0.25});
  const auto s = S({0});
  const auto rt = ConditionalPMF::constant({2, 2}, {1.0});
  // With no information the traitor's X1 is independent of X0: q = p(x0) qbar(x1).
  const JointPMF correlated({2, 2}, {0.4, 0.1, 0.1, 0.4});
  EXPECT_EQ(q_set_feasible(correlated, s, rt, p).status, Feasibility::infeasible);
  const JointPMF product({2, 2}, {0.5 * 0.3, 0.5 * 0.7, 0.5 * 0.3, 0.5 * 0.7});
  EXPECT_EQ(q_set_feasible(product, s, rt, p).status, Feasibility::feasible);
}

TEST(RStarGeneral, PerfectInformationMatchesPerfectPath) {
  const auto p = random_law(13, {2, 2, 2});
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto info = InfoModel::perfect(h, {2, 2, 2});
  const auto rep = r_star_perfect(p, h);
  const auto ht = S({0, 1});
  const auto gen = r_star_general(p, h, info, ht, ConditionalPMF::identity({2, 2, 2}));
  double pair = 0.0;
  for (const auto& pv : rep.per_pair)
    if (h.candidates[pv.honest_index] == ht) pair = pv.value;
  EXPECT_NEAR(gen.value, pair, 1e-6);
}

TEST(RStarGeneral, NumericPathReproducesSingleTraitorFormula) {
  const auto p = random_law(14, {2, 2, 2});
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto info = InfoModel::perfect(h, {2, 2, 2});
  GeneralOptions opt;
  opt.force_numeric = true;
  double best = 0.0;
  for (const auto& ht : h.candidates)
    best = std::max(best, r_star_general(p, h, info, ht, ConditionalPMF::identity({2, 2, 2}), opt).value);
  EXPECT_NEAR(best, closed_form_t(p, 1), 1e-6);
}

TEST(RStarGeneral, ConstantChannelMatchesGridOracle) {
  const auto h = HonestCollection::threshold_family(3, 1);
  std::vector<std::vector<int>> cands;
  for (const auto& s : h.candidates) cands.push_back(s.indices());
  const auto constant = ConditionalPMF::constant({2, 2, 2}, {1.0});
  InfoModel info;
  info.perfect_information = false;
  info.channels.assign(h.size(), {constant});

  // A correlated law: the traitor cannot imitate any other set.
  const auto p = random_law(15, {2, 2, 2});
  // A law in which X2 is independent of (X0, X1) with p(x2 = 0) = 0.3 on the grid.
  std::vector<double> mass(8);
  const double p01[4] = {0.4, 0.1, 0.2, 0.3};
  for (int x = 0; x < 8; ++x) mass[x] = p01[x >> 1] * ((x & 1) ? 0.7 : 0.3);
  const JointPMF indep({2, 2, 2}, mass);

  for (const auto* law : {&p, &indep}) {
    const double want = oracle::constant_channel_grid(raw(*law), 3, {0, 1}, cands);
    const auto got = r_star_general(*law, h, info, S({0, 1}), constant);
    EXPECT_NEAR(got.value, want, 1e-5);
  }
}

TEST(SlepianWolf, CornerAndViolation) {
  const auto p = random_law(16, {2, 2});
  const double h0 = entropy(p, S({0}));
  const double h10 = conditional_entropy(p, S({1}), S({0}));
  const std::vector<double> corner = {h0, h10};
  EXPECT_TRUE(sw_region_contains(corner, p, S({0, 1})));
  const std::vector<double> low = {h0, h10 - 0.01};
  EXPECT_FALSE(sw_region_contains(low, p, S({0, 1})));
  const std::vector<double> indep = {h0, entropy(p, S({1}))};
  EXPECT_TRUE(sw_region_contains(indep, p, S({0, 1})));
}

TEST(FixedRateRegion, ThreeSensorRegions) {
  const auto p = random_law(17, {2, 2, 2});
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto info = InfoModel::perfect(h, {2, 2, 2});
  std::vector<double> hi(3);
  for (int i = 0; i < 3; ++i) hi[i] = entropy(p, SubsetView::from_indices({i}));
  EXPECT_TRUE(fixed_rate_region_contains(hi, p, h, info, FixedRateKind::deterministic));
  EXPECT_TRUE(fixed_rate_region_contains(hi, p, h, info, FixedRateKind::randomized));
  auto below = hi;
  below[1] -= 0.05;
  EXPECT_FALSE(fixed_rate_region_contains(below, p, h, info, FixedRateKind::deterministic));
  // Still inside every pairwise Slepian-Wolf region when the law is correlated enough.
  const bool pairs = sw_region_contains(below, p, S({0, 1})) && sw_region_contains(below, p, S({0, 2})) &&
                     sw_region_contains(below, p, S({1, 2}));
  EXPECT_EQ(fixed_rate_region_contains(below, p, h, info, FixedRateKind::randomized), pairs);
}

TEST(FixedRateRegion, MinSumPointSatisfiesFacets) {
  const auto p = random_law(18, {2, 2, 2});
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto info = InfoModel::perfect(h, {2, 2, 2});
  for (auto kind : {FixedRateKind::randomized, FixedRateKind::deterministic}) {
    const auto facets = fixed_rate_facets(p, h, info, kind);
    const auto r = min_sum_rate_point(facets, 3);
    for (const auto& f : facets) {
      double s = 0.0;
      for (int i : f.sum_over.indices()) s += r[i];
      EXPECT_GE(s, f.bound - 1e-9);
    }
    EXPECT_TRUE(fixed_rate_region_contains(r, p, h, info, kind));
  }
}

}  // namespace
}  // namespace bdsc
