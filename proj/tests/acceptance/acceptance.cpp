// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bdsc/harness.hpp"
#include "oracles.hpp"
#include "properties.hpp"

namespace {

using namespace bdsc;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  std::string violations;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      violations += " [violated: " + what + "]";
    }
  }
};

std::vector<double> table(const JointPMF& p) { return {p.mass().begin(), p.mass().end()}; }

// Z ~ Bern(1/2) unobserved, X_k = Z xor Bern(f), three binary sensors.
std::vector<double> common_cause(double f) {
  std::vector<double> mass(8, 0.0);
  for (int x = 0; x < 8; ++x)
    for (int z = 0; z < 2; ++z) {
      double w = 0.5;
      for (int k = 0; k < 3; ++k) w *= ((x >> (2 - k)) & 1) == z ? 1.0 - f : f;
      mass[x] += w;
    }
  return mass;
}

// Tolerances and limits.
constexpr double kRegionTol = 1e-6;
constexpr double kNoTraitorTol = 1e-9;
constexpr double kChainFactorTol = 1e-7;
constexpr double kIrreducibleTol = 1e-4;
constexpr double kGridTol = 1e-9;
constexpr double kVrErrorMax = 0.05;
constexpr double kVrNoTraitorSlack = 0.1;
constexpr double kVrAttackSlack = 0.2;
constexpr double kMultiSetMin = 0.9;
constexpr double kFrErrorMax = 0.1;
constexpr double kConverseErrorMin = 0.2;
constexpr int kPropertyCases = 1000;

Verdict criterion1() {
  Verdict v;
  const auto t0 = Clock::now();
  const std::vector<int> sizes = {2, 2, 2};
  double worst1 = 0.0, worst2 = 0.0, worst0 = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto mass = oracle::random_positive_law(1000 + k, 8);
    const JointPMF p(sizes, mass);
    const double h = oracle::entropy(mass);
    const double best = std::max({oracle::cmi(mass, sizes, {0}, {1}, {2}), oracle::cmi(mass, sizes, {0}, {2}, {1}),
                                  oracle::cmi(mass, sizes, {1}, {2}, {0})});
    double sum_single = 0.0;
    for (int i = 0; i < 3; ++i) sum_single += oracle::entropy_of(mass, sizes, {i});
    worst1 = std::max(worst1, std::abs(r_star_perfect(p, HonestCollection::threshold_family(3, 1)).r_star - (h + best)));
    worst2 = std::max(worst2, std::abs(r_star_perfect(p, HonestCollection::threshold_family(3, 2)).r_star - sum_single));
    worst0 = std::max(worst0, std::abs(r_star_perfect(p, HonestCollection::threshold_family(3, 0)).r_star - h));
  }
  v.check(worst1 <= kRegionTol, "one-traitor value");
  v.check(worst2 <= kRegionTol, "m-1 traitor value");
  v.check(worst0 <= kNoTraitorTol, "no-traitor value");
  v.check(std::chrono::duration<double>(Clock::now() - t0).count() < 10.0, "runtime");
  v.detail << "max deviation t=1 " << worst1 << ", t=m-1 " << worst2 << ", t=0 " << worst0;
  return v;
}

Verdict criterion2() {
  Verdict v;
  const auto t0 = Clock::now();
  const std::vector<int> sizes3 = {2, 2, 2};
  double worst_cell = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto mass = oracle::random_positive_law(2000 + k, 8);
    const JointPMF p(sizes3, mass);
    const std::vector<SubsetView> fam = {SubsetView::from_indices({0, 1}), SubsetView::from_indices({1, 2})};
    const auto res = max_entropy_with_marginals(p, fam);
    const auto p12 = oracle::marginal(mass, sizes3, {0, 1});
    const auto p23 = oracle::marginal(mass, sizes3, {1, 2});
    const auto p2 = oracle::marginal(mass, sizes3, {1});
    for (int x = 0; x < 8; ++x) {
      const int a = (x >> 2) & 1, b = (x >> 1) & 1, c = x & 1;
      const double expect = p12[a * 2 + b] * p23[b * 2 + c] / p2[b];
      worst_cell = std::max(worst_cell, std::abs(res.q.mass()[x] - expect));
    }
  }
  v.check(worst_cell <= kChainFactorTol, "chain factorization");
  const std::vector<int> sizes6(6, 2);
  const std::vector<std::vector<int>> fam6 = {{0, 1, 2}, {2, 3, 4}, {0, 4, 5}};
  std::vector<SubsetView> fam;
  for (const auto& s : fam6) fam.push_back(SubsetView::from_indices(std::span<const int>(s)));
  double worst_value = 0.0;
  for (int k = 0; k < 5; ++k) {
    const auto mass = oracle::random_positive_law(3000 + k, 64);
    const JointPMF p(sizes6, mass);
    const auto res = max_entropy_with_marginals(p, fam);
    const auto ref = oracle::max_entropy_projected_gradient(mass, sizes6, fam6);
    worst_value = std::max(worst_value, std::abs(res.value - ref.value));
  }
  v.check(worst_value <= kIrreducibleTol, "irreducible family value");
  v.check(std::chrono::duration<double>(Clock::now() - t0).count() < 60.0, "runtime");
  v.detail << "max cell error " << worst_cell << ", max value error " << worst_value;
  return v;
}

Verdict criterion3() {
  Verdict v;
  const std::vector<int> sizes = {2, 2, 2};
  // A generic correlated law: common-cause law mixed with a random positive one.
  const auto noise = oracle::random_positive_law(4000, 8);
  const auto base = common_cause(0.1);
  std::vector<double> mass(8);
  for (int x = 0; x < 8; ++x) mass[x] = 0.7 * base[x] + 0.3 * noise[x];
  const JointPMF p(sizes, mass);
  const auto h = HonestCollection::threshold_family(3, 1);
  const auto info = InfoModel::perfect(h, sizes);
  auto H = [&](std::vector<int> s) { return oracle::entropy_of(mass, sizes, s); };
  const double h0 = H({0}), h1 = H({1}), h2 = H({2});
  const double h01 = H({0, 1}), h02 = H({0, 2}), h12 = H({1, 2});
  int det_mismatch = 0, ran_mismatch = 0, inclusion = 0, det_accepted = 0, ran_accepted = 0;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      for (int c = 0; c < 10; ++c) {
        const std::vector<double> r = {0.4 + 0.6 * a / 9.0, 0.4 + 0.6 * b / 9.0, 0.4 + 0.6 * c / 9.0};
        const bool det = fixed_rate_region_contains(r, p, h, info, FixedRateKind::deterministic);
        const bool ran = fixed_rate_region_contains(r, p, h, info, FixedRateKind::randomized);
        const bool det_ref = r[0] >= h0 - kGridTol && r[1] >= h1 - kGridTol && r[2] >= h2 - kGridTol;
        const bool ran_ref = r[0] >= std::max(h01 - h1, h02 - h2) - kGridTol &&
                             r[1] >= std::max(h01 - h0, h12 - h2) - kGridTol &&
                             r[2] >= std::max(h02 - h0, h12 - h1) - kGridTol && r[0] + r[1] >= h01 - kGridTol &&
                             r[0] + r[2] >= h02 - kGridTol && r[1] + r[2] >= h12 - kGridTol;
        det_mismatch += det != det_ref;
        ran_mismatch += ran != ran_ref;
        inclusion += det && !ran;
        det_accepted += det;
        ran_accepted += ran;
      }
  v.check(det_mismatch == 0, "deterministic region");
  v.check(ran_mismatch == 0, "randomized region");
  v.check(inclusion == 0, "inclusion");
  v.check(det_accepted > 0 && ran_accepted > det_accepted, "grid exercises both regions");

  // Common cause: X_k = Z xor noise. Conditioning on X3 leaves little of Z, so I(X1X2;X3) > I(X1;X2|X3).
  const auto cc = common_cause(0.1);
  const JointPMF q(sizes, cc);
  const double hq = oracle::entropy(cc);
  const double i12_3 = oracle::cmi(cc, sizes, {0}, {1}, {2});
  const double i12_3joint = oracle::cmi(cc, sizes, {0, 1}, {2}, {});
  const double eq6 = hq + 0.5 * (i12_3 + i12_3joint);
  const double half_pairs =
      0.5 * (oracle::entropy_of(cc, sizes, {0, 1}) + oracle::entropy_of(cc, sizes, {0, 2}) + oracle::entropy_of(cc, sizes, {1, 2}));
  const auto facets = fixed_rate_facets(q, h, InfoModel::perfect(h, sizes), FixedRateKind::randomized);
  const auto point = min_sum_rate_point(facets, 3);
  const double min_sum = point[0] + point[1] + point[2];
  const double eq4 = r_star_perfect(q, h).r_star;
  v.check(i12_3joint > i12_3, "constructed law condition");
  v.check(std::abs(eq6 - half_pairs) <= kRegionTol, "pair-sum identity");
  v.check(std::abs(min_sum - eq6) <= kRegionTol, "randomized min sum");
  v.check(eq6 > eq4 + kRegionTol, "fixed-rate gap");
  v.detail << "grid accepted det " << det_accepted << ", ran " << ran_accepted << "; mismatches det " << det_mismatch << ", ran " << ran_mismatch << ", inclusion " << inclusion
           << "; fixed-rate min sum " << min_sum << " vs variable-rate " << eq4;
  return v;
}

Verdict criterion4() {
  Verdict v;
  const auto s = preset("no-traitor");
  const auto sim = simulate_vr(s, 100, 4, 1);
  const double h = oracle::entropy(table(s.law()));
  v.check(sim.failures == 0, "no failed trials");
  v.check(sim.session_error.rate <= kVrErrorMax, "honest error");
  v.check(sim.mean_sum_rate <= h + sim.slack + kVrNoTraitorSlack, "sum rate");
  v.check(sim.wall_seconds < 300.0, "runtime");
  v.detail << "honest error " << sim.session_error.rate << ", mean sum rate " << sim.mean_sum_rate << " vs "
           << h + sim.slack + kVrNoTraitorSlack << ", " << sim.wall_seconds << " s";
  return v;
}

Verdict criterion5() {
  Verdict v;
  const auto s = preset("three-sensor");
  const auto mass = table(s.law());
  const std::vector<int> sizes = s.alphabet_sizes;
  const double eq4 = oracle::entropy(mass) + std::max({oracle::cmi(mass, sizes, {0}, {1}, {2}),
                                                        oracle::cmi(mass, sizes, {0}, {2}, {1}),
                                                        oracle::cmi(mass, sizes, {1}, {2}, {0})});
  const auto sim = simulate_vr(s, 100, 5, 1);
  v.check(sim.failures == 0, "no failed trials");
  v.check(sim.session_error.rate <= kVrErrorMax, "honest error");
  v.check(sim.mean_sum_rate <= eq4 + sim.slack + kVrAttackSlack, "sum rate");
  v.check(sim.max_over_budget <= s.m(), "over-budget rounds");
  v.check(sim.multi_set_fraction >= kMultiSetMin, "indistinguishability");
  v.check(sim.wall_seconds < 600.0, "runtime");
  v.detail << "honest error " << sim.session_error.rate << ", mean sum rate " << sim.mean_sum_rate << " vs "
           << eq4 + sim.slack + kVrAttackSlack << ", max over-budget " << sim.max_over_budget << ", final V >= 2 sets "
           << sim.multi_set_fraction << ", " << sim.wall_seconds << " s";
  return v;
}

Verdict criterion6() {
  Verdict v;
  auto s = preset("three-sensor");
  s.strategy.kind = "worst_case";
  s.fr.kind = "randomized";
  s.fr.rate_rule = "randomized_min_sum";
  s.fr.rate_margin = 0.1;
  s.fr.n = 14;
  const auto fr = simulate_fr(s, 200, 6, 1);
  const auto conv = simulate_converse(preset("converse"), 200, 7, 1);
  v.check(fr.failures == 0, "no failed trials");
  v.check(fr.worst.rate <= kFrErrorMax, "achievability error");
  v.check(conv.honest_error.rate >= kConverseErrorMin, "converse error");
  v.check(fr.wall_seconds + conv.wall_seconds < 600.0, "runtime");
  v.detail << "worst strategy " << fr.worst_strategy << " error " << fr.worst.rate << " (limit " << kFrErrorMax
           << "), converse error " << conv.honest_error.rate << ", " << fr.wall_seconds + conv.wall_seconds << " s";
  return v;
}

Verdict criterion7() {
  Verdict v;
  auto s = preset("three-sensor");
  s.vr.rounds = 10;
  const auto a = vr_csv(simulate_vr(s, 10, 8, 1));
  const auto b = vr_csv(simulate_vr(s, 10, 8, 1));
  s.strategy.kind = "worst_case";
  const auto c = fr_csv(simulate_fr(s, 10, 8, 1));
  const auto d = fr_csv(simulate_fr(s, 10, 8, 1));
  v.check(a == b, "variable-rate CSV");
  v.check(c == d, "fixed-rate CSV");
  v.detail << "variable-rate " << a.size() << " bytes, fixed-rate " << c.size() << " bytes";
  return v;
}

Verdict criterion8() {
  Verdict v;
  const auto session = props::session_invariants(kPropertyCases, 803);
  const std::vector<std::pair<std::string, props::Outcome>> suites = {
      {"chain rule", props::chain_rule(kPropertyCases, 801)},
      {"eta-ball monotonicity", props::eta_ball_monotone(kPropertyCases, 802)},
      {"V monotonicity", session.v_monotone},
      {"phase bound", session.phase_bound},
      {"rate accounting", session.rate_accounting},
      {"C = 1 reduction", props::single_subcodebook_reduction(kPropertyCases, 804)}};
  for (const auto& [name, o] : suites) {
    v.check(o.cases == kPropertyCases && o.failures == 0, name + ": " + o.first_failure);
    v.detail << name << " " << o.failures << "/" << o.cases << "; ";
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = criteria[k]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "threw: " << e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("criterion %zu %s: %s (%.1f s)\n", k + 1, v.pass ? "PASS" : "FAIL", (v.detail.str() + v.violations).c_str(), secs);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
