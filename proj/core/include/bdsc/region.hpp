#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bdsc/feasibility.hpp"
#include "bdsc/prob.hpp"

namespace bdsc {

// The list of sets the code must tolerate as the honest set.
struct HonestCollection {
  int m = 0;
  std::vector<SubsetView> candidates;
  std::optional<int> threshold;  // set when built as {S : |S| >= m - t}

  static HonestCollection threshold_family(int m, int t);
  static HonestCollection explicit_list(int m, std::vector<SubsetView> sets);

  std::size_t size() const { return candidates.size(); }
  int index_of(SubsetView s) const;  // -1 when absent
  void validate() const;
};

// R(S): the side-information channels the traitors may have when S is the honest set.
// channels[k] belongs to candidates[k].
struct InfoModel {
  bool perfect_information = true;
  std::vector<std::vector<ConditionalPMF>> channels;

  static InfoModel perfect(const HonestCollection& h, const std::vector<int>& alphabet_sizes);
  void validate(const HonestCollection& h, const std::vector<int>& alphabet_sizes) const;
};

// Union of the members of V.
SubsetView union_of(std::span<const SubsetView> v);

struct MaxEntResult {
  JointPMF q;
  double value = 0.0;  // H_q(X_U(V)) in bits
  bool converged = false;
  double residual = 0.0;  // max marginal mismatch
  int sweeps = 0;
};

struct MaxEntOptions {
  int max_sweeps = 100000;
  double tolerance = 1e-10;
};

// Maximizes H_q(X_U(V)) subject to q(x_S) = p(x_S) for every S in V, by iterative
// proportional fitting from the uniform table.
MaxEntResult max_entropy_with_marginals(const JointPMF& p, std::span<const SubsetView> v,
                                        const MaxEntOptions& options = {});

struct PairValue {
  int honest_index = 0;   // index into HonestCollection::candidates
  int channel_index = 0;  // index into R(S)
  double value = 0.0;
  std::vector<SubsetView> v;
  JointPMF q;
  bool converged = true;
  double residual = 0.0;
};

struct RegionReport {
  double r_star = 0.0;
  std::vector<PairValue> per_pair;
  std::vector<SubsetView> maximizer_v;
  JointPMF maximizer_q;
  int evaluated = 0;      // number of V families solved
  int nonconverged = 0;   // of which IPF hit its cap
};

// Perfect-information characterization: enumerates every nonempty V of the collection,
// skipping families with a member covered by the union of the others.
RegionReport r_star_perfect(const JointPMF& p, const HonestCollection& h, const MaxEntOptions& options = {});

// Closed forms for the threshold collections with t = 1, t = 2 and t = m - 1.
double closed_form_t(const JointPMF& p, int t);

// Is q in {p(x_S) sum_w r~'(w|x_S) qbar(x_{S^c}|w)} for some qbar.
FeasibilityResult q_set_feasible(const JointPMF& q, SubsetView s, const ConditionalPMF& r_prime, const JointPMF& p,
                                 const FeasibilityOptions& options = {});

// Is some member of Q_{S,r'}, restricted to the coordinates u, within eta/|X_u| of the type t
// in every cell. Used by the variable-rate decoder under imperfect side information.
FeasibilityResult q_ball_feasible(const EmpiricalType& t, SubsetView u, double eta, SubsetView s,
                                  const ConditionalPMF& r_prime, const JointPMF& p,
                                  const FeasibilityOptions& options = {});

struct GeneralOptions {
  int starts = 16;
  std::uint64_t seed = 0;
  bool force_numeric = false;  // skip the exact perfect-information path
  int max_outer = 40;
  int max_inner = 4000;
  double residual_target = 1e-8;
};

struct GeneralResult {
  double value = 0.0;
  double residual = 0.0;  // max constraint violation of the returned point
  bool converged = false;
  std::vector<SubsetView> v;
  JointPMF q;
  // Maximizing traitor simulation qbar(x_T | w) for T = complement of the honest set;
  // input alphabet is W's, output the flattened X_T alphabet. Empty when T is empty.
  std::optional<ConditionalPMF> q_bar;
};

// Sup over V containing h_true and q in Q_{h_true,r} intersected with Q(V) of H_q(X_U(V)).
GeneralResult r_star_general(const JointPMF& p, const HonestCollection& h, const InfoModel& info, SubsetView h_true,
                             const ConditionalPMF& r, const GeneralOptions& options = {});

// H(X_A | W) under p(x) r(w|x).
double entropy_given_side_info(const JointPMF& p, const ConditionalPMF& r, SubsetView a);

bool sw_region_contains(std::span<const double> rates, const JointPMF& p, SubsetView s);

enum class FixedRateKind { deterministic, randomized };

bool fixed_rate_region_contains(std::span<const double> rates, const JointPMF& p, const HonestCollection& h,
                                const InfoModel& info, FixedRateKind kind);

// Sum over `sum_over` of R_i >= bound.
struct Facet {
  SubsetView sum_over;
  double bound = 0.0;
};

// Deduplicated facet list of the fixed-rate region (largest bound per index set).
std::vector<Facet> fixed_rate_facets(const JointPMF& p, const HonestCollection& h, const InfoModel& info,
                                     FixedRateKind kind);

// A minimum-sum point of {R >= 0 : facets hold}, found by vertex enumeration.
std::vector<double> min_sum_rate_point(std::span<const Facet> facets, int m);

}  // namespace bdsc
