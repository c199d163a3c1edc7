#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdsc/adversary.hpp"
#include "bdsc/binning.hpp"
#include "bdsc/prob.hpp"
#include "bdsc/region.hpp"
#include "bdsc/source.hpp"

namespace bdsc {

struct ProtocolParams {
  int n = 12;
  int rounds = 50;  // N
  double eps = 0.35;
  std::optional<double> nu;   // default 5.5 eps
  std::optional<double> eta;  // default from a Hoeffding bound, never below 2 eps
  std::optional<int> subcodebooks;  // C
  double alpha = 0.05;
  std::uint64_t seed = 0;

  // Copy with every optional filled in. c_capped reports whether C hit the desk-scale cap.
  ProtocolParams resolved(const JointPMF& p, const HonestCollection& h, bool* c_capped = nullptr) const;
  // Throws precondition_error unless nu > eps, eta >= eps and the rest are in range. Needs resolved().
  void validate() const;
};

// Everything fixed for one session: the law, the collection, side information and the adversary.
struct SessionSetup {
  JointPMF p;
  HonestCollection h;
  InfoModel info;
  SubsetView h_true;
  ConditionalPMF r;  // actual side-information channel, r(w | x)
  Strategy strategy;
  std::optional<double> rate_bound;  // R*(h_true, r); computed when absent

  void validate() const;
};

struct TranscriptRecord {
  int round = 0;
  int phase = 0;  // position of the phase within the round
  int sensor = 0;
  int c = 0;
  int j = 0;  // 0-based block index
  BinIndex index = 0;
  double bits = 0.0;
};

struct DecoderState {
  std::vector<SubsetView> v;  // current candidate honest sets
  int round = 0;
  std::vector<std::optional<Sequence>> estimates;  // per sensor, this round
  std::vector<bool> undecodable;                   // per sensor, this round
  double total_bits = 0.0;
  std::vector<TranscriptRecord> transcript;

  static DecoderState initial(const HonestCollection& h);
};

struct RoundRecord {
  bool honest_error = false;
  double bits = 0.0;
  std::vector<int> transactions;  // per sensor; 0 when the sensor was not polled
  std::vector<SubsetView> v_after;
  bool v_empty = false;  // the update would have removed every set
  bool over_budget = false;
};

struct SessionReport {
  std::vector<RoundRecord> rounds;
  std::vector<std::vector<SubsetView>> v_trajectory;  // V before round 1, then after each round
  double total_bits = 0.0;
  double sum_rate = 0.0;  // total_bits / (n N)
  double rate_bound = 0.0;
  double feedback_ratio = 0.0;  // log2(C J_max) / (n min block rate)
  int over_budget_rounds = 0;
  int v_empty_events = 0;
  int honest_errors = 0;
  bool c_capped = false;
  ProtocolParams params;  // resolved
  std::vector<TranscriptRecord> transcript;

  // One JSON object per line.
  std::string transcript_jsonl() const;
};

// Codebooks of every sensor for one session.
std::vector<BinningCodebook> make_codebooks(const std::vector<int>& alphabet_sizes, const ProtocolParams& params);

// One round: phases over U(V) in ascending sensor order, then the V update.
RoundRecord run_round(DecoderState& state, const SessionSetup& setup, const ProtocolParams& params,
                      const std::vector<BinningCodebook>& codebooks, VariableRateTraitor& traitor,
                      const SourceBlock& block, const SideInfoBlock& w);

// Sets whose test passes on this round's estimates; `empty` reports a would-be empty result,
// in which case the previous V is kept.
std::vector<SubsetView> update_v(const DecoderState& state, const SessionSetup& setup, const ProtocolParams& params,
                                 bool* empty = nullptr);

// Whether the type of the estimates on u keeps s in V.
bool keeps_set(const EmpiricalType& t, SubsetView u, SubsetView s, const SessionSetup& setup, double eta);

SessionReport run_session(const SessionSetup& setup, const ProtocolParams& params);

}  // namespace bdsc
