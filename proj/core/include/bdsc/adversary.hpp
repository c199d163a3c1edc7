#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bdsc/binning.hpp"
#include "bdsc/fixed_rate_code.hpp"
#include "bdsc/prob.hpp"
#include "bdsc/region.hpp"
#include "bdsc/source.hpp"

namespace bdsc {

enum class StrategyKind { honest_passthrough, black_hole, fake_distribution, fixed_rate_ambiguity };

const char* to_string(StrategyKind k);
StrategyKind parse_strategy_kind(const std::string& s);

struct Strategy {
  StrategyKind kind = StrategyKind::honest_passthrough;
  // fake_distribution: qbar(x_T | w), input alphabet W, output the flattened X_T alphabet.
  std::optional<ConditionalPMF> q_bar;

  static Strategy honest() { return {}; }
  static Strategy black_hole() { return {StrategyKind::black_hole, std::nullopt}; }
  static Strategy fake(ConditionalPMF q_bar) { return {StrategyKind::fake_distribution, std::move(q_bar)}; }
  static Strategy ambiguity() { return {StrategyKind::fixed_rate_ambiguity, std::nullopt}; }
};

struct PollRecord {
  int sensor = 0;
  int j = 0;
};

// Everything the traitors may use: their own observations, the side information W^n, the
// public source law and code, the polling history, and their own seed. Honest sensors'
// randomness and honest messages are not reachable from here.
class TraitorContext {
 public:
  TraitorContext(SubsetView traitors, const JointPMF& p, const ConditionalPMF& channel, const SideInfoBlock& w,
                 const SourceBlock& block, std::uint64_t seed, int round);

  SubsetView traitors() const { return traitors_; }
  const JointPMF& source_law() const { return *p_; }
  const ConditionalPMF& channel() const { return *channel_; }
  const SideInfoBlock& side_info() const { return *w_; }
  // A traitor's own observation; throws for honest sensors.
  const Sequence& own_observation(int sensor) const;
  std::uint64_t seed() const { return seed_; }
  int round() const { return round_; }
  int n() const { return static_cast<int>(w_->w.size()); }
  const std::vector<int>& alphabet_sizes() const { return p_->alphabet_sizes(); }

  const std::vector<PollRecord>& polling_history() const { return history_; }
  void record_poll(int sensor, int j) { history_.push_back({sensor, j}); }

  // x_A^n recovered from W^n, valid when X_A is a function of W (H_r(X_A|W) = 0).
  std::vector<Sequence> recover_from_side_info(SubsetView a) const;

 private:
  SubsetView traitors_;
  const JointPMF* p_;
  const ConditionalPMF* channel_;
  const SideInfoBlock* w_;
  std::vector<Sequence> own_;  // indexed by sensor; empty for honest sensors
  std::uint64_t seed_;
  int round_;
  std::vector<PollRecord> history_;
};

// Per-slot draw x_T,t ~ qbar(. | w_t); rows returned in ascending traitor order.
std::vector<Sequence> fabricate_block(const TraitorContext& ctx, const ConditionalPMF& q_bar, std::uint64_t seed);

// Optimal attacking simulation for an actual honest set, derived from the region maximizer.
ConditionalPMF optimal_q_bar(const JointPMF& p, const HonestCollection& h, const InfoModel& info, SubsetView h_true,
                             const ConditionalPMF& r, std::uint64_t seed = 0);

struct VariableRateReply {
  int c = 0;
  BinIndex index = 0;
};

// Traitor side of the variable-rate protocol. One instance per session.
class VariableRateTraitor {
 public:
  VariableRateTraitor(Strategy strategy, const std::vector<BinningCodebook>& codebooks);

  // Called once per round before any poll; fabricates the round's fake block if needed.
  void begin_round(const TraitorContext& ctx);
  // Answer to the decoder's j-th (0-based) transaction with a traitor sensor.
  VariableRateReply respond(TraitorContext& ctx, int sensor, int j);

  const Strategy& strategy() const { return strategy_; }
  // Sequence the traitor is encoding this round (fake or true); null for black holes.
  const Sequence* reported_sequence(int sensor) const;

 private:
  Strategy strategy_;
  const std::vector<BinningCodebook>* codebooks_;
  std::vector<Sequence> reported_;  // indexed by sensor
  std::vector<int> chosen_c_;
};

struct FixedRateMessage {
  int c = 0;
  BinIndex index = 0;
};

// Traitor messages for the fixed-rate code under the non-ambiguity strategies.
FixedRateMessage fixed_rate_traitor_message(const TraitorContext& ctx, const Strategy& strategy,
                                            const FixedRateCode& code, int sensor,
                                            const std::vector<Sequence>& fabricated);

struct AmbiguityOutcome {
  bool found = false;
  std::vector<Sequence> confusable;  // x'_{S1 cap H}, ascending sensor order
  std::vector<Sequence> companion;   // x'_{S1 minus H}
  std::vector<std::pair<int, FixedRateMessage>> messages;  // one per traitor
};

// Deterministic-code attack: find x' in the honest bins of S1 cap H, typical and different from
// the truth, plus a jointly typical companion for the traitors in S1, and report their bins.
// `accept` lets the caller veto a candidate (for example by simulating the decoder). Against a
// randomized code the honest subcodebook choices are unknown, so the attack assumes c = 0.
AmbiguityOutcome fixed_rate_ambiguity_attack(
    const TraitorContext& ctx, SubsetView s1, SubsetView h_true, const FixedRateCode& code,
    const std::function<bool(const std::vector<std::pair<int, FixedRateMessage>>&)>& accept = {});

}  // namespace bdsc
