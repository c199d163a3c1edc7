#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bdsc/adversary.hpp"
#include "bdsc/fixed_rate_code.hpp"
#include "bdsc/prob.hpp"
#include "bdsc/region.hpp"
#include "bdsc/source.hpp"

namespace bdsc {

// Honest sensor message: c drawn from the sensor's own stream (randomized kind), then its bin.
FixedRateMessage honest_fixed_rate_message(const FixedRateCode& code, const FixedRateKey& key, int sensor,
                                           const Sequence& x, std::uint64_t seed, int round);

// Messages of every sensor. Sensors outside `honest` take theirs from `traitor_message`.
std::vector<FixedRateMessage> encode_all(const FixedRateCode& code, const SourceBlock& block, SubsetView honest,
                                         std::uint64_t seed, int round,
                                         const std::function<FixedRateMessage(int)>& traitor_message = {});

struct EstimateTable {
  std::vector<SubsetView> sets;  // the candidate sets, in collection order
  // per_set[k][i]: estimate of sensor i from candidates[k]; empty when null or i is not in the set.
  std::vector<std::vector<std::optional<Sequence>>> per_set;
  std::vector<double> divergence;  // D(type || p_S) of each decoded tuple in bits; infinite when null
  std::vector<std::optional<Sequence>> final_estimate;
  std::vector<int> chosen_set;  // per sensor, index into sets or -1
  int disagreements = 0;        // sensors whose non-null estimates differ
};

// Exhaustive typical-set decoder. Bin tables are built lazily and cached, so one instance
// should serve many rounds of the same code. Not safe for concurrent use.
class FixedRateDecoder {
 public:
  FixedRateDecoder(FixedRateCode code, JointPMF p, HonestCollection h);

  const FixedRateCode& code() const { return code_; }
  const BinTable& table(int sensor, int c) const;
  EstimateTable decode(std::span<const FixedRateMessage> messages) const;

 private:
  struct SetEstimate {
    std::vector<Sequence> rows;
    double divergence = 0.0;
  };
  std::optional<SetEstimate> decode_set(SubsetView s, std::span<const FixedRateMessage> messages) const;

  FixedRateCode code_;
  JointPMF p_;
  HonestCollection h_;
  FixedRateKey key_;
  mutable std::map<std::pair<int, int>, std::unique_ptr<BinTable>> tables_;
};

EstimateTable decode_all(const FixedRateCode& code, std::span<const FixedRateMessage> messages, const JointPMF& p,
                         const HonestCollection& h);

// True when some sensor of h_true has a null or wrong final estimate.
bool honest_error(const EstimateTable& table, const SourceBlock& block, SubsetView h_true);

struct ConverseOutcome {
  SubsetView h_true;
  SubsetView s1;
  bool attack_found = false;
  bool honest_error = false;
  EstimateTable estimates;
};

// Picks the first (actual honest set, target set) pair in which the target is preferred by the
// arbitration rule and shares an honest sensor, samples one block, and runs the ambiguity
// attack with perfect side information.
ConverseOutcome demonstrate_converse(const FixedRateDecoder& decoder, const JointPMF& p, const HonestCollection& h,
                                     std::uint64_t seed, int round);

}  // namespace bdsc
