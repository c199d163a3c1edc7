#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bdsc/binning.hpp"
#include "bdsc/prob.hpp"
#include "bdsc/region.hpp"

namespace bdsc {

enum class TieBreak { lexicographic, likelihood };
// How a sensor's final estimate is chosen among disagreeing candidate sets: by the fixed
// preference order (larger sets first, then lexicographic), or by the smallest divergence
// D(type || p_S) of the decoded tuple, with the preference order breaking ties.
enum class Arbitration { preference, divergence };

struct FixedRateCode {
  std::vector<int> alphabet_sizes;
  std::vector<double> rates;  // bits per symbol, one per sensor
  int n = 14;
  FixedRateKind kind = FixedRateKind::randomized;
  int subcodebooks = 8;  // C; forced to 1 for the deterministic kind
  std::uint64_t seed = 0;
  double typicality_eps = 0.0;
  bool plurality = false;
  TieBreak tie_break = TieBreak::lexicographic;
  Arbitration arbitration = Arbitration::preference;

  int m() const { return static_cast<int>(alphabet_sizes.size()); }
  int effective_subcodebooks() const { return kind == FixedRateKind::deterministic ? 1 : subcodebooks; }
  void validate() const;
};

// Every sequence of one sensor grouped by its fixed-rate bin under one subcodebook.
class BinTable {
 public:
  BinTable(const FixedRateCode& code, int sensor, int c);

  int sensor() const { return sensor_; }
  int c() const { return c_; }
  const SequenceSpace& space() const { return space_; }
  BinIndex bin_of_rank(std::uint64_t rank) const { return bin_[rank]; }
  // Ranks in the given bin, ascending (so lexicographic).
  std::vector<std::uint64_t> members(BinIndex bin) const;

 private:
  int sensor_;
  int c_;
  SequenceSpace space_;
  std::vector<BinIndex> bin_;
  std::vector<std::pair<BinIndex, std::uint64_t>> sorted_;
};

}  // namespace bdsc
