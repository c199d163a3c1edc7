#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "bdsc/prob.hpp"

namespace bdsc {

// Derives an independent 64-bit stream seed from (master, label, i, j, k) with a keyed hash,
// so that adding a new consumer never perturbs existing streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t i = 0,
                          std::uint64_t j = 0, std::uint64_t k = 0);

// mt19937_64 with explicitly specified floating and bounded-integer draws, so streams are
// reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  // Unbiased uniform integer in [0, k), k >= 1.
  std::uint64_t below(std::uint64_t k);
  // Index drawn from a probability vector by inverse CDF.
  std::size_t pick(std::span<const double> probs);

 private:
  std::mt19937_64 eng_;
};

struct SourceBlock {
  int n = 0;
  std::vector<int> alphabet_sizes;
  std::vector<Sequence> rows;  // rows[i] is sensor i's length-n sequence

  int m() const { return static_cast<int>(rows.size()); }
  // Row-major joint symbol at time t.
  std::size_t joint_cell(int t) const;
};

struct SideInfoBlock {
  int alphabet = 0;
  std::vector<std::uint32_t> w;
};

SourceBlock sample_block(const JointPMF& p, int n, std::uint64_t seed);
SideInfoBlock sample_side_info(const ConditionalPMF& r, const SourceBlock& block, std::uint64_t seed);

}  // namespace bdsc
