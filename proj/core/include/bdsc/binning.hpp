#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdsc/prob.hpp"

namespace bdsc {

using BinIndex = unsigned __int128;

std::string to_string(BinIndex v);
BinIndex parse_bin_index(const std::string& s);

// ceil(2^bits) for 0 <= bits <= 126.
BinIndex bin_count_for_bits(double bits);
double log2_bin_count(BinIndex count);

// Exhaustive search spaces are limited to 2^22 sequences.
inline constexpr double kSearchBitsLimit = 22.0;

// All length-n sequences over {0..q-1}, ranked lexicographically.
class SequenceSpace {
 public:
  SequenceSpace(int alphabet_size, int n);

  int alphabet_size() const { return q_; }
  int n() const { return n_; }
  std::uint64_t size() const { return size_; }
  void at(std::uint64_t rank, Sequence& out) const;
  Sequence at(std::uint64_t rank) const;
  std::uint64_t rank(const Sequence& x) const;
  // Throws precondition_error when the space exceeds the exhaustive-search guard.
  void require_searchable() const;

 private:
  int q_;
  int n_;
  std::uint64_t size_;
};

// The incremental-rate bin maps of one sensor: C subcodebooks with J blocks each.
struct BinningCodebook {
  int sensor_id = 0;
  int alphabet_size = 2;
  int n = 0;
  double eps = 0.0;
  double nu = 0.0;
  int subcodebooks = 1;  // C
  int blocks = 1;        // J = ceil(log2|X| / eps)
  std::uint64_t master_seed = 0;
  std::array<unsigned char, 16> key{};

  static BinningCodebook make(int sensor_id, int alphabet_size, int n, double eps, double nu, int subcodebooks,
                              std::uint64_t master_seed);

  // Block j is 0-based: block 0 has ceil(2^{n(eps+nu)}) bins, later blocks ceil(2^{n eps}).
  BinIndex bin_count(int j) const;
  double block_bits(int j) const { return log2_bin_count(bin_count(j)); }
};

struct BinIndexChain {
  int c = 0;
  std::vector<BinIndex> indices;
};

BinIndex encode_block(const BinningCodebook& cb, const Sequence& x, int c, int j);
// Bin indices of blocks 0..count-1.
BinIndexChain composite_encode(const BinningCodebook& cb, const Sequence& x, int c, int count);
// Candidates whose composite index equals the chain, in lexicographic order.
std::vector<Sequence> search_bin(const BinningCodebook& cb, const BinIndexChain& chain,
                                 std::span<const Sequence> candidates);

// Fixed-rate binning key material for one code.
struct FixedRateKey {
  std::array<unsigned char, 16> key{};
  static FixedRateKey from_seed(std::uint64_t seed);
};

BinIndex fixed_rate_bin_count(int n, double rate);
// Index below ceil(2^{n R}). When the bin count covers the whole sequence space the map is a
// keyed permutation of the lexicographic rank, so it is injective; otherwise a keyed hash.
BinIndex fixed_rate_encode(const FixedRateKey& key, int sensor_id, const Sequence& x, int alphabet_size,
                           double rate, std::optional<int> c);
BinIndex fixed_rate_encode(std::uint64_t seed, int sensor_id, const Sequence& x, int alphabet_size, double rate,
                           std::optional<int> c);

}  // namespace bdsc
