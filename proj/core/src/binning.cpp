#include "bdsc/binning.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bdsc/source.hpp"

namespace bdsc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw precondition_error(what);
}

std::array<unsigned char, 16> key_from(std::uint64_t seed, std::string_view label) {
  std::array<unsigned char, 16> key{};
  const std::uint64_t a = derive_seed(seed, label, 0);
  const std::uint64_t b = derive_seed(seed, label, 1);
  for (int k = 0; k < 8; ++k) {
    key[k] = static_cast<unsigned char>(a >> (8 * k));
    key[8 + k] = static_cast<unsigned char>(b >> (8 * k));
  }
  return key;
}

void put_u32(unsigned char* out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out[k] = static_cast<unsigned char>(v >> (8 * k));
}

// 128-bit keyed hash of (tag, sensor, c, j, symbols).
BinIndex keyed_hash(const std::array<unsigned char, 16>& key, unsigned char tag, int sensor, int c, int j,
                    const Sequence& x) {
  thread_local std::vector<unsigned char> buf;
  buf.resize(13 + x.size());
  buf[0] = tag;
  put_u32(buf.data() + 1, static_cast<std::uint32_t>(sensor));
  put_u32(buf.data() + 5, static_cast<std::uint32_t>(c));
  put_u32(buf.data() + 9, static_cast<std::uint32_t>(j));
  std::copy(x.begin(), x.end(), buf.begin() + 13);
  unsigned char out[crypto_shorthash_siphashx24_BYTES];
  crypto_shorthash_siphashx24(out, buf.data(), buf.size(), key.data());
  BinIndex v = 0;
  for (int k = 15; k >= 0; --k) v = (v << 8) | out[k];
  return v;
}

}  // namespace

std::string to_string(BinIndex v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

BinIndex parse_bin_index(const std::string& s) {
  require(!s.empty(), "empty bin index");
  BinIndex v = 0;
  for (char ch : s) {
    require(ch >= '0' && ch <= '9', "bin index must be decimal");
    v = v * 10 + static_cast<unsigned>(ch - '0');
  }
  return v;
}

BinIndex bin_count_for_bits(double bits) {
  require(bits >= 0.0 && bits <= 126.0, "bin count exponent must lie in [0, 126]");
  const long double v = std::ceil(std::exp2(static_cast<long double>(bits)) - 1e-9L);
  if (v < 1.0L) return 1;
  // Split to stay exact above 2^64.
  const long double hi = std::floor(v / 0x1.0p64L);
  const long double lo = v - hi * 0x1.0p64L;
  return (static_cast<BinIndex>(static_cast<std::uint64_t>(hi)) << 64) +
         static_cast<BinIndex>(static_cast<std::uint64_t>(lo));
}

double log2_bin_count(BinIndex count) {
  require(count >= 1, "bin count must be positive");
  const long double hi = static_cast<long double>(static_cast<std::uint64_t>(count >> 64));
  const long double lo = static_cast<long double>(static_cast<std::uint64_t>(count));
  return static_cast<double>(std::log2(hi * 0x1.0p64L + lo));
}

// ------------------------------------------------------------ SequenceSpace

SequenceSpace::SequenceSpace(int alphabet_size, int n) : q_(alphabet_size), n_(n) {
  require(q_ >= 1 && q_ <= 256, "alphabet size must lie in 1..256");
  require(n_ >= 1, "block length must be positive");
  const double bits = n_ * std::log2(static_cast<double>(q_));
  require(bits <= 63.0, "sequence space too large to index");
  size_ = 1;
  for (int t = 0; t < n_; ++t) size_ *= static_cast<std::uint64_t>(q_);
}

void SequenceSpace::at(std::uint64_t rank, Sequence& out) const {
  out.resize(n_);
  for (int t = n_ - 1; t >= 0; --t) {
    out[t] = static_cast<Symbol>(rank % q_);
    rank /= q_;
  }
}

Sequence SequenceSpace::at(std::uint64_t rank) const {
  Sequence out;
  at(rank, out);
  return out;
}

std::uint64_t SequenceSpace::rank(const Sequence& x) const {
  std::uint64_t r = 0;
  for (Symbol s : x) r = r * q_ + s;
  return r;
}

void SequenceSpace::require_searchable() const {
  require(n_ * std::log2(static_cast<double>(q_)) <= kSearchBitsLimit + 1e-9,
          "exhaustive search space exceeds 2^22 sequences");
}

// ---------------------------------------------------------- BinningCodebook

BinningCodebook BinningCodebook::make(int sensor_id, int alphabet_size, int n, double eps, double nu,
                                      int subcodebooks, std::uint64_t master_seed) {
  require(alphabet_size >= 1 && alphabet_size <= 256, "alphabet size must lie in 1..256");
  require(n >= 1, "block length must be positive");
  require(eps > 0.0 && nu >= 0.0, "eps must be positive and nu nonnegative");
  require(subcodebooks >= 1, "at least one subcodebook");
  BinningCodebook cb;
  cb.sensor_id = sensor_id;
  cb.alphabet_size = alphabet_size;
  cb.n = n;
  cb.eps = eps;
  cb.nu = nu;
  cb.subcodebooks = subcodebooks;
  cb.blocks = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(alphabet_size)) / eps - 1e-9)));
  cb.master_seed = master_seed;
  cb.key = key_from(master_seed, "variable-rate-bins");
  require(n * (eps + nu) <= 126.0, "first-block bin count exceeds 2^126");
  return cb;
}

BinIndex BinningCodebook::bin_count(int j) const {
  require(j >= 0 && j < blocks, "block index out of range");
  return bin_count_for_bits(j == 0 ? n * (eps + nu) : n * eps);
}

BinIndex encode_block(const BinningCodebook& cb, const Sequence& x, int c, int j) {
  require(c >= 0 && c < cb.subcodebooks, "subcodebook index out of range");
  require(j >= 0 && j < cb.blocks, "block index out of range");
  require(static_cast<int>(x.size()) == cb.n, "sequence length must equal the block length");
  return keyed_hash(cb.key, 'V', cb.sensor_id, c, j, x) % cb.bin_count(j);
}

BinIndexChain composite_encode(const BinningCodebook& cb, const Sequence& x, int c, int count) {
  require(count >= 1 && count <= cb.blocks, "chain length out of range");
  BinIndexChain chain;
  chain.c = c;
  for (int j = 0; j < count; ++j) chain.indices.push_back(encode_block(cb, x, c, j));
  return chain;
}

std::vector<Sequence> search_bin(const BinningCodebook& cb, const BinIndexChain& chain,
                                 std::span<const Sequence> candidates) {
  std::vector<Sequence> out;
  for (const auto& x : candidates) {
    bool match = true;
    for (std::size_t j = 0; j < chain.indices.size() && match; ++j)
      match = encode_block(cb, x, chain.c, static_cast<int>(j)) == chain.indices[j];
    if (match) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --------------------------------------------------------------- fixed rate

FixedRateKey FixedRateKey::from_seed(std::uint64_t seed) {
  FixedRateKey k;
  k.key = key_from(seed, "fixed-rate-bins");
  return k;
}

BinIndex fixed_rate_bin_count(int n, double rate) {
  require(rate >= 0.0, "rates must be nonnegative");
  return bin_count_for_bits(n * rate);
}

BinIndex fixed_rate_encode(const FixedRateKey& key, int sensor_id, const Sequence& x, int alphabet_size,
                           double rate, std::optional<int> c) {
  const int n = static_cast<int>(x.size());
  require(n >= 1, "sequence must be nonempty");
  const BinIndex count = fixed_rate_bin_count(n, rate);
  if (count == 1) return 0;
  const int cc = c.value_or(0);
  require(cc >= 0, "subcodebook index must be nonnegative");
  const double space_bits = n * std::log2(static_cast<double>(alphabet_size));
  if (space_bits <= 63.0) {
    const SequenceSpace space(alphabet_size, n);
    if (count >= space.size()) {
      const std::uint64_t size = space.size();
      const BinIndex h = keyed_hash(key.key, 'P', sensor_id, cc, 0, Sequence{});
      std::uint64_t mult = static_cast<std::uint64_t>(h) | 1u;
      const std::uint64_t shift = static_cast<std::uint64_t>(h >> 64);
      if (size > 1) {
        mult %= size;
        if (mult == 0) mult = 1;
        while (std::gcd(mult, size) != 1) mult = (mult + 1) % size;
      }
      const BinIndex r = space.rank(x);
      return (static_cast<BinIndex>(mult) * r + shift) % size;
    }
  }
  return keyed_hash(key.key, 'F', sensor_id, cc, 0, x) % count;
}

BinIndex fixed_rate_encode(std::uint64_t seed, int sensor_id, const Sequence& x, int alphabet_size, double rate,
                           std::optional<int> c) {
  return fixed_rate_encode(FixedRateKey::from_seed(seed), sensor_id, x, alphabet_size, rate, c);
}

}  // namespace bdsc
