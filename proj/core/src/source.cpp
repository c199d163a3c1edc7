#include "bdsc/source.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>
#include <cstring>

namespace bdsc {

namespace {

void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

std::size_t inverse_cdf(std::span<const double> probs, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last_positive = k;
    if (u < acc) return k;
  }
  return last_positive;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t i, std::uint64_t j,
                          std::uint64_t k) {
  std::array<unsigned char, crypto_shorthash_siphash24_KEYBYTES> key{};
  for (int b = 0; b < 8; ++b) key[b] = static_cast<unsigned char>(master >> (8 * b));
  std::memcpy(key.data() + 8, "bdscseed", 8);
  std::vector<unsigned char> msg(label.begin(), label.end());
  msg.push_back(0);
  put_u64(msg, i);
  put_u64(msg, j);
  put_u64(msg, k);
  std::array<unsigned char, crypto_shorthash_siphash24_BYTES> out{};
  crypto_shorthash_siphash24(out.data(), msg.data(), msg.size(), key.data());
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(out[b]) << (8 * b);
  return v;
}

std::uint64_t Rng::below(std::uint64_t k) {
  if (k <= 1) return 0;
  const std::uint64_t threshold = (0 - k) % k;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x < threshold);
  return x % k;
}

std::size_t Rng::pick(std::span<const double> probs) { return inverse_cdf(probs, uniform01()); }

std::size_t SourceBlock::joint_cell(int t) const {
  std::size_t cell = 0;
  for (int i = 0; i < m(); ++i) cell = cell * alphabet_sizes[i] + rows[i][t];
  return cell;
}

SourceBlock sample_block(const JointPMF& p, int n, std::uint64_t seed) {
  if (n < 1) throw precondition_error("block length must be positive");
  SourceBlock block;
  block.n = n;
  block.alphabet_sizes = p.alphabet_sizes();
  block.rows.assign(p.m(), Sequence(n, 0));
  Rng rng(seed);
  std::vector<int> digits(p.m());
  for (int t = 0; t < n; ++t) {
    const std::size_t cell = rng.pick(p.mass());
    p.shape().decode(cell, digits);
    for (int i = 0; i < p.m(); ++i) block.rows[i][t] = static_cast<Symbol>(digits[i]);
  }
  return block;
}

SideInfoBlock sample_side_info(const ConditionalPMF& r, const SourceBlock& block, std::uint64_t seed) {
  if (r.input_shape().sizes() != block.alphabet_sizes)
    throw precondition_error("channel input alphabet must match the source block");
  SideInfoBlock out;
  out.alphabet = r.output_size();
  out.w.resize(block.n);
  Rng rng(seed);
  for (int t = 0; t < block.n; ++t) out.w[t] = static_cast<std::uint32_t>(rng.pick(r.row(block.joint_cell(t))));
  return out;
}

}  // namespace bdsc
