#include "bdsc/fixed_rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bdsc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw precondition_error(what);
}

// Position of s in the arbitration order: larger sets first, then lexicographic.
bool preferred(SubsetView a, SubsetView b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return lex_less(a, b);
}

}  // namespace

// ---------------------------------------------------------------- code/table

void FixedRateCode::validate() const {
  require(!alphabet_sizes.empty() && alphabet_sizes.size() <= 32, "code needs 1..32 sensors");
  require(rates.size() == alphabet_sizes.size(), "one rate per sensor");
  for (double r : rates) require(r >= 0.0 && std::isfinite(r), "rates must be finite and nonnegative");
  for (int q : alphabet_sizes) require(q >= 1 && q <= 256, "alphabet size must lie in 1..256");
  require(n >= 1, "block length must be positive");
  if (kind == FixedRateKind::randomized) require(subcodebooks >= 1, "randomized codes need C >= 1");
  require(typicality_eps > 0.0, "typicality eps must be positive");
}

BinTable::BinTable(const FixedRateCode& code, int sensor, int c)
    : sensor_(sensor), c_(c), space_(code.alphabet_sizes.at(sensor), code.n) {
  space_.require_searchable();
  const FixedRateKey key = FixedRateKey::from_seed(code.seed);
  bin_.resize(space_.size());
  sorted_.resize(space_.size());
  Sequence x;
  for (std::uint64_t r = 0; r < space_.size(); ++r) {
    space_.at(r, x);
    bin_[r] = fixed_rate_encode(key, sensor, x, space_.alphabet_size(), code.rates[sensor], c);
    sorted_[r] = {bin_[r], r};
  }
  std::sort(sorted_.begin(), sorted_.end());
}

std::vector<std::uint64_t> BinTable::members(BinIndex bin) const {
  auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(bin, std::uint64_t{0}));
  std::vector<std::uint64_t> out;
  for (; lo != sorted_.end() && lo->first == bin; ++lo) out.push_back(lo->second);
  return out;
}

// ------------------------------------------------------------------ encoding

FixedRateMessage honest_fixed_rate_message(const FixedRateCode& code, const FixedRateKey& key, int sensor,
                                           const Sequence& x, std::uint64_t seed, int round) {
  FixedRateMessage msg;
  if (code.kind == FixedRateKind::randomized) {
    Rng rho(derive_seed(seed, "rho", static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(sensor)));
    msg.c = static_cast<int>(rho.below(code.effective_subcodebooks()));
  }
  msg.index = fixed_rate_encode(key, sensor, x, code.alphabet_sizes[sensor], code.rates[sensor], msg.c);
  return msg;
}

std::vector<FixedRateMessage> encode_all(const FixedRateCode& code, const SourceBlock& block, SubsetView honest,
                                         std::uint64_t seed, int round,
                                         const std::function<FixedRateMessage(int)>& traitor_message) {
  require(block.m() == code.m(), "block and code disagree on the number of sensors");
  require(block.n == code.n, "block length must equal the code length");
  const FixedRateKey key = FixedRateKey::from_seed(code.seed);
  std::vector<FixedRateMessage> out(code.m());
  for (int i = 0; i < code.m(); ++i) {
    if (honest.contains(i)) {
      out[i] = honest_fixed_rate_message(code, key, i, block.rows[i], seed, round);
    } else {
      require(static_cast<bool>(traitor_message), "traitor messages requested but no strategy given");
      out[i] = traitor_message(i);
    }
  }
  return out;
}

// ------------------------------------------------------------------ decoding

FixedRateDecoder::FixedRateDecoder(FixedRateCode code, JointPMF p, HonestCollection h)
    : code_(std::move(code)), p_(std::move(p)), h_(std::move(h)) {
  code_.validate();
  h_.validate();
  require(p_.alphabet_sizes() == code_.alphabet_sizes, "code alphabets must match the source law");
  require(h_.m == code_.m(), "collection and code disagree on the number of sensors");
  key_ = FixedRateKey::from_seed(code_.seed);
}

const BinTable& FixedRateDecoder::table(int sensor, int c) const {
  auto& slot = tables_[{sensor, c}];
  if (!slot) slot = std::make_unique<BinTable>(code_, sensor, c);
  return *slot;
}

std::optional<FixedRateDecoder::SetEstimate> FixedRateDecoder::decode_set(
    SubsetView s, std::span<const FixedRateMessage> messages) const {
  const auto idx = s.indices();
  const int k_total = static_cast<int>(idx.size());
  const int n = code_.n;
  const double eps = code_.typicality_eps;

  // Prefix marginals: a tuple typical on S is typical on each prefix with the same eps, since
  // the per-cell tolerance eps/|X_S| sums to eps/|X_prefix| over the remaining coordinates.
  std::vector<std::vector<double>> laws;
  std::vector<std::size_t> prefix_size;
  {
    std::uint32_t mask = 0;
    std::size_t size = 1;
    for (int i : idx) {
      mask |= 1u << i;
      size *= static_cast<std::size_t>(code_.alphabet_sizes[i]);
      laws.push_back(marginal_table(p_, SubsetView::from_mask(mask)));
      prefix_size.push_back(size);
    }
  }

  std::vector<std::vector<std::uint64_t>> lists(k_total);
  std::vector<const BinTable*> tables(k_total);
  for (int k = 0; k < k_total; ++k) {
    const int i = idx[k];
    const FixedRateMessage& msg = messages[i];
    if (msg.c < 0 || msg.c >= code_.effective_subcodebooks()) return std::nullopt;
    tables[k] = &table(i, msg.c);
    lists[k] = tables[k]->members(msg.index);
    if (lists[k].empty()) return std::nullopt;
  }

  // Depth-first search over the product of bin members with typicality pruning.
  std::vector<std::vector<std::uint32_t>> cells(k_total + 1, std::vector<std::uint32_t>(n, 0));
  std::vector<std::vector<int>> counts(k_total);
  for (int k = 0; k < k_total; ++k) counts[k].assign(prefix_size[k], 0);
  std::vector<Sequence> current(k_total);
  std::vector<std::size_t> pos(k_total, 0);

  std::optional<SetEstimate> best;
  double best_ll = -std::numeric_limits<double>::infinity();
  const bool by_likelihood = code_.tie_break == TieBreak::likelihood;

  auto typical_prefix = [&](int k) {
    const int q = code_.alphabet_sizes[idx[k]];
    auto& cnt = counts[k];
    std::fill(cnt.begin(), cnt.end(), 0);
    for (int t = 0; t < n; ++t) {
      cells[k + 1][t] = cells[k][t] * q + current[k][t];
      ++cnt[cells[k + 1][t]];
    }
    const double tol = eps / static_cast<double>(prefix_size[k]) + 1e-12;
    for (std::size_t x = 0; x < cnt.size(); ++x)
      if (std::abs(laws[k][x] - static_cast<double>(cnt[x]) / n) > tol) return false;
    return true;
  };

  int k = 0;
  pos[0] = 0;
  while (k >= 0) {
    if (pos[k] >= lists[k].size()) {
      --k;
      if (k >= 0) ++pos[k];
      continue;
    }
    tables[k]->space().at(lists[k][pos[k]], current[k]);
    if (!typical_prefix(k)) {
      ++pos[k];
      continue;
    }
    if (k + 1 < k_total) {
      ++k;
      pos[k] = 0;
      continue;
    }
    auto divergence = [&] {
      double d = 0.0;
      for (std::size_t x = 0; x < counts[k].size(); ++x) {
        if (counts[k][x] == 0) continue;
        const double t = static_cast<double>(counts[k][x]) / n;
        d += laws[k][x] > 0.0 ? t * std::log2(t / laws[k][x]) : std::numeric_limits<double>::infinity();
      }
      return d;
    };
    if (!by_likelihood) return SetEstimate{current, divergence()};
    double ll = 0.0;
    for (int t = 0; t < n; ++t) ll += std::log2(std::max(laws[k][cells[k + 1][t]], 1e-300));
    if (ll > best_ll) {
      best_ll = ll;
      best = SetEstimate{current, divergence()};
    }
    ++pos[k];
  }
  return best;
}

EstimateTable FixedRateDecoder::decode(std::span<const FixedRateMessage> messages) const {
  require(static_cast<int>(messages.size()) == code_.m(), "one message per sensor");
  const int m = code_.m();
  EstimateTable out;
  out.sets = h_.candidates;
  out.per_set.assign(out.sets.size(), std::vector<std::optional<Sequence>>(m));
  out.divergence.assign(out.sets.size(), std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < out.sets.size(); ++s) {
    auto est = decode_set(out.sets[s], messages);
    if (!est) continue;
    out.divergence[s] = est->divergence;
    const auto idx = out.sets[s].indices();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const int i = idx[k];
      const BinTable& t = table(i, messages[i].c);
      if (t.bin_of_rank(t.space().rank(est->rows[k])) != messages[i].index)
        throw std::logic_error("decoded sequence is not in its received bin");
      out.per_set[s][i] = std::move(est->rows[k]);
    }
  }

  out.final_estimate.assign(m, std::nullopt);
  out.chosen_set.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    std::vector<int> cands;
    for (std::size_t s = 0; s < out.sets.size(); ++s)
      if (out.per_set[s][i]) cands.push_back(static_cast<int>(s));
    if (cands.empty()) continue;
    std::sort(cands.begin(), cands.end(), [&](int a, int b) { return preferred(out.sets[a], out.sets[b]); });
    if (code_.arbitration == Arbitration::divergence)
      std::stable_sort(cands.begin(), cands.end(),
                       [&](int a, int b) { return out.divergence[a] < out.divergence[b] - 1e-12; });
    for (int s : cands)
      if (*out.per_set[s][i] != *out.per_set[cands.front()][i]) {
        ++out.disagreements;
        break;
      }
    int chosen = cands.front();
    if (code_.plurality) {
      int top = 0;
      for (int s : cands) top = std::max(top, out.sets[s].size());
      int best_votes = 0;
      for (int s : cands) {
        if (out.sets[s].size() != top) continue;
        int votes = 0;
        for (int o : cands)
          if (out.sets[o].size() == top && *out.per_set[o][i] == *out.per_set[s][i]) ++votes;
        if (votes > best_votes) {
          best_votes = votes;
          chosen = s;
        }
      }
    }
    out.chosen_set[i] = chosen;
    out.final_estimate[i] = out.per_set[chosen][i];
  }
  return out;
}

EstimateTable decode_all(const FixedRateCode& code, std::span<const FixedRateMessage> messages, const JointPMF& p,
                         const HonestCollection& h) {
  return FixedRateDecoder(code, p, h).decode(messages);
}

bool honest_error(const EstimateTable& table, const SourceBlock& block, SubsetView h_true) {
  for (int i : h_true.indices())
    if (!table.final_estimate[i] || *table.final_estimate[i] != block.rows[i]) return true;
  return false;
}

// ------------------------------------------------------------------ converse

ConverseOutcome demonstrate_converse(const FixedRateDecoder& decoder, const JointPMF& p, const HonestCollection& h,
                                     std::uint64_t seed, int round) {
  const FixedRateCode& code = decoder.code();
  require(code.kind == FixedRateKind::deterministic, "the converse demonstration needs a deterministic code");
  const int m = code.m();

  ConverseOutcome out;
  bool picked = false;
  for (SubsetView ht : h.candidates) {
    for (SubsetView s1 : h.candidates) {
      if (s1 == ht || !preferred(s1, ht)) continue;
      if (s1.intersect(ht).empty()) continue;
      // Injective bins on every shared sensor leave nothing to confuse.
      bool confusable = false;
      for (int i : s1.intersect(ht).indices())
        confusable = confusable || code.rates[i] < std::log2(static_cast<double>(code.alphabet_sizes[i]));
      if (!confusable) continue;
      double b_bits = 0.0;
      for (int i : s1.minus(ht).indices()) b_bits += code.n * std::log2(static_cast<double>(code.alphabet_sizes[i]));
      if (b_bits > kSearchBitsLimit + 1e-9) continue;
      out.h_true = ht;
      out.s1 = s1;
      picked = true;
      break;
    }
    if (picked) break;
  }
  if (!picked) {
    // No traitors can matter: every sensor honest.
    out.h_true = SubsetView::full(m);
    out.s1 = out.h_true;
  }

  const SourceBlock block = sample_block(p, code.n, derive_seed(seed, "source", static_cast<std::uint64_t>(round)));
  const FixedRateKey key = FixedRateKey::from_seed(code.seed);
  const SubsetView traitors = out.h_true.complement(m);
  std::vector<FixedRateMessage> honest_msgs(m);
  for (int i = 0; i < m; ++i) honest_msgs[i] = honest_fixed_rate_message(code, key, i, block.rows[i], seed, round);

  if (!traitors.empty()) {
    const ConditionalPMF channel = ConditionalPMF::identity(p.alphabet_sizes());
    SideInfoBlock w;
    w.alphabet = static_cast<int>(p.size());
    for (int t = 0; t < block.n; ++t) w.w.push_back(static_cast<std::uint32_t>(block.joint_cell(t)));
    const TraitorContext ctx(traitors, p, channel, w, block, seed, round);
    auto accept = [&](const std::vector<std::pair<int, FixedRateMessage>>& msgs) {
      auto all = honest_msgs;
      for (const auto& [i, msg] : msgs) all[i] = msg;
      return honest_error(decoder.decode(all), block, out.h_true);
    };
    const AmbiguityOutcome attack = fixed_rate_ambiguity_attack(ctx, out.s1, out.h_true, code, accept);
    out.attack_found = attack.found;
    if (attack.found)
      for (const auto& [i, msg] : attack.messages) honest_msgs[i] = msg;
  }
  out.estimates = decoder.decode(honest_msgs);
  out.honest_error = honest_error(out.estimates, block, out.h_true);
  return out;
}

}  // namespace bdsc
