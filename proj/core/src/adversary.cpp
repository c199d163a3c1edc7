#include "bdsc/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bdsc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw precondition_error(what);
}

BinIndex random_below(Rng& rng, BinIndex count) {
  if (count <= 1) return 0;
  if ((count >> 64) == 0) return rng.below(static_cast<std::uint64_t>(count));
  while (true) {
    const BinIndex v = (static_cast<BinIndex>(rng.next()) << 64) | rng.next();
    const BinIndex limit = ~static_cast<BinIndex>(0) - (~static_cast<BinIndex>(0) % count);
    if (v < limit) return v % count;
  }
}

double log_likelihood(const std::vector<const Sequence*>& rows, const JointPMF& law) {
  const int n = static_cast<int>(rows.front()->size());
  double ll = 0.0;
  for (int t = 0; t < n; ++t) {
    std::size_t cell = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) cell = cell * law.alphabet_sizes()[k] + (*rows[k])[t];
    const double v = law[cell];
    if (v <= 0.0) return -std::numeric_limits<double>::infinity();
    ll += std::log2(v);
  }
  return ll;
}

}  // namespace

const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::honest_passthrough:
      return "honest_passthrough";
    case StrategyKind::black_hole:
      return "black_hole";
    case StrategyKind::fake_distribution:
      return "fake_distribution";
    case StrategyKind::fixed_rate_ambiguity:
      return "fixed_rate_ambiguity";
  }
  return "?";
}

StrategyKind parse_strategy_kind(const std::string& s) {
  if (s == "honest_passthrough") return StrategyKind::honest_passthrough;
  if (s == "black_hole") return StrategyKind::black_hole;
  if (s == "fake_distribution") return StrategyKind::fake_distribution;
  if (s == "fixed_rate_ambiguity") return StrategyKind::fixed_rate_ambiguity;
  throw precondition_error("unknown strategy kind: " + s);
}

// ----------------------------------------------------------- TraitorContext

TraitorContext::TraitorContext(SubsetView traitors, const JointPMF& p, const ConditionalPMF& channel,
                               const SideInfoBlock& w, const SourceBlock& block, std::uint64_t seed, int round)
    : traitors_(traitors), p_(&p), channel_(&channel), w_(&w), seed_(seed), round_(round) {
  require(traitors.within(p.m()), "traitor set exceeds number of sensors");
  require(static_cast<int>(w.w.size()) == block.n, "side information length must match the block");
  own_.resize(p.m());
  for (int i : traitors.indices()) own_[i] = block.rows[i];
}

const Sequence& TraitorContext::own_observation(int sensor) const {
  require(traitors_.contains(sensor), "only traitor observations are visible to the adversary");
  return own_[sensor];
}

std::vector<Sequence> TraitorContext::recover_from_side_info(SubsetView a) const {
  require(!a.empty(), "recovery set must be nonempty");
  require(entropy_given_side_info(*p_, *channel_, a) < kTol, "X_A is not a function of the side information");
  const auto proj = p_->shape().projection(a);
  const Shape sa = p_->shape().sub(a);
  const int nw = channel_->output_size();
  std::vector<double> joint(static_cast<std::size_t>(nw) * sa.total(), 0.0);
  for (std::size_t x = 0; x < p_->size(); ++x)
    for (int w = 0; w < nw; ++w) joint[static_cast<std::size_t>(w) * sa.total() + proj[x]] += (*p_)[x] * (*channel_)(x, w);
  std::vector<std::size_t> best(nw, 0);
  for (int w = 0; w < nw; ++w) {
    const double* row = joint.data() + static_cast<std::size_t>(w) * sa.total();
    best[w] = static_cast<std::size_t>(std::max_element(row, row + sa.total()) - row);
  }
  const auto idx = a.indices();
  std::vector<Sequence> out(idx.size(), Sequence(n(), 0));
  std::vector<int> digits(idx.size());
  for (int t = 0; t < n(); ++t) {
    sa.decode(best[w_->w[t]], digits);
    for (std::size_t k = 0; k < idx.size(); ++k) out[k][t] = static_cast<Symbol>(digits[k]);
  }
  return out;
}

std::vector<Sequence> fabricate_block(const TraitorContext& ctx, const ConditionalPMF& q_bar, std::uint64_t seed) {
  const SubsetView t = ctx.traitors();
  const Shape st = ctx.source_law().shape().sub(t);
  require(q_bar.input_total() == static_cast<std::size_t>(ctx.side_info().alphabet),
          "qbar input alphabet must be the side-information alphabet");
  require(static_cast<std::size_t>(q_bar.output_size()) == st.total(), "qbar output alphabet must be X_T");
  const int n = ctx.n();
  std::vector<Sequence> out(t.size(), Sequence(n, 0));
  Rng rng(seed);
  std::vector<int> digits(t.size());
  for (int s = 0; s < n; ++s) {
    const std::size_t xt = rng.pick(q_bar.row(ctx.side_info().w[s]));
    st.decode(xt, digits);
    for (int k = 0; k < t.size(); ++k) out[k][s] = static_cast<Symbol>(digits[k]);
  }
  return out;
}

ConditionalPMF optimal_q_bar(const JointPMF& p, const HonestCollection& h, const InfoModel& info, SubsetView h_true,
                             const ConditionalPMF& r, std::uint64_t seed) {
  require(!h_true.complement(p.m()).empty(), "no traitors to simulate for");
  GeneralOptions opt;
  opt.seed = seed;
  auto res = r_star_general(p, h, info, h_true, r, opt);
  require(res.q_bar.has_value(), "region optimizer returned no traitor simulation");
  return *res.q_bar;
}

// ------------------------------------------------------ variable-rate traitor

VariableRateTraitor::VariableRateTraitor(Strategy strategy, const std::vector<BinningCodebook>& codebooks)
    : strategy_(std::move(strategy)), codebooks_(&codebooks) {
  if (strategy_.kind == StrategyKind::fake_distribution)
    require(strategy_.q_bar.has_value(), "fake_distribution needs a qbar table");
  require(strategy_.kind != StrategyKind::fixed_rate_ambiguity,
          "the ambiguity attack applies to fixed-rate codes only");
}

void VariableRateTraitor::begin_round(const TraitorContext& ctx) {
  const int m = static_cast<int>(codebooks_->size());
  reported_.assign(m, Sequence{});
  chosen_c_.assign(m, -1);
  const auto idx = ctx.traitors().indices();
  if (strategy_.kind == StrategyKind::honest_passthrough) {
    for (int i : idx) reported_[i] = ctx.own_observation(i);
  } else if (strategy_.kind == StrategyKind::fake_distribution && !idx.empty()) {
    auto fake = fabricate_block(ctx, *strategy_.q_bar,
                                derive_seed(ctx.seed(), "traitor-fabricate", static_cast<std::uint64_t>(ctx.round())));
    for (std::size_t k = 0; k < idx.size(); ++k) reported_[idx[k]] = std::move(fake[k]);
  }
}

const Sequence* VariableRateTraitor::reported_sequence(int sensor) const {
  if (sensor < 0 || sensor >= static_cast<int>(reported_.size()) || reported_[sensor].empty()) return nullptr;
  return &reported_[sensor];
}

VariableRateReply VariableRateTraitor::respond(TraitorContext& ctx, int sensor, int j) {
  require(ctx.traitors().contains(sensor), "polled sensor is not a traitor");
  const auto& cb = (*codebooks_)[sensor];
  ctx.record_poll(sensor, j);
  VariableRateReply reply;
  if (strategy_.kind == StrategyKind::black_hole) {
    Rng rng(derive_seed(ctx.seed(), "traitor-noise", static_cast<std::uint64_t>(ctx.round()),
                        static_cast<std::uint64_t>(sensor), static_cast<std::uint64_t>(j)));
    if (chosen_c_[sensor] < 0) chosen_c_[sensor] = static_cast<int>(rng.below(cb.subcodebooks));
    reply.c = chosen_c_[sensor];
    reply.index = random_below(rng, cb.bin_count(j));
    return reply;
  }
  // Honest-looking behavior: same subcodebook draw an honest sensor would make.
  if (chosen_c_[sensor] < 0) {
    Rng rho(derive_seed(ctx.seed(), "rho", static_cast<std::uint64_t>(ctx.round()), static_cast<std::uint64_t>(sensor)));
    chosen_c_[sensor] = static_cast<int>(rho.below(cb.subcodebooks));
  }
  reply.c = chosen_c_[sensor];
  reply.index = encode_block(cb, reported_[sensor], reply.c, j);
  return reply;
}

// --------------------------------------------------------- fixed-rate traitor

FixedRateMessage fixed_rate_traitor_message(const TraitorContext& ctx, const Strategy& strategy,
                                            const FixedRateCode& code, int sensor,
                                            const std::vector<Sequence>& fabricated) {
  require(ctx.traitors().contains(sensor), "sensor is not a traitor");
  const int cc = code.effective_subcodebooks();
  FixedRateMessage msg;
  if (strategy.kind == StrategyKind::black_hole) {
    Rng rng(derive_seed(ctx.seed(), "traitor-noise", static_cast<std::uint64_t>(ctx.round()),
                        static_cast<std::uint64_t>(sensor)));
    msg.c = static_cast<int>(rng.below(cc));
    msg.index = random_below(rng, fixed_rate_bin_count(code.n, code.rates[sensor]));
    return msg;
  }
  Rng rho(derive_seed(ctx.seed(), "rho", static_cast<std::uint64_t>(ctx.round()), static_cast<std::uint64_t>(sensor)));
  msg.c = code.kind == FixedRateKind::randomized ? static_cast<int>(rho.below(cc)) : 0;
  const Sequence* x = &ctx.own_observation(sensor);
  if (strategy.kind == StrategyKind::fake_distribution) x = &fabricated[ctx.traitors().rank_of(sensor)];
  msg.index = fixed_rate_encode(FixedRateKey::from_seed(code.seed), sensor, *x, code.alphabet_sizes[sensor],
                                code.rates[sensor], msg.c);
  return msg;
}

// --------------------------------------------------------- ambiguity attack

AmbiguityOutcome fixed_rate_ambiguity_attack(
    const TraitorContext& ctx, SubsetView s1, SubsetView h_true, const FixedRateCode& code,
    const std::function<bool(const std::vector<std::pair<int, FixedRateMessage>>&)>& accept) {
  const SubsetView a = s1.intersect(h_true);
  const SubsetView b = s1.minus(h_true);
  require(!a.empty(), "target set must share an honest sensor with the actual honest set");
  require(b.subset_of(ctx.traitors()), "sensors outside the honest set must be traitors");
  const JointPMF& p = ctx.source_law();
  const auto truth = ctx.recover_from_side_info(a);
  const auto a_idx = a.indices();
  const auto b_idx = b.indices();
  const int n = ctx.n();

  double b_bits = 0.0;
  for (int i : b_idx) b_bits += n * std::log2(static_cast<double>(code.alphabet_sizes[i]));
  require(b_bits <= kSearchBitsLimit + 1e-9, "companion search space exceeds 2^22 sequences");

  // Sequences sharing each honest sensor's bin.
  std::vector<std::vector<std::uint64_t>> lists;
  std::vector<SequenceSpace> spaces;
  for (std::size_t k = 0; k < a_idx.size(); ++k) {
    BinTable table(code, a_idx[k], 0);
    spaces.push_back(table.space());
    lists.push_back(table.members(table.bin_of_rank(table.space().rank(truth[k]))));
  }

  const JointPMF pa = marginal(p, a);
  const JointPMF ps1 = marginal(p, s1);
  struct Candidate {
    double ll;
    std::vector<Sequence> rows;
  };
  std::vector<Candidate> confusable;
  std::vector<std::size_t> pos(lists.size(), 0);
  while (true) {
    std::vector<Sequence> rows(a_idx.size());
    bool is_truth = true;
    for (std::size_t k = 0; k < lists.size(); ++k) {
      spaces[k].at(lists[k][pos[k]], rows[k]);
      is_truth = is_truth && rows[k] == truth[k];
    }
    if (!is_truth) {
      std::vector<const Sequence*> ptrs;
      for (auto& r : rows) ptrs.push_back(&r);
      if (strongly_typical(std::span<const Sequence* const>(ptrs), pa, code.typicality_eps))
        confusable.push_back({log_likelihood(ptrs, pa), std::move(rows)});
    }
    std::size_t k = 0;
    while (k < lists.size() && ++pos[k] == lists[k].size()) pos[k++] = 0;
    if (k == lists.size()) break;
    if (confusable.size() >= 4096) break;
  }
  std::stable_sort(confusable.begin(), confusable.end(), [](const Candidate& x, const Candidate& y) { return x.ll > y.ll; });

  AmbiguityOutcome out;
  if (confusable.empty()) return out;

  // Companion rows for the traitors in S1; all traitor sensors outside S1 report honestly.
  std::uint64_t companion_space = 1;
  for (int i : b_idx) companion_space *= SequenceSpace(code.alphabet_sizes[i], n).size();
  const FixedRateKey key = FixedRateKey::from_seed(code.seed);
  constexpr std::size_t kConfusableTries = 32;
  constexpr std::size_t kCompanionTries = 16;

  for (std::size_t ci = 0; ci < std::min(confusable.size(), kConfusableTries); ++ci) {
    const auto& cand = confusable[ci];
    std::vector<Candidate> companions;
    std::vector<Sequence> brows(b_idx.size());
    for (std::uint64_t r = 0; r < companion_space; ++r) {
      std::uint64_t rest = r;
      for (std::size_t k = b_idx.size(); k-- > 0;) {
        const SequenceSpace sp(code.alphabet_sizes[b_idx[k]], n);
        sp.at(rest % sp.size(), brows[k]);
        rest /= sp.size();
      }
      // Rows of S1 in ascending sensor order.
      std::vector<const Sequence*> ptrs;
      for (int i : s1.indices())
        ptrs.push_back(a.contains(i) ? &cand.rows[a.rank_of(i)] : &brows[b.rank_of(i)]);
      if (!strongly_typical(std::span<const Sequence* const>(ptrs), ps1, code.typicality_eps)) continue;
      companions.push_back({log_likelihood(ptrs, ps1), brows});
    }
    std::stable_sort(companions.begin(), companions.end(),
                     [](const Candidate& x, const Candidate& y) { return x.ll > y.ll; });
    for (std::size_t k = 0; k < std::min(companions.size(), kCompanionTries); ++k) {
      std::vector<std::pair<int, FixedRateMessage>> msgs;
      for (int i : ctx.traitors().indices()) {
        FixedRateMessage msg;
        const Sequence& x = b.contains(i) ? companions[k].rows[b.rank_of(i)] : ctx.own_observation(i);
        msg.index = fixed_rate_encode(key, i, x, code.alphabet_sizes[i], code.rates[i], 0);
        msgs.emplace_back(i, msg);
      }
      if (!accept || accept(msgs)) {
        out.found = true;
        out.confusable = cand.rows;
        out.companion = companions[k].rows;
        out.messages = std::move(msgs);
        return out;
      }
    }
  }
  return out;
}

}  // namespace bdsc
