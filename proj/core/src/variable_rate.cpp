#include "bdsc/variable_rate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace bdsc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw precondition_error(what);
}

// Every sequence of one alphabet and length, generated once per thread.
const std::vector<Sequence>& all_sequences(int q, int n) {
  thread_local std::map<std::pair<int, int>, std::vector<Sequence>> cache;
  auto& v = cache[{q, n}];
  if (v.empty()) {
    const SequenceSpace space(q, n);
    space.require_searchable();
    v.resize(space.size());
    for (std::uint64_t r = 0; r < space.size(); ++r) space.at(r, v[r]);
  }
  return v;
}

double xlog2x(double c) { return c > 0.0 ? c * std::log2(c) : 0.0; }

}  // namespace

// ------------------------------------------------------------------ params

ProtocolParams ProtocolParams::resolved(const JointPMF& p, const HonestCollection& h, bool* c_capped) const {
  ProtocolParams out = *this;
  require(eps > 0.0 && n >= 1 && rounds >= 0 && alpha > 0.0 && alpha < 1.0, "protocol parameters out of range");
  if (!out.nu) out.nu = 5.5 * eps;
  const int m = p.m();
  double max_set = 1.0;
  double sum_sets = 0.0;
  for (SubsetView s : h.candidates) {
    const double size = static_cast<double>(p.shape().sub(s).total());
    max_set = std::max(max_set, size);
    sum_sets += size;
  }
  if (!out.eta) {
    // Per-cell deviation of every candidate marginal type, union-bounded over cells and rounds.
    const double tau = std::sqrt(std::log(2.0 * std::max(rounds, 1) * std::max(sum_sets, 1.0) / alpha) / (2.0 * n));
    out.eta = std::max(2.0 * eps, tau * max_set);
  }
  bool capped = false;
  if (!out.subcodebooks) {
    const double log_total = std::log2(static_cast<double>(p.size()));
    const int b = static_cast<int>(std::floor(log_total / (*out.nu - eps))) + 1;
    const double want = std::max(8.0, std::ceil(3.0 * std::max(rounds, 1) * m * b / alpha));
    const double cap = std::min(1024.0, std::exp2(std::floor(n * eps)));
    capped = want > cap;
    out.subcodebooks = static_cast<int>(std::max(1.0, std::min(want, cap)));
  }
  if (c_capped) *c_capped = capped;
  return out;
}

void ProtocolParams::validate() const {
  require(nu && eta && subcodebooks, "protocol parameters must be resolved");
  require(n >= 1, "block length must be positive");
  require(rounds >= 0, "round count must be nonnegative");
  require(eps > 0.0, "eps must be positive");
  require(*nu > eps, "nu must exceed eps");
  require(*eta >= eps, "eta must be at least eps");
  require(*subcodebooks >= 1, "at least one subcodebook");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
}

void SessionSetup::validate() const {
  h.validate();
  require(h.m == p.m(), "collection and source disagree on the number of sensors");
  info.validate(h, p.alphabet_sizes());
  const int k = h.index_of(h_true);
  require(k >= 0, "actual honest set must belong to the collection");
  require(r.input_shape() == p.shape(), "side-information channel must take the source alphabet");
  if (!info.perfect_information) {
    bool found = false;
    for (const auto& rr : info.channels[k])
      if (rr.output_size() == r.output_size() && std::equal(rr.table().begin(), rr.table().end(), r.table().begin(),
                                                            [](double a, double b) { return std::abs(a - b) <= 1e-12; }))
        found = true;
    require(found, "actual channel must be one of the channels allowed for the actual honest set");
  }
  if (strategy.kind == StrategyKind::fake_distribution) {
    require(strategy.q_bar.has_value(), "fake_distribution needs a qbar table");
    require(strategy.q_bar->input_total() == static_cast<std::size_t>(r.output_size()),
            "qbar input alphabet must be the side-information alphabet");
  }
}

DecoderState DecoderState::initial(const HonestCollection& h) {
  DecoderState s;
  s.v = h.candidates;
  s.estimates.assign(h.m, std::nullopt);
  s.undecodable.assign(h.m, false);
  return s;
}

std::vector<BinningCodebook> make_codebooks(const std::vector<int>& alphabet_sizes, const ProtocolParams& params) {
  require(params.nu && params.subcodebooks, "protocol parameters must be resolved");
  const std::uint64_t key_seed = derive_seed(params.seed, "codebook");
  std::vector<BinningCodebook> out;
  for (std::size_t i = 0; i < alphabet_sizes.size(); ++i)
    out.push_back(BinningCodebook::make(static_cast<int>(i), alphabet_sizes[i], params.n, params.eps, *params.nu,
                                        *params.subcodebooks, key_seed));
  return out;
}

// ------------------------------------------------------------------ V update

bool keeps_set(const EmpiricalType& t, SubsetView u, SubsetView s, const SessionSetup& setup, double eta) {
  const JointPMF& p = setup.p;
  if (setup.info.perfect_information) {
    // Q_S is {q : q(x_S) = p(x_S)}; within the box |q - t| <= eta/|X_u| the attainable values
    // of q(x_S) form an interval, so the test is exact.
    const Shape su = p.shape().sub(u);
    const double delta = eta / static_cast<double>(su.total());
    SubsetView s_in_u;
    {
      std::uint32_t mask = 0;
      const auto ui = u.indices();
      for (std::size_t k = 0; k < ui.size(); ++k)
        if (s.contains(ui[k])) mask |= 1u << k;
      s_in_u = SubsetView::from_mask(mask);
    }
    const auto proj = su.projection(s_in_u);
    const auto ps = marginal_table(p, s);
    std::vector<double> lo(ps.size(), 0.0), hi(ps.size(), 0.0);
    for (std::size_t x = 0; x < su.total(); ++x) {
      lo[proj[x]] += std::max(0.0, t.freq(x) - delta);
      hi[proj[x]] += std::min(1.0, t.freq(x) + delta);
    }
    for (std::size_t xs = 0; xs < ps.size(); ++xs)
      if (ps[xs] < lo[xs] - 1e-12 || ps[xs] > hi[xs] + 1e-12) return false;
    return true;
  }
  const int k = setup.h.index_of(s);
  for (const auto& r_prime : setup.info.channels[k]) {
    // An undecided verdict keeps the set: dropping it could remove the actual honest set.
    if (q_ball_feasible(t, u, eta, s, r_prime, p).status != Feasibility::infeasible) return true;
  }
  return false;
}

std::vector<SubsetView> update_v(const DecoderState& state, const SessionSetup& setup, const ProtocolParams& params,
                                 bool* empty) {
  const SubsetView u = union_of(state.v);
  std::uint32_t decoded_mask = 0;
  for (int i : u.indices())
    if (state.estimates[i]) decoded_mask |= 1u << i;
  const SubsetView decoded = SubsetView::from_mask(decoded_mask);

  std::vector<SubsetView> out;
  if (!decoded.empty()) {
    std::vector<const Sequence*> rows;
    std::vector<int> sizes;
    for (int i : decoded.indices()) {
      rows.push_back(&*state.estimates[i]);
      sizes.push_back(setup.p.alphabet_sizes()[i]);
    }
    const EmpiricalType t = type_of(std::span<const Sequence* const>(rows), sizes);
    for (SubsetView s : state.v)
      if (s.subset_of(decoded) && keeps_set(t, decoded, s, setup, *params.eta)) out.push_back(s);
  }
  if (empty) *empty = out.empty();
  if (out.empty()) return state.v;
  return out;
}

// ------------------------------------------------------------------ rounds

RoundRecord run_round(DecoderState& state, const SessionSetup& setup, const ProtocolParams& params,
                      const std::vector<BinningCodebook>& codebooks, VariableRateTraitor& traitor,
                      const SourceBlock& block, const SideInfoBlock& w) {
  const int m = setup.p.m();
  const int n = params.n;
  require(block.n == n && block.m() == m, "block does not match the protocol parameters");
  const SubsetView traitors = setup.h_true.complement(m);
  const SubsetView u = union_of(state.v);
  const int C = *params.subcodebooks;

  TraitorContext ctx(traitors, setup.p, setup.r, w, block, params.seed, state.round);
  traitor.begin_round(ctx);

  RoundRecord rec;
  rec.transactions.assign(m, 0);
  state.estimates.assign(m, std::nullopt);
  state.undecodable.assign(m, false);

  // Joint cell of the sensors decoded so far in this round.
  std::vector<std::uint32_t> cond(n, 0);
  std::size_t cond_size = 1;

  int phase = 0;
  for (int i : u.indices()) {
    const auto& cb = codebooks[i];
    const int q = setup.p.alphabet_sizes()[i];
    const auto& space = all_sequences(q, n);

    // Shell of each candidate: the first transaction count j with H(x | decoded) <= j eps.
    std::vector<std::vector<std::uint32_t>> shells(cb.blocks + 1);
    {
      std::vector<int> joint(cond_size * q);
      std::vector<int> marg(cond_size);
      std::fill(marg.begin(), marg.end(), 0);
      for (int t = 0; t < n; ++t) ++marg[cond[t]];
      double h_cond_part = 0.0;
      for (int c : marg) h_cond_part += xlog2x(c);
      for (std::size_t r = 0; r < space.size(); ++r) {
        std::fill(joint.begin(), joint.end(), 0);
        for (int t = 0; t < n; ++t) ++joint[cond[t] * q + space[r][t]];
        double hj = 0.0;
        for (int c : joint) hj -= xlog2x(c);
        const double h = std::max(0.0, (hj + h_cond_part) / n);
        int j = std::max(1, static_cast<int>(std::ceil(h / params.eps - 1e-9)));
        j = std::min(j, cb.blocks);
        shells[j].push_back(static_cast<std::uint32_t>(r));
      }
    }

    const bool honest = !traitors.contains(i);
    int c_sent = 0;
    if (honest) {
      Rng rho(derive_seed(params.seed, "rho", static_cast<std::uint64_t>(state.round), static_cast<std::uint64_t>(i)));
      c_sent = static_cast<int>(rho.below(C));
    }
    std::vector<BinIndex> received;
    std::optional<std::uint32_t> found;
    for (int j = 0; j < cb.blocks && !found; ++j) {
      BinIndex index = 0;
      if (honest) {
        index = encode_block(cb, block.rows[i], c_sent, j);
      } else {
        const VariableRateReply reply = traitor.respond(ctx, i, j);
        if (j == 0) c_sent = reply.c;
        index = reply.index;
      }
      received.push_back(index);
      double bits = cb.block_bits(j);
      if (j == 0) bits += std::log2(static_cast<double>(C));
      rec.bits += bits;
      state.transcript.push_back({state.round, phase, i, c_sent, j, index, bits});
      ++rec.transactions[i];
      if (c_sent < 0 || c_sent >= C) continue;
      for (std::uint32_t r : shells[j + 1]) {
        bool match = true;
        for (int b = 0; b <= j && match; ++b) match = encode_block(cb, space[r], c_sent, b) == received[b];
        if (match) {
          found = r;  // shells hold ascending ranks, so this is the lexicographically least
          break;
        }
      }
    }
    if (rec.transactions[i] > cb.blocks) throw std::logic_error("phase exceeded its transaction bound");
    if (found) {
      state.estimates[i] = space[*found];
      for (int t = 0; t < n; ++t) cond[t] = static_cast<std::uint32_t>(cond[t] * q + space[*found][t]);
      cond_size *= q;
    } else {
      state.undecodable[i] = true;
    }
    ++phase;
  }

  for (int i : setup.h_true.indices())
    if (!state.estimates[i] || *state.estimates[i] != block.rows[i]) rec.honest_error = true;

  state.total_bits += rec.bits;
  state.v = update_v(state, setup, params, &rec.v_empty);
  rec.v_after = state.v;
  return rec;
}

SessionReport run_session(const SessionSetup& setup, const ProtocolParams& params_in) {
  setup.validate();
  SessionReport rep;
  rep.params = params_in.resolved(setup.p, setup.h, &rep.c_capped);
  const ProtocolParams& params = rep.params;
  params.validate();
  const int m = setup.p.m();
  for (int q : setup.p.alphabet_sizes()) SequenceSpace(q, params.n).require_searchable();

  if (setup.rate_bound) {
    rep.rate_bound = *setup.rate_bound;
  } else {
    GeneralOptions opt;
    opt.seed = derive_seed(params.seed, "rate-bound");
    rep.rate_bound = r_star_general(setup.p, setup.h, setup.info, setup.h_true, setup.r, opt).value;
  }

  const auto codebooks = make_codebooks(setup.p.alphabet_sizes(), params);
  {
    int j_max = 1;
    double min_rate = std::numeric_limits<double>::infinity();
    for (const auto& cb : codebooks) {
      j_max = std::max(j_max, cb.blocks);
      for (int j = 0; j < cb.blocks; ++j) min_rate = std::min(min_rate, cb.block_bits(j) / params.n);
    }
    rep.feedback_ratio = std::log2(static_cast<double>(*params.subcodebooks) * j_max) / (params.n * min_rate);
  }

  VariableRateTraitor traitor(setup.strategy, codebooks);
  DecoderState state = DecoderState::initial(setup.h);
  rep.v_trajectory.push_back(state.v);
  const double slack = m * (2.0 * params.eps + *params.nu);
  for (int round = 0; round < params.rounds; ++round) {
    state.round = round;
    const SourceBlock block =
        sample_block(setup.p, params.n, derive_seed(params.seed, "source", static_cast<std::uint64_t>(round)));
    const SideInfoBlock w =
        sample_side_info(setup.r, block, derive_seed(params.seed, "side-info", static_cast<std::uint64_t>(round)));
    RoundRecord rec = run_round(state, setup, params, codebooks, traitor, block, w);
    rec.over_budget = rec.bits / params.n > rep.rate_bound + slack + 1e-9;
    rep.over_budget_rounds += rec.over_budget ? 1 : 0;
    rep.v_empty_events += rec.v_empty ? 1 : 0;
    rep.honest_errors += rec.honest_error ? 1 : 0;
    rep.v_trajectory.push_back(state.v);
    rep.rounds.push_back(std::move(rec));
  }
  rep.total_bits = state.total_bits;
  rep.sum_rate = params.rounds > 0 ? rep.total_bits / (static_cast<double>(params.n) * params.rounds) : 0.0;
  rep.transcript = std::move(state.transcript);
  return rep;
}

std::string SessionReport::transcript_jsonl() const {
  std::string out;
  for (const auto& r : transcript) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["phase"] = r.phase;
    j["sensor"] = r.sensor;
    j["c"] = r.c;
    j["j"] = r.j;
    j["index"] = to_string(r.index);
    j["bits"] = r.bits;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace bdsc
