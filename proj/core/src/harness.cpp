#include "bdsc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "bdsc/fixed_rate.hpp"
#include "json.hpp"

namespace bdsc {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int worker_count(int workers, int count) { return std::max(1, std::min(workers, count)); }

// Runs body(i, worker) for i in [0, count) on worker_count() threads. Results must be stored by index.
template <typename F>
void parallel_for(int count, int workers, F body) {
  workers = worker_count(workers, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = next++; i < count; i = next++) body(i, w);
    });
  for (auto& t : pool) t.join();
}

std::string v_string(const std::vector<SubsetView>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += v[k].to_string();
  }
  return out;
}

json subset_json(SubsetView s) { return s.indices(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

const std::vector<std::string>& all_fr_strategies() {
  static const std::vector<std::string> list = {"honest_passthrough", "black_hole", "fake_distribution",
                                                "fixed_rate_ambiguity"};
  return list;
}

// First candidate preferred to h_true by the arbitration order, sharing a sensor with it,
// whose extra members are traitors within the companion-search guard.
std::optional<SubsetView> ambiguity_target(const HonestCollection& h, SubsetView h_true, const FixedRateCode& code) {
  for (SubsetView s1 : h.candidates) {
    if (s1 == h_true || s1.intersect(h_true).empty()) continue;
    const bool pref = s1.size() != h_true.size() ? s1.size() > h_true.size() : lex_less(s1, h_true);
    if (!pref) continue;
    bool confusable = false;
    for (int i : s1.intersect(h_true).indices())
      confusable = confusable || code.rates[i] < std::log2(static_cast<double>(code.alphabet_sizes[i]));
    if (!confusable) continue;
    double bits = 0.0;
    for (int i : s1.minus(h_true).indices()) bits += code.n * std::log2(static_cast<double>(code.alphabet_sizes[i]));
    if (bits <= kSearchBitsLimit + 1e-9) return s1;
  }
  return std::nullopt;
}

}  // namespace

BinomialSummary wilson(int events, int trials, double z) {
  BinomialSummary b;
  b.trials = trials;
  b.events = events;
  if (trials <= 0) return b;
  const double n = trials;
  const double ph = events / n;
  b.rate = ph;
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  b.lo = std::max(0.0, centre - half);
  b.hi = std::min(1.0, centre + half);
  if (events == 0) b.lo = 0.0;
  if (events == trials) b.hi = 1.0;
  return b;
}

// ------------------------------------------------------------ variable rate

VrSimulation simulate_vr(const ScenarioFile& s, int trials, std::uint64_t seed, int workers) {
  const auto t0 = Clock::now();
  s.validate();
  SessionSetup setup;
  setup.p = s.law();
  setup.h = s.collection();
  setup.info = s.info_model();
  setup.h_true = s.h_true();
  setup.r = s.true_channel_pmf();
  const std::string kind = s.strategy.kind == "worst_case" ? "fake_distribution" : s.strategy.kind;
  if (kind == "fixed_rate_ambiguity") throw precondition_error("the ambiguity attack applies to fixed-rate codes only");
  setup.strategy = resolve_strategy(s, kind);
  GeneralOptions opt;
  opt.seed = derive_seed(seed, "rate-bound");
  setup.rate_bound = r_star_general(setup.p, setup.h, setup.info, setup.h_true, setup.r, opt).value;
  setup.validate();

  VrSimulation sim;
  sim.params = protocol_params(s, derive_seed(seed, "trial", 0)).resolved(setup.p, setup.h, &sim.c_capped);
  sim.params.validate();
  sim.rate_bound = *setup.rate_bound;
  sim.slack = s.m() * (2.0 * sim.params.eps + *sim.params.nu);
  sim.rows.resize(std::max(trials, 0));
  std::mutex mu;

  parallel_for(trials, workers, [&](int t, int) {
    VrTrialRow row;
    row.trial = t;
    try {
      const SessionReport rep = run_session(setup, protocol_params(s, derive_seed(seed, "trial", t)));
      row.sum_rate = rep.sum_rate;
      row.honest_error = rep.honest_errors > 0;
      row.honest_error_rounds = rep.honest_errors;
      row.rounds = static_cast<int>(rep.rounds.size());
      row.final_v_size = static_cast<int>(rep.v_trajectory.back().size());
      row.final_v = v_string(rep.v_trajectory.back());
      row.over_budget_rounds = rep.over_budget_rounds;
      row.v_empty_events = rep.v_empty_events;
      if (t == 0) {
        std::lock_guard<std::mutex> lock(mu);
        sim.first_transcript = rep.transcript_jsonl();
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.failure = e.what();
    }
    sim.rows[t] = row;
  });

  int ok = 0, session_errors = 0, round_errors = 0, rounds = 0, multi = 0;
  double rate_sum = 0.0;
  for (const auto& row : sim.rows) {
    if (row.failed) {
      ++sim.failures;
      continue;
    }
    ++ok;
    rate_sum += row.sum_rate;
    session_errors += row.honest_error ? 1 : 0;
    round_errors += row.honest_error_rounds;
    rounds += row.rounds;
    multi += row.final_v_size >= 2 ? 1 : 0;
    sim.max_over_budget = std::max(sim.max_over_budget, row.over_budget_rounds);
  }
  sim.mean_sum_rate = ok ? rate_sum / ok : 0.0;
  sim.gap = sim.mean_sum_rate - sim.rate_bound;
  sim.session_error = wilson(session_errors, ok);
  sim.round_error = wilson(round_errors, rounds);
  sim.multi_set_fraction = ok ? static_cast<double>(multi) / ok : 0.0;
  sim.wall_seconds = seconds_since(t0);
  return sim;
}

std::string vr_csv(const VrSimulation& sim) {
  std::string out =
      "schema_version,trial,sum_rate,honest_error,honest_error_rounds,rounds,final_v_size,final_v,"
      "over_budget_rounds,v_empty_events,failed,failure\n";
  for (const auto& r : sim.rows) {
    out += std::to_string(kCsvSchemaVersion) + ',' + std::to_string(r.trial) + ',' + fmt(r.sum_rate) + ',' +
           (r.honest_error ? "1" : "0") + ',' + std::to_string(r.honest_error_rounds) + ',' +
           std::to_string(r.rounds) + ',' + std::to_string(r.final_v_size) + ",\"" + r.final_v + "\"," +
           std::to_string(r.over_budget_rounds) + ',' + std::to_string(r.v_empty_events) + ',' +
           (r.failed ? "1" : "0") + ",\"" + r.failure + "\"\n";
  }
  return out;
}

// --------------------------------------------------------------- fixed rate

FrSimulation simulate_fr(const ScenarioFile& s, int trials, std::uint64_t seed, int workers) {
  const auto t0 = Clock::now();
  s.validate();
  const JointPMF p = s.law();
  const HonestCollection h = s.collection();
  const SubsetView h_true = s.h_true();
  const SubsetView traitors = h_true.complement(s.m());
  const ConditionalPMF r = s.true_channel_pmf();
  const FixedRateCode base = fixed_rate_code(s, 0);
  const auto s1 = ambiguity_target(h, h_true, base);
  const bool traitors_see_honest = entropy_given_side_info(p, r, h_true) < kTol;

  FrSimulation sim;
  sim.rates = base.rates;
  if (s.strategy.kind == "worst_case") {
    sim.strategies = all_fr_strategies();
  } else {
    sim.strategies = {s.strategy.kind};
  }
  std::vector<Strategy> strategies;
  for (const auto& k : sim.strategies) strategies.push_back(resolve_strategy(s, k));
  const std::size_t ns = strategies.size();
  sim.rows.resize(static_cast<std::size_t>(std::max(trials, 0)) * ns);

  parallel_for(trials, workers, [&](int t, int) {
    const std::uint64_t ts = derive_seed(seed, "trial", t);
    std::vector<FrTrialRow> rows(ns);
    try {
      FixedRateCode code = base;
      code.seed = derive_seed(ts, "codebook");
      const FixedRateDecoder decoder(code, p, h);
      const FixedRateKey key = FixedRateKey::from_seed(code.seed);
      const SourceBlock block = sample_block(p, code.n, derive_seed(ts, "source"));
      const SideInfoBlock w = sample_side_info(r, block, derive_seed(ts, "side-info"));
      const TraitorContext ctx(traitors, p, r, w, block, ts, 0);

      for (std::size_t k = 0; k < ns; ++k) {
        FrTrialRow& row = rows[k];
        row.trial = t;
        row.strategy = sim.strategies[k];
        const Strategy& st = strategies[k];
        std::vector<Sequence> fabricated;
        if (st.kind == StrategyKind::fake_distribution && !traitors.empty())
          fabricated = fabricate_block(ctx, *st.q_bar, derive_seed(ts, "traitor-fabricate"));
        const Strategy plain = st.kind == StrategyKind::fixed_rate_ambiguity ? Strategy::honest() : st;
        auto msgs = encode_all(code, block, h_true, ts, 0, [&](int i) {
          return fixed_rate_traitor_message(ctx, plain, code, i, fabricated);
        });
        if (st.kind == StrategyKind::fixed_rate_ambiguity && s1 && !traitors.empty()) {
          std::function<bool(const std::vector<std::pair<int, FixedRateMessage>>&)> accept;
          SourceBlock guess = block;
          std::vector<FixedRateMessage> guess_msgs = msgs;
          if (traitors_see_honest) {
            // The traitors know the honest sequences but not the honest subcodebook draws.
            const auto xs = ctx.recover_from_side_info(h_true);
            const auto hi = h_true.indices();
            for (std::size_t q = 0; q < hi.size(); ++q) {
              guess.rows[hi[q]] = xs[q];
              guess_msgs[hi[q]] = {0, fixed_rate_encode(key, hi[q], xs[q], code.alphabet_sizes[hi[q]],
                                                        code.rates[hi[q]], 0)};
            }
            accept = [&](const std::vector<std::pair<int, FixedRateMessage>>& m) {
              auto all = guess_msgs;
              for (const auto& [i, msg] : m) all[i] = msg;
              return honest_error(decoder.decode(all), guess, h_true);
            };
          }
          const AmbiguityOutcome out = fixed_rate_ambiguity_attack(ctx, *s1, h_true, code, accept);
          row.attack_found = out.found;
          if (out.found)
            for (const auto& [i, msg] : out.messages) msgs[i] = msg;
        }
        const EstimateTable est = decoder.decode(msgs);
        row.honest_error = honest_error(est, block, h_true);
        row.disagreements = est.disagreements;
      }
    } catch (const std::exception& e) {
      for (std::size_t k = 0; k < ns; ++k) {
        rows[k].trial = t;
        rows[k].strategy = sim.strategies[k];
        rows[k].failed = true;
        rows[k].failure = e.what();
      }
    }
    for (std::size_t k = 0; k < ns; ++k) sim.rows[static_cast<std::size_t>(t) * ns + k] = rows[k];
  });

  sim.per_strategy.resize(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    int ok = 0, errors = 0;
    for (int t = 0; t < trials; ++t) {
      const auto& row = sim.rows[static_cast<std::size_t>(t) * ns + k];
      if (row.failed) {
        ++sim.failures;
        continue;
      }
      ++ok;
      errors += row.honest_error ? 1 : 0;
    }
    sim.per_strategy[k] = wilson(errors, ok);
    if (k == 0 || sim.per_strategy[k].rate > sim.worst.rate) {
      sim.worst = sim.per_strategy[k];
      sim.worst_strategy = sim.strategies[k];
    }
  }
  sim.wall_seconds = seconds_since(t0);
  return sim;
}

std::string fr_csv(const FrSimulation& sim) {
  std::string out = "schema_version,trial,strategy,honest_error,attack_found,disagreements,failed,failure\n";
  for (const auto& r : sim.rows) {
    out += std::to_string(kCsvSchemaVersion) + ',' + std::to_string(r.trial) + ',' + r.strategy + ',' +
           (r.honest_error ? "1" : "0") + ',' + (r.attack_found ? "1" : "0") + ',' +
           std::to_string(r.disagreements) + ',' + (r.failed ? "1" : "0") + ",\"" + r.failure + "\"\n";
  }
  return out;
}

ConverseSimulation simulate_converse(const ScenarioFile& s, int trials, std::uint64_t seed, int workers) {
  const auto t0 = Clock::now();
  s.validate();
  const JointPMF p = s.law();
  const HonestCollection h = s.collection();
  const FixedRateCode code = fixed_rate_code(s, derive_seed(seed, "codebook"));
  if (code.kind != FixedRateKind::deterministic) throw precondition_error("the converse demo needs a deterministic code");
  ConverseSimulation sim;
  sim.rates = code.rates;
  std::vector<ConverseOutcome> outcomes(std::max(trials, 0));
  // One decoder per worker keeps the bin-table caches private.
  std::vector<std::unique_ptr<FixedRateDecoder>> decoders;
  for (int w = 0; w < worker_count(workers, trials); ++w)
    decoders.push_back(std::make_unique<FixedRateDecoder>(code, p, h));
  parallel_for(trials, workers, [&](int t, int w) {
    outcomes[t] = demonstrate_converse(*decoders[w], p, h, derive_seed(seed, "trial", t), 0);
  });
  int errors = 0;
  for (const auto& o : outcomes) {
    errors += o.honest_error ? 1 : 0;
    sim.attacks_found += o.attack_found ? 1 : 0;
  }
  if (!outcomes.empty()) {
    sim.h_true = outcomes.front().h_true;
    sim.s1 = outcomes.front().s1;
  }
  sim.honest_error = wilson(errors, trials);
  sim.wall_seconds = seconds_since(t0);
  return sim;
}

// ----------------------------------------------------------------- commands

int cmd_region(const ScenarioFile& s, const std::optional<std::string>& out_dir, std::ostream& os) {
  s.validate();
  const JointPMF p = s.law();
  const HonestCollection h = s.collection();
  const InfoModel info = s.info_model();
  json rec;
  rec["scenario"] = s.name;

  double r_star = 0.0;
  std::vector<SubsetView> best_v;
  std::vector<double> best_q;
  if (info.perfect_information) {
    const RegionReport rep = r_star_perfect(p, h);
    r_star = rep.r_star;
    best_v = rep.maximizer_v;
    best_q.assign(rep.maximizer_q.mass().begin(), rep.maximizer_q.mass().end());
    json pairs = json::array();
    for (const auto& pv : rep.per_pair)
      pairs.push_back({{"honest_set", subset_json(h.candidates[pv.honest_index])},
                       {"value", pv.value},
                       {"converged", pv.converged}});
    rec["per_honest_set"] = pairs;
    rec["nonconverged"] = rep.nonconverged;
  } else {
    json pairs = json::array();
    r_star = -1.0;
    for (std::size_t k = 0; k < h.size(); ++k)
      for (std::size_t c = 0; c < info.channels[k].size(); ++c) {
        GeneralOptions opt;
        opt.seed = derive_seed(s.seed, "region", k, c);
        const GeneralResult g = r_star_general(p, h, info, h.candidates[k], info.channels[k][c], opt);
        pairs.push_back({{"honest_set", subset_json(h.candidates[k])},
                         {"channel", c},
                         {"value", g.value},
                         {"converged", g.converged},
                         {"residual", g.residual}});
        if (g.value > r_star) {
          r_star = g.value;
          best_v = g.v;
          best_q.assign(g.q.mass().begin(), g.q.mass().end());
        }
      }
    rec["per_honest_set"] = pairs;
  }
  rec["r_star"] = r_star;
  json vj = json::array();
  for (SubsetView v : best_v) vj.push_back(subset_json(v));
  rec["maximizer_v"] = vj;
  rec["maximizer_q"] = best_q;

  os << "scenario " << s.name << "\n";
  os << "R* = " << fmt(r_star) << " bits/symbol\n";
  os << "maximizing V: " << v_string(best_v) << "\n";
  const double h_all = entropy(p);
  os << "H(X_M) = " << fmt(h_all) << "\n";
  rec["joint_entropy"] = h_all;

  if (info.perfect_information && s.threshold) {
    const int t = *s.threshold;
    std::optional<double> cf;
    if (t == 0) {
      cf = h_all;
    } else if (t == 1 || t == 2 || t == s.m() - 1) {
      cf = closed_form_t(p, t);
    }
    if (cf) {
      os << "closed form for t = " << t << ": " << fmt(*cf) << " (difference " << fmt(r_star - *cf) << ")\n";
      rec["closed_form"] = *cf;
    }
    if (t == s.m() - 1 && t > 0) {
      double sum = 0.0;
      for (int i = 0; i < s.m(); ++i) sum += entropy(p, SubsetView::from_indices({i}));
      os << "sum of H(X_i) = " << fmt(sum) << "\n";
      rec["sum_marginal_entropies"] = sum;
    }
    if (s.m() == 3 && t == 1) {
      json terms = json::array();
      for (int k = 0; k < 3; ++k) {
        const int a = k == 0 ? 1 : 0;
        const int b = k == 2 ? 1 : 2;
        const double cmi = conditional_mutual_information(p, SubsetView::from_indices({a}),
                                                          SubsetView::from_indices({b}), SubsetView::from_indices({k}));
        os << "I(X" << a << ";X" << b << "|X" << k << ") = " << fmt(cmi) << "\n";
        terms.push_back({{"pair", {a, b}}, {"given", k}, {"value", cmi}});
      }
      rec["conditional_mutual_information"] = terms;
    }
  }

  json fixed = json::object();
  for (FixedRateKind kind : {FixedRateKind::randomized, FixedRateKind::deterministic}) {
    const char* label = kind == FixedRateKind::randomized ? "randomized" : "deterministic";
    const auto facets = fixed_rate_facets(p, h, info, kind);
    const auto point = min_sum_rate_point(facets, s.m());
    double sum = 0.0;
    for (double v : point) sum += v;
    json fj = json::array();
    os << label << " fixed-rate facets:\n";
    for (const auto& f : facets) {
      os << "  sum over " << f.sum_over.to_string() << " >= " << fmt(f.bound) << "\n";
      fj.push_back({{"sum_over", subset_json(f.sum_over)}, {"bound", f.bound}});
    }
    os << "  min-sum point:";
    for (double v : point) os << ' ' << fmt(v);
    os << " (sum " << fmt(sum) << ")\n";
    fixed[label] = {{"facets", fj}, {"min_sum_point", point}, {"min_sum", sum}};
  }
  rec["fixed_rate"] = fixed;

  if (out_dir) write_file(std::filesystem::path(*out_dir) / "region.json", rec.dump(2) + "\n");
  return 0;
}

int cmd_simulate(const ScenarioFile& s, const std::string& mode, int trials, std::uint64_t seed, int workers,
                 const std::optional<std::string>& out_dir, std::ostream& os) {
  if (mode == "vr") {
    const VrSimulation sim = simulate_vr(s, trials, seed, workers);
    os << "variable-rate: " << trials << " trials, n = " << sim.params.n << ", N = " << sim.params.rounds
       << ", eps = " << fmt(sim.params.eps) << ", nu = " << fmt(*sim.params.nu) << ", eta = " << fmt(*sim.params.eta)
       << ", C = " << *sim.params.subcodebooks << (sim.c_capped ? " (capped)" : "") << "\n";
    os << "mean sum rate " << fmt(sim.mean_sum_rate) << ", R* " << fmt(sim.rate_bound) << ", gap " << fmt(sim.gap)
       << " (allowance " << fmt(sim.slack) << ")\n";
    os << "honest error: sessions " << fmt(sim.session_error.rate) << " [" << fmt(sim.session_error.lo) << ", "
       << fmt(sim.session_error.hi) << "], rounds " << fmt(sim.round_error.rate) << "\n";
    os << "final V with >= 2 sets: " << fmt(sim.multi_set_fraction) << ", max over-budget rounds "
       << sim.max_over_budget << ", failures " << sim.failures << "\n";
    os << "wall time " << fmt(sim.wall_seconds) << " s\n";
    if (out_dir) {
      const std::filesystem::path dir(*out_dir);
      write_file(dir / "vr_trials.csv", vr_csv(sim));
      write_file(dir / "vr_transcript_trial0.jsonl", sim.first_transcript);
      json sum = {{"schema_version", kCsvSchemaVersion},
                  {"trials", trials},
                  {"mean_sum_rate", sim.mean_sum_rate},
                  {"rate_bound", sim.rate_bound},
                  {"gap", sim.gap},
                  {"slack", sim.slack},
                  {"session_error", {sim.session_error.rate, sim.session_error.lo, sim.session_error.hi}},
                  {"round_error", {sim.round_error.rate, sim.round_error.lo, sim.round_error.hi}},
                  {"multi_set_fraction", sim.multi_set_fraction},
                  {"max_over_budget_rounds", sim.max_over_budget},
                  {"failures", sim.failures},
                  {"wall_seconds", sim.wall_seconds}};
      write_file(dir / "vr_summary.json", sum.dump(2) + "\n");
    }
    return sim.failures == 0 ? 0 : 2;
  }
  if (mode == "fr") {
    const FrSimulation sim = simulate_fr(s, trials, seed, workers);
    os << "fixed-rate (" << s.fr.kind << "): " << trials << " trials, n = " << s.fr.n << ", rates";
    for (double r : sim.rates) os << ' ' << fmt(r);
    os << "\n";
    for (std::size_t k = 0; k < sim.strategies.size(); ++k)
      os << "  " << sim.strategies[k] << ": honest error " << fmt(sim.per_strategy[k].rate) << " ["
         << fmt(sim.per_strategy[k].lo) << ", " << fmt(sim.per_strategy[k].hi) << "]\n";
    os << "worst strategy " << sim.worst_strategy << " with error " << fmt(sim.worst.rate) << ", failures "
       << sim.failures << "\n";
    os << "wall time " << fmt(sim.wall_seconds) << " s\n";
    if (out_dir) {
      const std::filesystem::path dir(*out_dir);
      write_file(dir / "fr_trials.csv", fr_csv(sim));
      json per = json::object();
      for (std::size_t k = 0; k < sim.strategies.size(); ++k)
        per[sim.strategies[k]] = {sim.per_strategy[k].rate, sim.per_strategy[k].lo, sim.per_strategy[k].hi};
      json sum = {{"schema_version", kCsvSchemaVersion}, {"trials", trials},
                  {"rates", sim.rates},                  {"per_strategy", per},
                  {"worst_strategy", sim.worst_strategy}, {"failures", sim.failures},
                  {"wall_seconds", sim.wall_seconds}};
      write_file(dir / "fr_summary.json", sum.dump(2) + "\n");
    }
    return sim.failures == 0 ? 0 : 2;
  }
  throw precondition_error("simulation mode must be vr or fr");
}

int cmd_attack_demo(const ScenarioFile& s, int trials, std::uint64_t seed, int workers,
                    const std::optional<std::string>& out_dir, std::ostream& os) {
  if (s.fr.kind == "deterministic" && s.strategy.kind == "fixed_rate_ambiguity") {
    const ConverseSimulation sim = simulate_converse(s, trials, seed, workers);
    os << "fixed-rate ambiguity attack on a deterministic code, actual honest set " << sim.h_true.to_string()
       << ", target " << sim.s1.to_string() << "\n";
    os << "rates";
    for (double r : sim.rates) os << ' ' << fmt(r);
    os << "\nattack found in " << sim.attacks_found << " of " << trials << " trials; honest error "
       << fmt(sim.honest_error.rate) << " [" << fmt(sim.honest_error.lo) << ", " << fmt(sim.honest_error.hi) << "]\n";
    if (out_dir) {
      json rec = {{"mode", "fixed_rate_converse"},
                  {"trials", trials},
                  {"rates", sim.rates},
                  {"h_true", subset_json(sim.h_true)},
                  {"target", subset_json(sim.s1)},
                  {"attacks_found", sim.attacks_found},
                  {"honest_error", {sim.honest_error.rate, sim.honest_error.lo, sim.honest_error.hi}}};
      write_file(std::filesystem::path(*out_dir) / "attack_demo.json", rec.dump(2) + "\n");
    }
    return 0;
  }
  ScenarioFile attacked = s;
  attacked.strategy.kind = "fake_distribution";
  const VrSimulation sim = simulate_vr(attacked, trials, seed, workers);
  os << "variable-rate session under the optimal fake-distribution attack, actual honest set "
     << attacked.h_true().to_string() << "\n";
  os << "final V keeps >= 2 sets in " << fmt(sim.multi_set_fraction) << " of trials; honest error (sessions) "
     << fmt(sim.session_error.rate) << "; mean sum rate " << fmt(sim.mean_sum_rate) << " vs R* "
     << fmt(sim.rate_bound) << "\n";
  if (out_dir) {
    const std::filesystem::path dir(*out_dir);
    write_file(dir / "attack_demo_trials.csv", vr_csv(sim));
    json rec = {{"mode", "variable_rate_fake_distribution"},
                {"trials", trials},
                {"multi_set_fraction", sim.multi_set_fraction},
                {"session_error", sim.session_error.rate},
                {"mean_sum_rate", sim.mean_sum_rate},
                {"rate_bound", sim.rate_bound}};
    write_file(dir / "attack_demo.json", rec.dump(2) + "\n");
  }
  return sim.failures == 0 ? 0 : 2;
}

}  // namespace bdsc
