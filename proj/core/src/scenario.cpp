#include "bdsc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bdsc {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& what) {
  if (!ok) throw precondition_error(what);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    require(ok, "unknown key '" + it.key() + "' in " + where);
  }
}

// Binary chain law: X0 ~ Bern(1/2), X_k = X_{parent(k)} xor Bern(flip_k).
std::vector<double> xor_law(const std::vector<int>& parent, const std::vector<double>& flip) {
  const int m = static_cast<int>(parent.size());
  std::vector<double> p(std::size_t{1} << m, 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    double v = 0.5;
    for (int k = 1; k < m; ++k) {
      const int bit = static_cast<int>((x >> (m - 1 - k)) & 1u);
      const int pb = static_cast<int>((x >> (m - 1 - parent[k])) & 1u);
      v *= bit == pb ? 1.0 - flip[k] : flip[k];
    }
    p[x] = v;
  }
  return p;
}

// Common-cause law: Z ~ Bern(1/2) unobserved, X_k = Z xor Bern(flip_k).
std::vector<double> common_cause_law(const std::vector<double>& flip) {
  const int m = static_cast<int>(flip.size());
  std::vector<double> p(std::size_t{1} << m, 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    for (int z = 0; z < 2; ++z) {
      double v = 0.5;
      for (int k = 0; k < m; ++k) {
        const int bit = static_cast<int>((x >> (m - 1 - k)) & 1u);
        v *= bit == z ? 1.0 - flip[k] : flip[k];
      }
      p[x] += v;
    }
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------- accessors

JointPMF ScenarioFile::law() const { return JointPMF(alphabet_sizes, p); }

HonestCollection ScenarioFile::collection() const {
  if (threshold) return HonestCollection::threshold_family(m(), *threshold);
  std::vector<SubsetView> sets;
  for (const auto& s : honest_sets) sets.push_back(SubsetView::from_indices(std::span<const int>(s)));
  return HonestCollection::explicit_list(m(), std::move(sets));
}

InfoModel ScenarioFile::info_model() const {
  const HonestCollection h = collection();
  if (perfect_information) return InfoModel::perfect(h, alphabet_sizes);
  InfoModel info;
  info.perfect_information = false;
  for (const auto& list : channels) {
    std::vector<ConditionalPMF> out;
    for (const auto& c : list) out.emplace_back(alphabet_sizes, c.output_size, c.rows);
    info.channels.push_back(std::move(out));
  }
  return info;
}

SubsetView ScenarioFile::h_true() const { return SubsetView::from_indices(std::span<const int>(true_honest)); }

ConditionalPMF ScenarioFile::true_channel_pmf() const {
  if (perfect_information) return ConditionalPMF::identity(alphabet_sizes);
  const int k = collection().index_of(h_true());
  require(k >= 0, "actual honest set must belong to the collection");
  require(true_channel >= 0 && true_channel < static_cast<int>(channels[k].size()), "true_channel out of range");
  const auto& c = channels[k][true_channel];
  return ConditionalPMF(alphabet_sizes, c.output_size, c.rows);
}

void ScenarioFile::validate() const {
  require(m() >= 1 && m() <= 20, "scenario needs 1..20 sensors");
  const JointPMF pl = law();
  const HonestCollection h = collection();
  if (!perfect_information) require(channels.size() == h.size(), "one channel list per candidate honest set");
  info_model().validate(h, alphabet_sizes);
  require(h.index_of(h_true()) >= 0, "actual honest set must belong to the collection");
  (void)true_channel_pmf();
  static const char* kinds[] = {"honest_passthrough", "black_hole", "fake_distribution", "fixed_rate_ambiguity",
                                "worst_case"};
  bool kind_ok = false;
  for (const char* k : kinds) kind_ok = kind_ok || strategy.kind == k;
  require(kind_ok, "unknown strategy kind: " + strategy.kind);
  require(vr.n >= 1 && vr.rounds >= 0 && vr.eps > 0.0, "variable-rate parameters out of range");
  require(fr.n >= 1 && fr.subcodebooks >= 1 && fr.typicality_eps > 0.0, "fixed-rate parameters out of range");
  require(fr.kind == "randomized" || fr.kind == "deterministic", "fixed-rate kind must be randomized or deterministic");
  require(fr.rate_rule == "explicit" || fr.rate_rule == "randomized_min_sum" || fr.rate_rule == "deterministic_min_sum",
          "unknown rate rule: " + fr.rate_rule);
  if (fr.rate_rule == "explicit") require(static_cast<int>(fr.rates.size()) == m(), "one explicit rate per sensor");
  require(fr.tie_break == "likelihood" || fr.tie_break == "lexicographic", "tie_break must be likelihood or lexicographic");
  require(fr.arbitration == "preference" || fr.arbitration == "divergence",
          "arbitration must be preference or divergence");
  require(trials >= 0, "trial count must be nonnegative");
}

// --------------------------------------------------------------------- JSON

std::string ScenarioFile::to_json() const {
  json j;
  j["name"] = name;
  j["alphabet_sizes"] = alphabet_sizes;
  j["p"] = p;
  if (threshold) {
    j["threshold"] = *threshold;
  } else {
    j["honest_sets"] = honest_sets;
  }
  j["information"] = perfect_information ? "perfect" : "channels";
  if (!perfect_information) {
    json lists = json::array();
    for (const auto& list : channels) {
      json l = json::array();
      for (const auto& c : list) l.push_back({{"output_size", c.output_size}, {"rows", c.rows}});
      lists.push_back(l);
    }
    j["channels"] = lists;
    j["true_channel"] = true_channel;
  }
  j["true_honest"] = true_honest;
  json st = {{"kind", strategy.kind}};
  if (!strategy.q_bar_rows.empty()) st["q_bar_rows"] = strategy.q_bar_rows;
  j["strategy"] = st;
  json v = {{"n", vr.n}, {"rounds", vr.rounds}, {"eps", vr.eps}, {"alpha", vr.alpha}};
  if (vr.nu) v["nu"] = *vr.nu;
  if (vr.eta) v["eta"] = *vr.eta;
  if (vr.subcodebooks) v["subcodebooks"] = *vr.subcodebooks;
  j["vr"] = v;
  json f = {{"n", fr.n},
            {"kind", fr.kind},
            {"subcodebooks", fr.subcodebooks},
            {"rate_rule", fr.rate_rule},
            {"rate_margin", fr.rate_margin},
            {"typicality_eps", fr.typicality_eps},
            {"plurality", fr.plurality},
            {"tie_break", fr.tie_break},
            {"arbitration", fr.arbitration}};
  if (fr.rate_rule == "explicit") f["rates"] = fr.rates;
  j["fr"] = f;
  j["trials"] = trials;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

ScenarioFile ScenarioFile::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw precondition_error(std::string("scenario is not valid JSON: ") + e.what());
  }
  ScenarioFile s;
  try {
    check_keys(j,
               {"name", "alphabet_sizes", "p", "threshold", "honest_sets", "information", "channels", "true_channel",
                "true_honest", "strategy", "vr", "fr", "trials", "seed"},
               "scenario");
    s.name = get_or<std::string>(j, "name", "");
    s.alphabet_sizes = j.at("alphabet_sizes").get<std::vector<int>>();
    s.p = j.at("p").get<std::vector<double>>();
    s.threshold = get_opt<int>(j, "threshold");
    s.honest_sets = get_or<std::vector<std::vector<int>>>(j, "honest_sets", {});
    require(s.threshold.has_value() != !s.honest_sets.empty(), "give exactly one of threshold and honest_sets");
    const std::string info = get_or<std::string>(j, "information", "perfect");
    require(info == "perfect" || info == "channels", "information must be perfect or channels");
    s.perfect_information = info == "perfect";
    if (auto it = j.find("channels"); it != j.end()) {
      for (const auto& l : *it) {
        std::vector<ChannelSpec> list;
        for (const auto& c : l) {
          check_keys(c, {"output_size", "rows"}, "channel");
          list.push_back({c.at("output_size").get<int>(), c.at("rows").get<std::vector<double>>()});
        }
        s.channels.push_back(std::move(list));
      }
    }
    s.true_channel = get_or<int>(j, "true_channel", 0);
    s.true_honest = j.at("true_honest").get<std::vector<int>>();
    if (auto it = j.find("strategy"); it != j.end()) {
      check_keys(*it, {"kind", "q_bar_rows"}, "strategy");
      s.strategy.kind = get_or<std::string>(*it, "kind", "honest_passthrough");
      s.strategy.q_bar_rows = get_or<std::vector<double>>(*it, "q_bar_rows", {});
    }
    if (auto it = j.find("vr"); it != j.end()) {
      check_keys(*it, {"n", "rounds", "eps", "alpha", "nu", "eta", "subcodebooks"}, "vr");
      s.vr.n = get_or<int>(*it, "n", s.vr.n);
      s.vr.rounds = get_or<int>(*it, "rounds", s.vr.rounds);
      s.vr.eps = get_or<double>(*it, "eps", s.vr.eps);
      s.vr.alpha = get_or<double>(*it, "alpha", s.vr.alpha);
      s.vr.nu = get_opt<double>(*it, "nu");
      s.vr.eta = get_opt<double>(*it, "eta");
      s.vr.subcodebooks = get_opt<int>(*it, "subcodebooks");
    }
    if (auto it = j.find("fr"); it != j.end()) {
      check_keys(*it,
                 {"n", "kind", "subcodebooks", "rate_rule", "rate_margin", "rates", "typicality_eps", "plurality",
                  "tie_break", "arbitration"},
                 "fr");
      s.fr.n = get_or<int>(*it, "n", s.fr.n);
      s.fr.kind = get_or<std::string>(*it, "kind", s.fr.kind);
      s.fr.subcodebooks = get_or<int>(*it, "subcodebooks", s.fr.subcodebooks);
      s.fr.rate_rule = get_or<std::string>(*it, "rate_rule", s.fr.rate_rule);
      s.fr.rate_margin = get_or<double>(*it, "rate_margin", s.fr.rate_margin);
      s.fr.rates = get_or<std::vector<double>>(*it, "rates", {});
      s.fr.typicality_eps = get_or<double>(*it, "typicality_eps", s.fr.typicality_eps);
      s.fr.plurality = get_or<bool>(*it, "plurality", s.fr.plurality);
      s.fr.tie_break = get_or<std::string>(*it, "tie_break", s.fr.tie_break);
      s.fr.arbitration = get_or<std::string>(*it, "arbitration", s.fr.arbitration);
    }
    s.trials = get_or<int>(j, "trials", s.trials);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  } catch (const json::exception& e) {
    throw precondition_error(std::string("malformed scenario: ") + e.what());
  }
  s.validate();
  return s;
}

ScenarioFile ScenarioFile::load(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ------------------------------------------------------------------ presets

std::vector<std::string> preset_names() {
  return {"three-sensor", "independent-coding", "four-sensor-plurality", "no-traitor", "converse"};
}

ScenarioFile preset(const std::string& name) {
  ScenarioFile s;
  s.name = name;
  if (name == "three-sensor" || name == "converse" || name == "independent-coding") {
    s.alphabet_sizes = {2, 2, 2};
    s.p = common_cause_law({0.05, 0.05, 0.05});
    s.threshold = name == "independent-coding" ? 2 : 1;
    s.true_honest = name == "independent-coding" ? std::vector<int>{0} : std::vector<int>{0, 1};
    s.strategy.kind = name == "converse" ? "fixed_rate_ambiguity" : "fake_distribution";
    if (name == "converse") {
      s.fr.kind = "deterministic";
      s.fr.rate_margin = 0.0;
      s.fr.tie_break = "lexicographic";
      s.trials = 200;
    }
  } else if (name == "four-sensor-plurality") {
    s.alphabet_sizes = {2, 2, 2, 2};
    s.p = xor_law({0, 0, 1, 2}, {0.0, 0.08, 0.08, 0.08});
    s.threshold = 1;
    s.true_honest = {0, 1, 2};
    s.strategy.kind = "fake_distribution";
    s.fr.plurality = true;
  } else if (name == "no-traitor") {
    s.alphabet_sizes = {2, 2};
    s.p = xor_law({0, 0}, {0.0, 0.1});
    s.threshold = 0;
    s.true_honest = {0, 1};
    s.strategy.kind = "honest_passthrough";
  } else {
    throw precondition_error("unknown preset: " + name);
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------- resolution

ProtocolParams protocol_params(const ScenarioFile& s, std::uint64_t seed) {
  ProtocolParams params;
  params.n = s.vr.n;
  params.rounds = s.vr.rounds;
  params.eps = s.vr.eps;
  params.nu = s.vr.nu;
  params.eta = s.vr.eta;
  params.subcodebooks = s.vr.subcodebooks;
  params.alpha = s.vr.alpha;
  params.seed = seed;
  return params;
}

Strategy resolve_strategy(const ScenarioFile& s, const std::string& kind) {
  const StrategyKind k = parse_strategy_kind(kind);
  if (k != StrategyKind::fake_distribution) return {k, std::nullopt};
  const JointPMF p = s.law();
  const ConditionalPMF r = s.true_channel_pmf();
  const SubsetView t = s.h_true().complement(s.m());
  if (t.empty()) return Strategy::honest();
  if (!s.strategy.q_bar_rows.empty()) {
    const int nt = static_cast<int>(p.shape().sub(t).total());
    return Strategy::fake(ConditionalPMF({r.output_size()}, nt, s.strategy.q_bar_rows));
  }
  return Strategy::fake(optimal_q_bar(p, s.collection(), s.info_model(), s.h_true(), r, derive_seed(s.seed, "q-bar")));
}

FixedRateCode fixed_rate_code(const ScenarioFile& s, std::uint64_t code_seed) {
  FixedRateCode code;
  code.alphabet_sizes = s.alphabet_sizes;
  code.n = s.fr.n;
  code.kind = s.fr.kind == "deterministic" ? FixedRateKind::deterministic : FixedRateKind::randomized;
  code.subcodebooks = s.fr.subcodebooks;
  code.seed = code_seed;
  code.typicality_eps = s.fr.typicality_eps;
  code.plurality = s.fr.plurality;
  code.tie_break = s.fr.tie_break == "lexicographic" ? TieBreak::lexicographic : TieBreak::likelihood;
  code.arbitration = s.fr.arbitration == "divergence" ? Arbitration::divergence : Arbitration::preference;
  if (s.fr.rate_rule == "explicit") {
    code.rates = s.fr.rates;
  } else {
    const FixedRateKind region_kind =
        s.fr.rate_rule == "deterministic_min_sum" ? FixedRateKind::deterministic : FixedRateKind::randomized;
    const auto facets = fixed_rate_facets(s.law(), s.collection(), s.info_model(), region_kind);
    code.rates = min_sum_rate_point(facets, s.m());
    for (double& r : code.rates) r += s.fr.rate_margin;
  }
  code.validate();
  return code;
}

}  // namespace bdsc
