#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdsc/adversary.hpp"
#include "bdsc/fixed_rate_code.hpp"
#include "bdsc/prob.hpp"
#include "bdsc/region.hpp"
#include "bdsc/variable_rate.hpp"

namespace bdsc {

struct ChannelSpec {
  int output_size = 0;
  std::vector<double> rows;  // row-major r(w | x), one row per joint source symbol
};

struct StrategySpec {
  // honest_passthrough, black_hole, fake_distribution, fixed_rate_ambiguity, or worst_case
  // (fixed-rate simulation only: every strategy is run and the worst error rate reported).
  std::string kind = "honest_passthrough";
  // fake_distribution: explicit qbar rows; the region maximizer is used when empty.
  std::vector<double> q_bar_rows;
};

struct VariableRateSpec {
  int n = 12;
  int rounds = 50;
  double eps = 0.35;
  std::optional<double> nu;
  std::optional<double> eta;
  std::optional<int> subcodebooks;
  double alpha = 0.05;
};

struct FixedRateSpec {
  int n = 14;
  std::string kind = "randomized";  // randomized | deterministic
  int subcodebooks = 8;
  // explicit | randomized_min_sum | deterministic_min_sum; the min-sum rules add rate_margin per sensor.
  std::string rate_rule = "randomized_min_sum";
  double rate_margin = 0.1;
  std::vector<double> rates;  // explicit rule only
  double typicality_eps = 0.9;
  bool plurality = false;
  std::string tie_break = "likelihood";  // likelihood | lexicographic
  std::string arbitration = "preference";  // preference | divergence
};

// A complete experiment description stored as JSON. Sensors are numbered from 0.
struct ScenarioFile {
  std::string name;
  std::vector<int> alphabet_sizes;
  std::vector<double> p;
  std::optional<int> threshold;                // collection {S : |S| >= m - t}
  std::vector<std::vector<int>> honest_sets;   // used when threshold is absent
  bool perfect_information = true;
  std::vector<std::vector<ChannelSpec>> channels;  // imperfect information: per candidate set
  std::vector<int> true_honest;
  int true_channel = 0;  // index into the channels of the actual honest set
  StrategySpec strategy;
  VariableRateSpec vr;
  FixedRateSpec fr;
  int trials = 100;
  std::uint64_t seed = 1;

  int m() const { return static_cast<int>(alphabet_sizes.size()); }
  JointPMF law() const;
  HonestCollection collection() const;
  InfoModel info_model() const;
  SubsetView h_true() const;
  ConditionalPMF true_channel_pmf() const;
  // Throws precondition_error on any inconsistency.
  void validate() const;

  // Canonical JSON: sorted keys, two-space indent, trailing newline.
  std::string to_json() const;
  static ScenarioFile from_json(const std::string& text);
  static ScenarioFile load(const std::string& path);
};

std::vector<std::string> preset_names();
ScenarioFile preset(const std::string& name);

// Resolved pieces shared by the simulators.
ProtocolParams protocol_params(const ScenarioFile& s, std::uint64_t seed);
Strategy resolve_strategy(const ScenarioFile& s, const std::string& kind);
FixedRateCode fixed_rate_code(const ScenarioFile& s, std::uint64_t code_seed);

}  // namespace bdsc
