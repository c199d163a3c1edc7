#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bdsc/scenario.hpp"

namespace bdsc {

inline constexpr int kCsvSchemaVersion = 1;

struct BinomialSummary {
  int trials = 0;
  int events = 0;
  double rate = 0.0;
  double lo = 0.0;  // 95% Wilson interval
  double hi = 0.0;
};

BinomialSummary wilson(int events, int trials, double z = 1.959963984540054);

struct VrTrialRow {
  int trial = 0;
  double sum_rate = 0.0;
  bool honest_error = false;  // some round mis-decoded an honest sensor
  int honest_error_rounds = 0;
  int rounds = 0;
  int final_v_size = 0;
  std::string final_v;
  int over_budget_rounds = 0;
  int v_empty_events = 0;
  bool failed = false;
  std::string failure;
};

struct VrSimulation {
  std::vector<VrTrialRow> rows;
  ProtocolParams params;  // resolved, seed of trial 0
  bool c_capped = false;
  double rate_bound = 0.0;  // R* for the actual honest set and channel
  double slack = 0.0;       // m (2 eps + nu)
  double mean_sum_rate = 0.0;
  double gap = 0.0;  // mean_sum_rate - rate_bound
  BinomialSummary session_error;
  BinomialSummary round_error;
  double multi_set_fraction = 0.0;  // trials whose final V keeps >= 2 sets
  int max_over_budget = 0;
  int failures = 0;
  std::string first_transcript;
  double wall_seconds = 0.0;
};

VrSimulation simulate_vr(const ScenarioFile& s, int trials, std::uint64_t seed, int workers);

struct FrTrialRow {
  int trial = 0;
  std::string strategy;
  bool honest_error = false;
  bool attack_found = false;
  int disagreements = 0;
  bool failed = false;
  std::string failure;
};

struct FrSimulation {
  std::vector<FrTrialRow> rows;  // sorted by (trial, strategy order)
  std::vector<std::string> strategies;
  std::vector<BinomialSummary> per_strategy;
  BinomialSummary worst;
  std::string worst_strategy;
  std::vector<double> rates;
  int failures = 0;
  double wall_seconds = 0.0;
};

FrSimulation simulate_fr(const ScenarioFile& s, int trials, std::uint64_t seed, int workers);

struct ConverseSimulation {
  std::vector<double> rates;
  SubsetView h_true;
  SubsetView s1;
  BinomialSummary honest_error;
  int attacks_found = 0;
  double wall_seconds = 0.0;
};

ConverseSimulation simulate_converse(const ScenarioFile& s, int trials, std::uint64_t seed, int workers);

std::string vr_csv(const VrSimulation& sim);
std::string fr_csv(const FrSimulation& sim);

// Subcommands. Each prints a summary to `os`, writes records under out_dir when given,
// and returns a process exit code.
int cmd_region(const ScenarioFile& s, const std::optional<std::string>& out_dir, std::ostream& os);
int cmd_simulate(const ScenarioFile& s, const std::string& mode, int trials, std::uint64_t seed, int workers,
                 const std::optional<std::string>& out_dir, std::ostream& os);
int cmd_attack_demo(const ScenarioFile& s, int trials, std::uint64_t seed, int workers,
                    const std::optional<std::string>& out_dir, std::ostream& os);

}  // namespace bdsc
