#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "bdsc/harness.hpp"

namespace {

struct Common {
  std::string scenario_path;
  std::string preset_name;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c, bool simulation) {
  auto* scen = cmd->add_option("--scenario", c.scenario_path, "Scenario JSON file");
  auto* pre = cmd->add_option("--preset", c.preset_name, "Built-in scenario name");
  scen->excludes(pre);
  if (simulation) {
    cmd->add_option("--trials", c.trials, "Number of trials (overrides the scenario)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", c.seed, "Master seed (overrides the scenario)");
    cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  }
  cmd->add_option("--out", c.out_dir, "Directory for CSV and JSON records");
}

bdsc::ScenarioFile load(const Common& c) {
  if (!c.scenario_path.empty()) return bdsc::ScenarioFile::load(c.scenario_path);
  if (!c.preset_name.empty()) return bdsc::preset(c.preset_name);
  throw bdsc::precondition_error("give --scenario PATH or --preset NAME");
}

std::optional<std::string> out_of(const Common& c) {
  if (c.out_dir.empty()) return std::nullopt;
  return c.out_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine distributed source coding simulator"};
  app.require_subcommand(1);
  Common region, vr, fr, attack, show;
  auto* c_region = app.add_subcommand("region", "Evaluate the rate region of a scenario");
  add_common(c_region, region, false);
  auto* c_vr = app.add_subcommand("simulate-vr", "Monte Carlo of the variable-rate protocol");
  add_common(c_vr, vr, true);
  auto* c_fr = app.add_subcommand("simulate-fr", "Monte Carlo of the fixed-rate code");
  add_common(c_fr, fr, true);
  auto* c_attack = app.add_subcommand("attack-demo", "Run the converse attack of a scenario");
  add_common(c_attack, attack, true);
  auto* c_show = app.add_subcommand("show-preset", "Print a built-in scenario as JSON");
  c_show->add_option("name", show.preset_name, "Preset name")->required();
  auto* c_list = app.add_subcommand("list-presets", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_list->parsed()) {
      for (const auto& n : bdsc::preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (c_show->parsed()) {
      std::cout << bdsc::preset(show.preset_name).to_json();
      return 0;
    }
    if (c_region->parsed()) return bdsc::cmd_region(load(region), out_of(region), std::cout);
    auto run = [](const Common& c, auto&& fn) {
      const bdsc::ScenarioFile s = load(c);
      return fn(s, c.trials.value_or(s.trials), c.seed.value_or(s.seed), c.workers, out_of(c));
    };
    if (c_vr->parsed())
      return run(vr, [](const auto& s, int t, std::uint64_t seed, int w, const auto& out) {
        return bdsc::cmd_simulate(s, "vr", t, seed, w, out, std::cout);
      });
    if (c_fr->parsed())
      return run(fr, [](const auto& s, int t, std::uint64_t seed, int w, const auto& out) {
        return bdsc::cmd_simulate(s, "fr", t, seed, w, out, std::cout);
      });
    if (c_attack->parsed())
      return run(attack, [](const auto& s, int t, std::uint64_t seed, int w, const auto& out) {
        return bdsc::cmd_attack_demo(s, t, seed, w, out, std::cout);
      });
  } catch (const bdsc::precondition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
