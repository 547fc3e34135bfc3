#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "app/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"indexins: index insurance demand, solvency and hybrid design"};
  cli.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  std::vector<std::string> sets;

  const char* commands[][2] = {
      {"describe", "descriptive statistics of the claim file"},
      {"fit", "fit the four payout models and export them with metrics"},
      {"calibrate", "solve alpha_- and lambda, write scenario.json"},
      {"demand", "demand sweeps over tau, mean aversion and theta"},
      {"solvency", "minimal loading and feasibility verdicts"},
      {"hybrid", "hybrid index/indemnity design (sweeps and Algorithm 1)"},
      {"simulate", "Monte Carlo one-year ruin probability"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = cli.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "INI config file");
    sub->add_option("--out", out_dir, "output directory (overrides run.out)");
    sub->add_option("--seed", seed, "seed (overrides run.seed)")->check(CLI::NonNegativeNumber);
    sub->add_option("--set", sets, "section.key=value override, repeatable");
  }
  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : indexins::app::kExitConfig;
  }

  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    if (!out_dir.empty()) sets.push_back("run.out=" + out_dir);
    if (seed >= 0) sets.push_back("run.seed=" + std::to_string(seed));
    const std::filesystem::path cfg_path(config_path);
    const auto cfg =
        indexins::app::load_scenario(config_path.empty() ? nullptr : &cfg_path, sets);
    return indexins::app::run_command(command, cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "indexins " << command << ": " << e.what() << '\n';
    return indexins::app::exit_code_for(e);
  }
}
