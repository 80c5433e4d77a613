// tailnet: buffer-tail exponents of rate-proportional sharing networks.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tailnet/commands.hpp"
#include "tailnet/error.hpp"

int main(int argc, char** argv) {
  using namespace tailnet;

  CLI::App app{"Analyze and simulate heavy-tailed workloads in rate-proportional sharing networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 1;
  double kappa_cap = 0.0;
  std::string weight_mode;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: output.directory, $TAILNET_OUT, ./tailnet-out)");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--workers", workers, "parallel replications")->check(CLI::PositiveNumber);
    sub->add_option("--kappa-cap", kappa_cap, "knapsack search horizon override")->check(CLI::PositiveNumber);
    sub->add_option("--weight-mode", weight_mode, "capacity sharing weights")->check(CLI::IsMember({"demand", "arrival"}));
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a config and print per-node load vs capacity");
  auto* analyze_cmd = app.add_subcommand("analyze", "compute optimal long-session profiles and tail exponents");
  auto* simulate_cmd = app.add_subcommand("simulate", "run the fluid simulation and write workload traces");
  auto* verify_cmd = app.add_subcommand("verify", "analyze, simulate and compare fitted tails with predictions");
  for (auto* sub : {validate_cmd, analyze_cmd, simulate_cmd, verify_cmd}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CommandOptions options;
  auto* sub = app.get_subcommands().front();
  if (sub->count("--out")) options.out = out_dir;
  if (sub->count("--seed")) options.seed = seed;
  if (sub->count("--workers")) options.workers = workers;
  if (sub->count("--kappa-cap")) options.kappa_cap = kappa_cap;
  if (sub->count("--weight-mode")) options.weight_mode = parse_weight_mode(weight_mode);

  if (sub == validate_cmd) return cmd_validate(config_path, options, std::cout, std::cerr);
  if (sub == analyze_cmd) return cmd_analyze(config_path, options, std::cout, std::cerr);
  if (sub == simulate_cmd) return cmd_simulate(config_path, options, std::cout, std::cerr);
  return cmd_verify(config_path, options, std::cout, std::cerr);
}
