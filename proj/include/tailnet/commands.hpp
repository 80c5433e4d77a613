#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tailnet/config.hpp"
#include "tailnet/knapsack.hpp"
#include "tailnet/report.hpp"
#include "tailnet/simulator.hpp"

namespace tailnet {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitRuntime = 2,
  kExitVerifyFailed = 3,
};

/// Command-line overrides applied on top of the config file.
struct CommandOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> kappa_cap;
  std::optional<WeightMode> weight_mode;
  /// Replaces every predicted exponent in verify (harness self-test).
  std::optional<double> injected_kappa;
};

void apply_overrides(RunConfig& config, const CommandOptions& options);

/// --out, then output.directory, then $TAILNET_OUT, then ./tailnet-out.
std::filesystem::path output_directory(const RunConfig& config, const CommandOptions& options);

/// Runs the replications on up to `workers` threads; results are in replication order.
std::vector<SimTrace> simulate_replications(const NetworkSpec& spec, const SimulationConfig& sim);

/// Pools every replication's samples per monitored node, fits both estimators
/// and judges the regression estimate against the node's predicted exponent.
std::vector<VerdictRow> judge(const ExponentReport& report, const std::vector<SimTrace>& traces,
                              const AnalysisConfig& analysis, std::optional<double> injected_kappa = std::nullopt);

int cmd_validate(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
                 std::ostream& err);
int cmd_analyze(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
                std::ostream& err);
int cmd_simulate(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
                 std::ostream& err);
int cmd_verify(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
               std::ostream& err);

}  // namespace tailnet
