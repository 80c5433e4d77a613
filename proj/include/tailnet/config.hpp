#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tailnet/knapsack.hpp"
#include "tailnet/model.hpp"
#include "tailnet/simulator.hpp"
#include "tailnet/tailstats.hpp"

namespace tailnet {

struct AnalysisConfig {
  std::optional<double> kappa_cap;
  double tol_feas = 1e-9;
  double tol = 1e-12;
  long max_iter = 100000;
  double damping = 1.0;
  std::vector<NodeId> joint_nodes;
  double tail_lower = 0.99;
  double tail_upper = 0.9999;
  std::optional<std::size_t> hill_k;
  double verify_tolerance = 0.25;

  KnapsackOptions knapsack() const;
  TailOptions tail() const;
};

struct SimulationConfig {
  long long horizon = 1000000;
  std::optional<long long> warmup;  // default 20% of horizon
  long long stride = 1;
  std::uint64_t seed = 1;
  WeightMode weight_mode = WeightMode::kDemand;
  std::vector<NodeId> monitored_nodes;  // empty = all nodes
  int replications = 1;
  long long session_limit = 100000000;
  int workers = 1;

  /// Config of replication i (seed derived with replication_seed).
  SimConfig replication(std::size_t i) const;
};

struct OutputConfig {
  std::optional<std::string> directory;
  std::vector<std::string> formats{"json", "csv"};
};

struct RunConfig {
  NetworkSpec network;
  AnalysisConfig analysis;
  SimulationConfig simulation;
  OutputConfig output;
};

/// Parses the JSON config text. Unknown fields, wrong types and malformed JSON
/// raise ConfigError naming the source line or the field path.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

RunConfig load_config(const std::filesystem::path& path);

/// Cross-field checks (node references, tolerances, horizon vs warmup).
/// Network stability is left to validate().
void check_config(const RunConfig& config);

}  // namespace tailnet
