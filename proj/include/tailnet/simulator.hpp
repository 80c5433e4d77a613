#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tailnet/model.hpp"
#include "tailnet/rng.hpp"

namespace tailnet {

/// Inverse-transform draw from the law, P{tau >= k} = survival(k) exactly:
/// tau = max{k >= 1 : survival(k) >= u}, or 0 when u > survival(1) (only
/// possible for alpha < 1; such a session never becomes active).
/// Throws DomainError unless 0 < u < 1.
long long sample_duration(const DurationLaw& law, double u);

/// How a node splits capacity when overloaded.
enum class WeightMode {
  kDemand,   // proportional to backlog + arrivals
  kArrival,  // proportional to this slot's arrivals; leftover drains backlogs by size
};

const char* to_string(WeightMode mode);
WeightMode parse_weight_mode(const std::string& name);

/// Proportional water-filling of `capacity` over classes with positive weight.
/// A class whose demand is at most its current share is served fully and
/// removed; the rest re-share what is left. Returns the per-class service.
Eigen::VectorXd waterfill(const Eigen::VectorXd& demand, const Eigen::VectorXd& weight, double capacity);

/// Per-node service under the given weight mode; work-conserving.
Eigen::VectorXd allocate(const Eigen::VectorXd& demand, const Eigen::VectorXd& arrival, double capacity,
                         WeightMode mode);

/// Active sessions of one class, bucketed by the slot they expire in.
struct ActiveSessionBook {
  long long active = 0;
  std::map<long long, long long> expiring;  // slot -> sessions ending before it
};

struct SimState {
  long long slot = 0;
  Eigen::MatrixXd backlog;     // nodes x classes
  Eigen::MatrixXd in_transit;  // nodes x classes, delivered next slot
  std::vector<ActiveSessionBook> sessions;
  std::vector<Stream> arrival_streams;
  std::vector<Stream> duration_streams;
  Eigen::MatrixXi next_hop;  // nodes x classes, -1 = leaves the network
  long long session_limit = 100000000;
  double injected = 0.0;  // cumulative external fluid
  double exited = 0.0;    // cumulative fluid leaving the network
};

SimState initial_state(const NetworkSpec& spec, std::uint64_t seed);

/// Per-slot flows, returned by step for inspection.
struct SlotFlows {
  Eigen::MatrixXd arrival;  // nodes x classes
  Eigen::MatrixXd demand;
  Eigen::MatrixXd served;
  double injected = 0.0;
  double exited = 0.0;
};

/// Advances one slot: expiries and Poisson arrivals, delivery of last slot's
/// transit fluid, per-node proportional service, routing of served fluid.
SlotFlows step(const NetworkSpec& spec, SimState& state, WeightMode mode);

struct SimConfig {
  long long horizon = 1000000;
  long long warmup = 200000;
  long long stride = 1;
  std::uint64_t seed = 1;
  std::vector<NodeId> monitored;  // empty = every node
  WeightMode weight_mode = WeightMode::kDemand;
  long long session_limit = 100000000;
};

struct NodeTrace {
  NodeId node = 0;
  std::vector<double> workload;  // sample i is taken at slot first_slot + i * stride
  double max_workload = 0.0;
  double busy_fraction = 0.0;
  double mean_workload = 0.0;
  double mean_throughput = 0.0;  // post-warmup fluid served per slot
};

struct SimTrace {
  SimConfig config;
  long long first_slot = 0;
  std::vector<NodeTrace> nodes;
  double mean_active_sessions = 0.0;  // post-warmup

  long long slot_of(std::size_t i) const { return first_slot + static_cast<long long>(i) * config.stride; }
};

/// Runs horizon slots from the empty state. Deterministic in config.seed.
/// Throws GuardError when the active-session guard trips.
SimTrace run(const NetworkSpec& spec, const SimConfig& config);

}  // namespace tailnet
