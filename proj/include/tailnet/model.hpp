#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tailnet {

using NodeId = std::size_t;
using ClassId = std::size_t;

/// Result of an upstream lookup: a node, or no value when the node is the
/// first hop of the route (the class enters the network there).
using Upstream = std::optional<NodeId>;
inline constexpr std::nullopt_t kEntry = std::nullopt;

/// Session duration law on slots {1, 2, ...}.
///
/// Heavy-tailed classes use the discrete Pareto law
///   P{tau >= k} = min(1, alpha * k^-(1+beta)).
/// Light-tailed classes use the geometric law
///   P{tau >= k} = min(1, alpha * exp(-beta * (k-1))),
/// and are treated as having an infinite tail exponent by the analysis.
struct DurationLaw {
  double alpha = 1.0;
  double beta = 1.0;
  bool light_tailed = false;

  /// P{tau >= k} for integer k >= 1 (returns 1 for k <= 1).
  double survival(long long k) const;
};

struct TrafficClass {
  double lambda = 0.0;  // session arrivals per slot
  double rate = 0.0;    // fluid per slot per active session
  DurationLaw duration;
  std::vector<NodeId> route;
};

/// Expected session length in slots, sum_{k>=1} P{tau >= k}.
/// Throws ConfigError for non-positive or non-finite parameters.
double mean_duration(const DurationLaw& law);

/// Network of capacity-sharing nodes and the traffic classes crossing it.
///
/// Construction never throws on malformed data; call validate() before
/// handing a spec to the analysis or the simulator.
class NetworkSpec {
 public:
  NetworkSpec() = default;
  NetworkSpec(std::vector<double> capacities, std::vector<TrafficClass> classes);

  std::size_t num_nodes() const { return capacities_.size(); }
  std::size_t num_classes() const { return classes_.size(); }

  const std::vector<double>& capacities() const { return capacities_; }
  double capacity(NodeId m) const { return capacities_.at(m); }
  const std::vector<TrafficClass>& classes() const { return classes_; }
  const TrafficClass& traffic_class(ClassId n) const { return classes_.at(n); }

  /// Mean offered load rho_n = lambda_n * r_n * E[tau_n] (NaN for invalid laws).
  double mean_load(ClassId n) const { return loads_.at(n); }
  const std::vector<double>& mean_loads() const { return loads_; }

  /// Position of node m on the route of class n, if the route visits m.
  std::optional<std::size_t> hop_index(ClassId n, NodeId m) const;

 private:
  std::vector<double> capacities_;
  std::vector<TrafficClass> classes_;
  std::vector<double> loads_;
};

/// Classes whose route visits m, in increasing id order.
std::vector<ClassId> classes_at_node(const NetworkSpec& spec, NodeId m);

/// Route predecessor of m for class n, or kEntry when m is the first hop.
/// Throws DomainError when the route of n does not visit m.
Upstream upstream(const NetworkSpec& spec, ClassId n, NodeId m);

/// Sum of mean loads of the classes visiting m.
double node_load(const NetworkSpec& spec, NodeId m);

enum class Violation {
  kNoNodes,
  kBadCapacity,
  kNoClasses,
  kBadLambda,
  kBadRate,
  kBadAlpha,
  kBadBeta,
  kEmptyRoute,
  kUnknownNode,
  kRouteRevisitsNode,
  kUnstableNode,
};

const char* to_string(Violation v);

struct ValidationIssue {
  Violation kind;
  std::optional<ClassId> class_id;
  std::optional<NodeId> node;
  std::optional<std::size_t> route_index;
  std::string message;
};

struct NodeLoadRow {
  NodeId node;
  double capacity;
  double load;  // sum of rho_n over classes visiting the node
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  std::vector<NodeLoadRow> loads;

  bool ok() const { return issues.empty(); }
};

/// Checks every structural and stability invariant and collects all failures.
ValidationReport validate(const NetworkSpec& spec);

/// Throws ConfigError listing the issues if the network does not validate.
void require_valid(const NetworkSpec& spec);

}  // namespace tailnet
