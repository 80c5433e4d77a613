#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tailnet/model.hpp"

namespace tailnet {

/// Number of concurrently active long sessions per class.
using LongSessionProfile = std::vector<int>;

/// Inputs of the rate-scaling equations: topology plus the external
/// (entry) rate and mean load of every class.
struct ScalingProblem {
  Eigen::VectorXd capacities;
  std::vector<std::vector<NodeId>> routes;
  Eigen::VectorXd entry_rates;
  Eigen::VectorXd entry_loads;

  static ScalingProblem from(const NetworkSpec& spec);

  std::size_t num_nodes() const { return static_cast<std::size_t>(capacities.size()); }
  std::size_t num_classes() const { return routes.size(); }
};

/// Packs per-hop rates and loads into one vector. For class n with route
/// length l, rates of hops 0..l-1 come first, then loads of hops 0..l-1.
class HopLayout {
 public:
  explicit HopLayout(const ScalingProblem& problem);

  Eigen::Index size() const { return size_; }
  Eigen::Index rate_index(ClassId n, std::size_t hop) const { return offsets_[n] + static_cast<Eigen::Index>(hop); }
  Eigen::Index load_index(ClassId n, std::size_t hop) const {
    return offsets_[n] + static_cast<Eigen::Index>(lengths_[n] + hop);
  }
  std::size_t route_length(ClassId n) const { return lengths_[n]; }

  /// (class, hop) pairs located at node m.
  const std::vector<std::pair<ClassId, std::size_t>>& hops_at(NodeId m) const { return at_node_[m]; }

 private:
  std::vector<Eigen::Index> offsets_;
  std::vector<std::size_t> lengths_;
  std::vector<std::vector<std::pair<ClassId, std::size_t>>> at_node_;
  Eigen::Index size_ = 0;
};

struct SolverOptions {
  double tol = 1e-12;
  long max_iter = 100000;
  double damping = 1.0;         // theta in (0, 1]; 1 is a plain sweep
  bool force_iterative = false; // skip the feedforward single pass
};

struct ScaledSolution {
  Eigen::MatrixXd rate;        // classes x nodes, zero off-route
  Eigen::MatrixXd load;        // classes x nodes, zero off-route
  Eigen::VectorXd scale;       // per node, in (0, 1]
  Eigen::VectorXd node_input;  // per node, sum_n J_n rate(n,m) + load(n,m)
  Eigen::VectorXd hops;        // packed HopLayout vector
  long iterations = 0;
  double residual = 0.0;
  bool feedforward = false;
  std::vector<NodeId> boundary_nodes;  // input equals capacity to 1e-12
};

/// Entry values propagated unchanged along every route (all scales 1).
Eigen::VectorXd unscaled_point(const ScalingProblem& problem, const HopLayout& layout);

/// Upper corner of the invariant box: each hop value lies in [0, entry value].
Eigen::VectorXd domain_upper(const ScalingProblem& problem, const HopLayout& layout);

/// sum_{n at m} J_n * rate + load, evaluated on the packed vector v.
Eigen::VectorXd node_inputs(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                            const Eigen::VectorXd& v);

/// C_m / max(C_m, input_m).
Eigen::VectorXd node_scales(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                            const Eigen::VectorXd& v);

/// One sweep of the scaling operator: every non-entry hop takes its upstream
/// hop's value times the upstream node's scale. Entry coordinates are kept.
Eigen::VectorXd apply_T(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                        const Eigen::VectorXd& v);

/// True when the node graph with an edge upstream -> node for every class hop is acyclic.
bool is_feedforward(const ScalingProblem& problem);

/// Unique solution of the rate-scaling equations for profile J.
/// Throws ConvergenceError if the iteration does not settle within max_iter.
ScaledSolution solve(const ScalingProblem& problem, const LongSessionProfile& J, const SolverOptions& options = {});

/// Iterative solve from an explicit starting point (entry coordinates are reset).
ScaledSolution solve_from(const ScalingProblem& problem, const LongSessionProfile& J, Eigen::VectorXd start,
                          const SolverOptions& options = {});

/// ||T(u) - T(v)||_2 / ||u - v||_2, or 0 when u == v.
double contraction_ratio(const ScalingProblem& problem, const LongSessionProfile& J, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v);

/// Non-strict L2 contraction test ||T(u) - T(v)|| <= ||u - v||.
bool contraction_check(const ScalingProblem& problem, const LongSessionProfile& J, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v);

}  // namespace tailnet
