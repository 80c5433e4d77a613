#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "tailnet/fixedpoint.hpp"
#include "tailnet/model.hpp"

namespace tailnet {

struct KnapsackOptions {
  double tol_feas = 1e-9;
  std::optional<double> kappa_cap;  // default: 4 * beta_min * ceil(C_m / min entry rate at m)
  SolverOptions solver;
};

struct Feasibility {
  bool feasible = false;
  bool boundary = false;  // |slack| <= tol_feas
  double slack = 0.0;     // R^J_m + rho^J_m - C_m
};

/// Overload test at node m under profile J: the scaled long-session rate plus
/// scaled mean load must exceed C_m by more than tol_feas.
Feasibility feasibility(const NetworkSpec& spec, const LongSessionProfile& J, NodeId m,
                        const KnapsackOptions& options = {});

/// Same test against an already solved scaling problem.
Feasibility feasibility(const ScaledSolution& solution, const LongSessionProfile& J, NodeId m, double capacity,
                        double tol_feas);

/// kappa_J = sum_n J_n beta_n.
double profile_exponent(const NetworkSpec& spec, const LongSessionProfile& J);

/// Default search horizon for node m (0 if no heavy-tailed class visits m).
double default_kappa_cap(const NetworkSpec& spec, NodeId m);

struct NodeExponent {
  NodeId node = 0;
  bool feasible_found = false;
  std::vector<LongSessionProfile> optima;  // all minimizers, lexicographic order
  double kappa = std::numeric_limits<double>::infinity();
  double slack = 0.0;  // at optima.front()
  double kappa_cap = 0.0;
  std::size_t profiles_examined = 0;
  std::vector<ScaledSolution> solutions;  // one per optimum
};

struct ExponentReport {
  std::vector<NodeExponent> nodes;
};

/// Minimal-exponent overloading profiles at node m by kappa-ordered best-first search.
/// Light-tailed classes are held at zero. Returns feasible_found = false when
/// nothing overloads m within the cap; kappa is then a lower bound, not a value.
NodeExponent optimal_profile(const NetworkSpec& spec, NodeId m, const KnapsackOptions& options = {});

/// Exhaustive enumeration of every profile with kappa <= cap; reference for the search.
NodeExponent brute_force_profile(const NetworkSpec& spec, NodeId m, double kappa_cap,
                                 const KnapsackOptions& options = {});

ExponentReport analyze(const NetworkSpec& spec, const KnapsackOptions& options = {});

/// max of the per-node exponents over node_set. Throws CapExhaustedError if
/// any member has no feasible profile within its cap.
double joint_exponent(const ExponentReport& report, const std::vector<NodeId>& node_set);

}  // namespace tailnet
