#include "tailnet/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "tailnet/error.hpp"

namespace tailnet {

ScalingProblem ScalingProblem::from(const NetworkSpec& spec) {
  ScalingProblem p;
  p.capacities = Eigen::Map<const Eigen::VectorXd>(spec.capacities().data(),
                                                   static_cast<Eigen::Index>(spec.num_nodes()));
  p.entry_rates.resize(static_cast<Eigen::Index>(spec.num_classes()));
  p.entry_loads.resize(static_cast<Eigen::Index>(spec.num_classes()));
  for (ClassId n = 0; n < spec.num_classes(); ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    p.routes.push_back(spec.traffic_class(n).route);
    p.entry_rates(i) = spec.traffic_class(n).rate;
    p.entry_loads(i) = spec.mean_load(n);
  }
  return p;
}

HopLayout::HopLayout(const ScalingProblem& problem) : at_node_(problem.num_nodes()) {
  for (ClassId n = 0; n < problem.num_classes(); ++n) {
    const auto& route = problem.routes[n];
    offsets_.push_back(size_);
    lengths_.push_back(route.size());
    size_ += 2 * static_cast<Eigen::Index>(route.size());
    for (std::size_t j = 0; j < route.size(); ++j) at_node_.at(route[j]).emplace_back(n, j);
  }
}

namespace {

double scale_of(double capacity, double input) { return capacity / std::max(capacity, input); }

void reset_entries(const ScalingProblem& problem, const HopLayout& layout, Eigen::VectorXd& v) {
  for (ClassId n = 0; n < problem.num_classes(); ++n) {
    if (layout.route_length(n) == 0) continue;
    v(layout.rate_index(n, 0)) = problem.entry_rates(static_cast<Eigen::Index>(n));
    v(layout.load_index(n, 0)) = problem.entry_loads(static_cast<Eigen::Index>(n));
  }
}

ScaledSolution assemble(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                        Eigen::VectorXd v) {
  ScaledSolution s;
  const auto N = static_cast<Eigen::Index>(problem.num_classes());
  const auto M = static_cast<Eigen::Index>(problem.num_nodes());
  s.rate = Eigen::MatrixXd::Zero(N, M);
  s.load = Eigen::MatrixXd::Zero(N, M);
  for (ClassId n = 0; n < problem.num_classes(); ++n) {
    const auto& route = problem.routes[n];
    for (std::size_t j = 0; j < route.size(); ++j) {
      s.rate(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(route[j])) = v(layout.rate_index(n, j));
      s.load(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(route[j])) = v(layout.load_index(n, j));
    }
  }
  s.node_input = node_inputs(problem, layout, J, v);
  s.scale.resize(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double c = problem.capacities(m);
    s.scale(m) = scale_of(c, s.node_input(m));
    if (std::abs(s.node_input(m) - c) <= 1e-12 * std::max(1.0, c)) s.boundary_nodes.push_back(static_cast<NodeId>(m));
  }
  s.hops = std::move(v);
  return s;
}

void check_profile(const ScalingProblem& problem, const LongSessionProfile& J) {
  if (J.size() != problem.num_classes()) throw DomainError("long-session profile length must equal the class count");
  for (int j : J)
    if (j < 0) throw DomainError("long-session counts must be non-negative");
}

}  // namespace

Eigen::VectorXd unscaled_point(const ScalingProblem& problem, const HopLayout& layout) {
  Eigen::VectorXd v(layout.size());
  for (ClassId n = 0; n < problem.num_classes(); ++n) {
    for (std::size_t j = 0; j < layout.route_length(n); ++j) {
      v(layout.rate_index(n, j)) = problem.entry_rates(static_cast<Eigen::Index>(n));
      v(layout.load_index(n, j)) = problem.entry_loads(static_cast<Eigen::Index>(n));
    }
  }
  return v;
}

Eigen::VectorXd domain_upper(const ScalingProblem& problem, const HopLayout& layout) {
  return unscaled_point(problem, layout);
}

Eigen::VectorXd node_inputs(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                            const Eigen::VectorXd& v) {
  Eigen::VectorXd input = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.num_nodes()));
  for (NodeId m = 0; m < problem.num_nodes(); ++m) {
    double sum = 0.0;
    for (auto [n, j] : layout.hops_at(m)) sum += J[n] * v(layout.rate_index(n, j)) + v(layout.load_index(n, j));
    input(static_cast<Eigen::Index>(m)) = sum;
  }
  return input;
}

Eigen::VectorXd node_scales(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                            const Eigen::VectorXd& v) {
  Eigen::VectorXd input = node_inputs(problem, layout, J, v);
  return problem.capacities.binaryExpr(input, [](double c, double x) { return scale_of(c, x); });
}

Eigen::VectorXd apply_T(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                        const Eigen::VectorXd& v) {
  check_profile(problem, J);
  const Eigen::VectorXd scale = node_scales(problem, layout, J, v);
  Eigen::VectorXd out = v;
  for (ClassId n = 0; n < problem.num_classes(); ++n) {
    const auto& route = problem.routes[n];
    for (std::size_t j = 1; j < route.size(); ++j) {
      const double s = scale(static_cast<Eigen::Index>(route[j - 1]));
      out(layout.rate_index(n, j)) = v(layout.rate_index(n, j - 1)) * s;
      out(layout.load_index(n, j)) = v(layout.load_index(n, j - 1)) * s;
    }
  }
  reset_entries(problem, layout, out);
  return out;
}

namespace {

// Kahn order over the upstream graph, empty if there is a cycle.
std::vector<NodeId> topological_order(const ScalingProblem& problem) {
  const std::size_t M = problem.num_nodes();
  std::vector<std::vector<NodeId>> succ(M);
  std::vector<int> indegree(M, 0);
  for (const auto& route : problem.routes) {
    for (std::size_t j = 1; j < route.size(); ++j) {
      auto& out = succ[route[j - 1]];
      if (std::find(out.begin(), out.end(), route[j]) == out.end()) {
        out.push_back(route[j]);
        ++indegree[route[j]];
      }
    }
  }
  std::queue<NodeId> ready;
  for (NodeId m = 0; m < M; ++m)
    if (indegree[m] == 0) ready.push(m);
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId m = ready.front();
    ready.pop();
    order.push_back(m);
    for (NodeId k : succ[m])
      if (--indegree[k] == 0) ready.push(k);
  }
  if (order.size() != M) order.clear();
  return order;
}

ScaledSolution solve_feedforward(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                                 const std::vector<NodeId>& order) {
  Eigen::VectorXd v = unscaled_point(problem, layout);
  for (NodeId m : order) {
    double input = 0.0;
    for (auto [n, j] : layout.hops_at(m)) input += J[n] * v(layout.rate_index(n, j)) + v(layout.load_index(n, j));
    const double s = scale_of(problem.capacities(static_cast<Eigen::Index>(m)), input);
    for (auto [n, j] : layout.hops_at(m)) {
      if (j + 1 >= layout.route_length(n)) continue;
      v(layout.rate_index(n, j + 1)) = v(layout.rate_index(n, j)) * s;
      v(layout.load_index(n, j + 1)) = v(layout.load_index(n, j)) * s;
    }
  }
  const double residual = (apply_T(problem, layout, J, v) - v).lpNorm<Eigen::Infinity>();
  ScaledSolution s = assemble(problem, layout, J, std::move(v));
  s.feedforward = true;
  s.iterations = 1;
  s.residual = residual;
  return s;
}

ScaledSolution iterate(const ScalingProblem& problem, const HopLayout& layout, const LongSessionProfile& J,
                       Eigen::VectorXd v, const SolverOptions& options) {
  if (!(options.damping > 0.0 && options.damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
  const Eigen::VectorXd upper = domain_upper(problem, layout);
  reset_entries(problem, layout, v);
  v = v.cwiseMax(0.0).cwiseMin(upper);

  double residual = 0.0;
  for (long it = 0; it < options.max_iter; ++it) {
    Eigen::VectorXd next = apply_T(problem, layout, J, v);
    residual = (next - v).lpNorm<Eigen::Infinity>();
    if (residual < options.tol) {
      ScaledSolution s = assemble(problem, layout, J, std::move(v));
      s.iterations = it;
      s.residual = residual;
      return s;
    }
    if (options.damping < 1.0) next = (1.0 - options.damping) * v + options.damping * next;
    v = next.cwiseMax(0.0).cwiseMin(upper);
  }
  std::ostringstream os;
  os << "rate-scaling iteration did not converge in " << options.max_iter << " sweeps (residual " << residual << ")";
  throw ConvergenceError(os.str(), residual, options.max_iter);
}

}  // namespace

bool is_feedforward(const ScalingProblem& problem) {
  return problem.num_nodes() == 0 || !topological_order(problem).empty();
}

ScaledSolution solve(const ScalingProblem& problem, const LongSessionProfile& J, const SolverOptions& options) {
  check_profile(problem, J);
  const HopLayout layout(problem);
  if (!options.force_iterative) {
    auto order = topological_order(problem);
    if (!order.empty()) return solve_feedforward(problem, layout, J, order);
  }
  return iterate(problem, layout, J, unscaled_point(problem, layout), options);
}

ScaledSolution solve_from(const ScalingProblem& problem, const LongSessionProfile& J, Eigen::VectorXd start,
                          const SolverOptions& options) {
  check_profile(problem, J);
  const HopLayout layout(problem);
  if (start.size() != layout.size()) throw DomainError("starting point has the wrong dimension");
  return iterate(problem, layout, J, std::move(start), options);
}

double contraction_ratio(const ScalingProblem& problem, const LongSessionProfile& J, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v) {
  const HopLayout layout(problem);
  const double before = (u - v).norm();
  if (before == 0.0) return 0.0;
  return (apply_T(problem, layout, J, u) - apply_T(problem, layout, J, v)).norm() / before;
}

bool contraction_check(const ScalingProblem& problem, const LongSessionProfile& J, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v) {
  const HopLayout layout(problem);
  const double before = (u - v).norm();
  const double after = (apply_T(problem, layout, J, u) - apply_T(problem, layout, J, v)).norm();
  return after <= before * (1.0 + 1e-12) + 1e-15;
}

}  // namespace tailnet
