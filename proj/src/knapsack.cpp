#include "tailnet/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "tailnet/error.hpp"

namespace tailnet {

namespace {

bool same_kappa(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

std::vector<ClassId> heavy_classes(const NetworkSpec& spec) {
  std::vector<ClassId> out;
  for (ClassId n = 0; n < spec.num_classes(); ++n)
    if (!spec.traffic_class(n).duration.light_tailed) out.push_back(n);
  return out;
}

struct Candidate {
  double kappa;
  LongSessionProfile J;
  bool operator>(const Candidate& o) const { return kappa > o.kappa || (kappa == o.kappa && J > o.J); }
};

}  // namespace

Feasibility feasibility(const ScaledSolution& solution, const LongSessionProfile& J, NodeId m, double capacity,
                        double tol_feas) {
  const auto col = static_cast<Eigen::Index>(m);
  double long_rate = 0.0;
  for (std::size_t n = 0; n < J.size(); ++n) long_rate += J[n] * solution.rate(static_cast<Eigen::Index>(n), col);
  const double mean_load = solution.load.col(col).sum();
  Feasibility f;
  f.slack = long_rate + mean_load - capacity;
  f.feasible = f.slack > tol_feas;
  f.boundary = std::abs(f.slack) <= tol_feas;
  return f;
}

Feasibility feasibility(const NetworkSpec& spec, const LongSessionProfile& J, NodeId m,
                        const KnapsackOptions& options) {
  if (m >= spec.num_nodes()) throw DomainError("node id out of range");
  const auto solution = solve(ScalingProblem::from(spec), J, options.solver);
  return feasibility(solution, J, m, spec.capacity(m), options.tol_feas);
}

double profile_exponent(const NetworkSpec& spec, const LongSessionProfile& J) {
  double kappa = 0.0;
  for (ClassId n = 0; n < J.size(); ++n) {
    if (J[n] == 0) continue;
    const auto& law = spec.traffic_class(n).duration;
    kappa += law.light_tailed ? std::numeric_limits<double>::infinity() : J[n] * law.beta;
  }
  return kappa;
}

double default_kappa_cap(const NetworkSpec& spec, NodeId m) {
  double beta_min = std::numeric_limits<double>::infinity();
  for (ClassId n : heavy_classes(spec)) beta_min = std::min(beta_min, spec.traffic_class(n).duration.beta);
  double min_rate = std::numeric_limits<double>::infinity();
  for (ClassId n : classes_at_node(spec, m))
    if (!spec.traffic_class(n).duration.light_tailed) min_rate = std::min(min_rate, spec.traffic_class(n).rate);
  if (!std::isfinite(min_rate)) return 0.0;
  return 4.0 * beta_min * std::ceil(spec.capacity(m) / min_rate);
}

NodeExponent optimal_profile(const NetworkSpec& spec, NodeId m, const KnapsackOptions& options) {
  if (m >= spec.num_nodes()) throw DomainError("node id out of range");
  const ScalingProblem problem = ScalingProblem::from(spec);
  const auto heavy = heavy_classes(spec);

  NodeExponent out;
  out.node = m;
  out.kappa_cap = options.kappa_cap.value_or(default_kappa_cap(spec, m));

  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
  std::set<LongSessionProfile> seen;
  LongSessionProfile zero(spec.num_classes(), 0);
  frontier.push({0.0, zero});
  seen.insert(zero);

  while (!frontier.empty()) {
    Candidate c = frontier.top();
    frontier.pop();
    if (c.kappa > out.kappa_cap && !same_kappa(c.kappa, out.kappa_cap)) break;
    if (out.feasible_found && !same_kappa(c.kappa, out.kappa)) break;

    ++out.profiles_examined;
    auto solution = solve(problem, c.J, options.solver);
    const auto f = feasibility(solution, c.J, m, spec.capacity(m), options.tol_feas);
    if (f.feasible) {
      if (!out.feasible_found) {
        out.feasible_found = true;
        out.kappa = c.kappa;
        out.slack = f.slack;
      }
      out.optima.push_back(c.J);
      out.solutions.push_back(std::move(solution));
      continue;
    }
    if (out.feasible_found) continue;
    for (ClassId n : heavy) {
      LongSessionProfile next = c.J;
      ++next[n];
      if (!seen.insert(next).second) continue;
      frontier.push({c.kappa + spec.traffic_class(n).duration.beta, std::move(next)});
    }
  }
  // Canonical order; the queue breaks kappa ties lexicographically already.
  if (!out.optima.empty() && !std::is_sorted(out.optima.begin(), out.optima.end())) {
    std::vector<std::size_t> idx(out.optima.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return out.optima[a] < out.optima[b]; });
    std::vector<LongSessionProfile> optima;
    std::vector<ScaledSolution> solutions;
    for (auto i : idx) {
      optima.push_back(out.optima[i]);
      solutions.push_back(out.solutions[i]);
    }
    out.optima = std::move(optima);
    out.solutions = std::move(solutions);
    out.slack = feasibility(out.solutions.front(), out.optima.front(), m, spec.capacity(m), options.tol_feas).slack;
  }
  // Summed in class order so both searches report the same bits.
  if (out.feasible_found) out.kappa = profile_exponent(spec, out.optima.front());
  return out;
}

NodeExponent brute_force_profile(const NetworkSpec& spec, NodeId m, double kappa_cap,
                                 const KnapsackOptions& options) {
  if (m >= spec.num_nodes()) throw DomainError("node id out of range");
  const ScalingProblem problem = ScalingProblem::from(spec);
  const auto heavy = heavy_classes(spec);

  NodeExponent out;
  out.node = m;
  out.kappa_cap = kappa_cap;

  std::vector<std::pair<double, LongSessionProfile>> feasible;
  LongSessionProfile J(spec.num_classes(), 0);
  std::function<void(std::size_t, double)> enumerate = [&](std::size_t i, double kappa) {
    if (i == heavy.size()) {
      ++out.profiles_examined;
      auto solution = solve(problem, J, options.solver);
      if (feasibility(solution, J, m, spec.capacity(m), options.tol_feas).feasible) feasible.emplace_back(kappa, J);
      return;
    }
    const double beta = spec.traffic_class(heavy[i]).duration.beta;
    for (int k = 0;; ++k) {
      const double next = kappa + k * beta;
      if (next > kappa_cap && !same_kappa(next, kappa_cap)) break;
      J[heavy[i]] = k;
      enumerate(i + 1, next);
    }
    J[heavy[i]] = 0;
  };
  enumerate(0, 0.0);

  if (feasible.empty()) return out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [k, _] : feasible) best = std::min(best, k);
  out.feasible_found = true;
  out.kappa = best;
  for (const auto& [k, profile] : feasible)
    if (same_kappa(k, best)) out.optima.push_back(profile);
  std::sort(out.optima.begin(), out.optima.end());
  for (const auto& profile : out.optima) out.solutions.push_back(solve(problem, profile, options.solver));
  out.slack = feasibility(out.solutions.front(), out.optima.front(), m, spec.capacity(m), options.tol_feas).slack;
  out.kappa = profile_exponent(spec, out.optima.front());
  return out;
}

ExponentReport analyze(const NetworkSpec& spec, const KnapsackOptions& options) {
  require_valid(spec);
  ExponentReport report;
  for (NodeId m = 0; m < spec.num_nodes(); ++m) report.nodes.push_back(optimal_profile(spec, m, options));
  return report;
}

double joint_exponent(const ExponentReport& report, const std::vector<NodeId>& node_set) {
  if (node_set.empty()) throw DomainError("joint exponent needs at least one node");
  double kappa = 0.0;
  for (NodeId m : node_set) {
    if (m >= report.nodes.size()) throw DomainError("node id out of range");
    const auto& entry = report.nodes[m];
    if (!entry.feasible_found) {
      std::ostringstream os;
      os << "node " << m << " has no overloading profile with kappa <= " << entry.kappa_cap;
      throw CapExhaustedError(os.str());
    }
    kappa = std::max(kappa, entry.kappa);
  }
  return kappa;
}

}  // namespace tailnet
