#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "tailnet/fixedpoint.hpp"
#include "tailnet/model.hpp"

namespace tailnet::test {

inline TrafficClass heavy_class(double lambda, double rate, double alpha, double beta, std::vector<NodeId> route) {
  return TrafficClass{lambda, rate, DurationLaw{alpha, beta, false}, std::move(route)};
}

/// Heavy-tailed class whose arrival rate is chosen so that rho = target_load.
inline TrafficClass class_with_load(double target_load, double rate, double beta, std::vector<NodeId> route,
                                    double alpha = 1.0) {
  const DurationLaw law{alpha, beta, false};
  return TrafficClass{target_load / (rate * mean_duration(law)), rate, law, std::move(route)};
}

/// Two nodes, class 0 on node 0, class 1 on nodes 0 -> 1, class 2 on node 1.
inline NetworkSpec example1(std::vector<double> caps, std::vector<double> rates, std::vector<double> loads,
                            std::vector<double> betas = {1.0, 1.0, 1.0}) {
  return NetworkSpec(std::move(caps), {class_with_load(loads[0], rates[0], betas[0], {0}),
                                       class_with_load(loads[1], rates[1], betas[1], {0, 1}),
                                       class_with_load(loads[2], rates[2], betas[2], {1})});
}

/// Two nodes, class 0 on 0 -> 1, class 1 on 1 -> 0 (loop-free routes, not feedforward).
inline NetworkSpec example2(std::vector<double> caps, std::vector<double> rates, std::vector<double> loads,
                            std::vector<double> betas = {1.0, 1.0}) {
  return NetworkSpec(std::move(caps), {class_with_load(loads[0], rates[0], betas[0], {0, 1}),
                                       class_with_load(loads[1], rates[1], betas[1], {1, 0})});
}

inline ScalingProblem make_problem(std::vector<double> caps, std::vector<std::vector<NodeId>> routes,
                                   std::vector<double> rates, std::vector<double> loads) {
  ScalingProblem p;
  p.capacities = Eigen::Map<Eigen::VectorXd>(caps.data(), static_cast<Eigen::Index>(caps.size()));
  p.routes = std::move(routes);
  p.entry_rates = Eigen::Map<Eigen::VectorXd>(rates.data(), static_cast<Eigen::Index>(rates.size()));
  p.entry_loads = Eigen::Map<Eigen::VectorXd>(loads.data(), static_cast<Eigen::Index>(loads.size()));
  return p;
}

/// Random loop-free routes over up to max_nodes nodes.
inline std::vector<std::vector<NodeId>> random_routes(std::mt19937_64& rng, std::size_t nodes, std::size_t classes) {
  std::vector<std::vector<NodeId>> routes;
  std::vector<NodeId> perm(nodes);
  for (std::size_t n = 0; n < classes; ++n) {
    std::iota(perm.begin(), perm.end(), NodeId{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto len = std::uniform_int_distribution<std::size_t>(1, nodes)(rng);
    routes.emplace_back(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(len));
  }
  return routes;
}

/// Random stable network: every node has mean load below capacity.
inline NetworkSpec random_network(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_classes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto M = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
  const auto N = std::uniform_int_distribution<std::size_t>(1, max_classes)(rng);
  const auto routes = random_routes(rng, M, N);
  std::vector<TrafficClass> classes;
  std::vector<double> load(M, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    auto c = heavy_class(0.05 + 0.5 * u(rng), 0.2 + 2.0 * u(rng), 0.5 + u(rng), 0.3 + 2.0 * u(rng), routes[n]);
    const double rho = c.lambda * c.rate * mean_duration(c.duration);
    for (NodeId m : c.route) load[m] += rho;
    classes.push_back(std::move(c));
  }
  std::vector<double> caps(M);
  for (std::size_t m = 0; m < M; ++m) caps[m] = load[m] * (1.1 + u(rng)) + 0.5 * u(rng) + 0.1;
  return NetworkSpec(std::move(caps), std::move(classes));
}

inline LongSessionProfile random_profile(std::mt19937_64& rng, std::size_t classes, int max_count) {
  LongSessionProfile J(classes);
  for (auto& j : J) j = std::uniform_int_distribution<int>(0, max_count)(rng);
  return J;
}

/// Uniform point of the invariant box with entry coordinates at their fixed values.
inline Eigen::VectorXd random_point(std::mt19937_64& rng, const ScalingProblem& problem) {
  const HopLayout layout(problem);
  const Eigen::VectorXd upper = domain_upper(problem, layout);
  Eigen::VectorXd v(layout.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng) * upper(i);
  for (ClassId n = 0; n < problem.num_classes(); ++n) {
    v(layout.rate_index(n, 0)) = upper(layout.rate_index(n, 0));
    v(layout.load_index(n, 0)) = upper(layout.load_index(n, 0));
  }
  return v;
}

}  // namespace tailnet::test
