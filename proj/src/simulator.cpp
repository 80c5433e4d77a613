#include "tailnet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tailnet/error.hpp"

namespace tailnet {

namespace {

constexpr long long kMaxDuration = 1000000000000000000LL;  // 1e18 slots

}  // namespace

long long sample_duration(const DurationLaw& law, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("uniform variate must lie in (0, 1)");
  if (law.survival(1) < u) return 0;
  const double edge = law.light_tailed ? 1.0 + std::log(law.alpha / u) / law.beta
                                       : std::pow(law.alpha / u, 1.0 / (1.0 + law.beta));
  long long k = 1;
  if (edge >= static_cast<double>(kMaxDuration)) {
    k = kMaxDuration;
  } else if (edge > 1.0) {
    k = static_cast<long long>(std::floor(edge));
  }
  // pow/log rounding can put the floor one step off the exact boundary.
  while (k > 1 && law.survival(k) < u) --k;
  while (k < kMaxDuration && law.survival(k + 1) >= u) ++k;
  return k;
}

const char* to_string(WeightMode mode) { return mode == WeightMode::kDemand ? "demand" : "arrival"; }

WeightMode parse_weight_mode(const std::string& name) {
  if (name == "demand") return WeightMode::kDemand;
  if (name == "arrival") return WeightMode::kArrival;
  throw ConfigError("unknown weight_mode '" + name + "' (expected demand or arrival)");
}

namespace {

// Returns capacity left over; fills `served` for classes with positive weight.
double waterfill_into(const Eigen::VectorXd& demand, const Eigen::VectorXd& weight, double capacity,
                      Eigen::VectorXd& served) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index n = 0; n < demand.size(); ++n)
    if (demand(n) > 0.0 && weight(n) > 0.0) active.push_back(n);

  double remaining = capacity;
  while (!active.empty()) {
    double total_weight = 0.0;
    double total_demand = 0.0;
    for (auto n : active) {
      total_weight += weight(n);
      total_demand += demand(n);
    }
    if (total_demand <= remaining) {
      for (auto n : active) served(n) = demand(n);
      return remaining - total_demand;
    }
    std::vector<Eigen::Index> constrained;
    double capped_demand = 0.0;
    for (auto n : active) {
      if (demand(n) <= remaining * weight(n) / total_weight) {
        served(n) = demand(n);
        capped_demand += demand(n);
      } else {
        constrained.push_back(n);
      }
    }
    if (constrained.size() == active.size()) {
      for (auto n : active) served(n) = remaining * weight(n) / total_weight;
      return 0.0;
    }
    remaining -= capped_demand;
    active = std::move(constrained);
  }
  return remaining;
}

}  // namespace

Eigen::VectorXd waterfill(const Eigen::VectorXd& demand, const Eigen::VectorXd& weight, double capacity) {
  Eigen::VectorXd served = Eigen::VectorXd::Zero(demand.size());
  waterfill_into(demand, weight, capacity, served);
  return served;
}

Eigen::VectorXd allocate(const Eigen::VectorXd& demand, const Eigen::VectorXd& arrival, double capacity,
                         WeightMode mode) {
  Eigen::VectorXd served = Eigen::VectorXd::Zero(demand.size());
  if (demand.sum() <= capacity) return demand;
  if (mode == WeightMode::kDemand) {
    waterfill_into(demand, demand, capacity, served);
    return served;
  }
  double left = waterfill_into(demand, arrival, capacity, served);
  if (left > 0.0) {
    // Every class with arrivals is fully served; backlog-only classes share the rest.
    Eigen::VectorXd rest = demand - served;
    Eigen::VectorXd extra = Eigen::VectorXd::Zero(demand.size());
    Eigen::VectorXd weight = (arrival.array() > 0.0).select(Eigen::VectorXd::Zero(demand.size()), rest);
    waterfill_into(rest, weight, left, extra);
    served += extra;
  }
  return served;
}

SimState initial_state(const NetworkSpec& spec, std::uint64_t seed) {
  const auto M = static_cast<Eigen::Index>(spec.num_nodes());
  const auto N = static_cast<Eigen::Index>(spec.num_classes());
  SimState s;
  s.backlog = Eigen::MatrixXd::Zero(M, N);
  s.in_transit = Eigen::MatrixXd::Zero(M, N);
  s.sessions.resize(spec.num_classes());
  s.next_hop = Eigen::MatrixXi::Constant(M, N, -1);
  for (ClassId n = 0; n < spec.num_classes(); ++n) {
    s.arrival_streams.emplace_back(stream_seed(seed, 2 * n));
    s.duration_streams.emplace_back(stream_seed(seed, 2 * n + 1));
    const auto& route = spec.traffic_class(n).route;
    for (std::size_t j = 0; j + 1 < route.size(); ++j)
      s.next_hop(static_cast<Eigen::Index>(route[j]), static_cast<Eigen::Index>(n)) = static_cast<int>(route[j + 1]);
  }
  return s;
}

SlotFlows step(const NetworkSpec& spec, SimState& state, WeightMode mode) {
  const auto M = static_cast<Eigen::Index>(spec.num_nodes());
  const auto N = static_cast<Eigen::Index>(spec.num_classes());
  const long long t = state.slot;

  SlotFlows flows;
  flows.arrival = state.in_transit;
  state.in_transit.setZero();

  long long total_active = 0;
  for (Eigen::Index n = 0; n < N; ++n) {
    const auto& cls = spec.traffic_class(static_cast<ClassId>(n));
    auto& book = state.sessions[static_cast<std::size_t>(n)];
    while (!book.expiring.empty() && book.expiring.begin()->first <= t) {
      book.active -= book.expiring.begin()->second;
      book.expiring.erase(book.expiring.begin());
    }
    const long long arrivals = state.arrival_streams[static_cast<std::size_t>(n)].poisson(cls.lambda);
    auto& durations = state.duration_streams[static_cast<std::size_t>(n)];
    for (long long i = 0; i < arrivals; ++i) {
      const long long tau = sample_duration(cls.duration, durations.uniform());
      if (tau == 0) continue;
      const long long end = tau >= kMaxDuration - t ? kMaxDuration : t + tau;
      ++book.expiring[end];
      ++book.active;
    }
    total_active += book.active;

    const double fluid = cls.rate * static_cast<double>(book.active);
    flows.arrival(static_cast<Eigen::Index>(cls.route.front()), n) += fluid;
    flows.injected += fluid;
  }
  if (total_active > state.session_limit) {
    std::ostringstream os;
    os << "active sessions " << total_active << " exceed the limit " << state.session_limit << " at slot " << t;
    throw GuardError(os.str(), t);
  }

  flows.demand = state.backlog + flows.arrival;
  flows.served = Eigen::MatrixXd::Zero(M, N);
  for (Eigen::Index m = 0; m < M; ++m) {
    flows.served.row(m) = allocate(flows.demand.row(m).transpose(), flows.arrival.row(m).transpose(),
                                   spec.capacity(static_cast<NodeId>(m)), mode)
                              .transpose();
  }
  state.backlog = flows.demand - flows.served;
  if ((state.backlog.array() < 0.0).any() || (flows.served.array() < 0.0).any())
    throw std::logic_error("negative fluid in simulator state");

  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index n = 0; n < N; ++n) {
      const double out = flows.served(m, n);
      if (out == 0.0) continue;
      const int next = state.next_hop(m, n);
      if (next < 0) {
        flows.exited += out;
      } else {
        state.in_transit(next, n) += out;
      }
    }
  }
  state.injected += flows.injected;
  state.exited += flows.exited;
  ++state.slot;
  return flows;
}

SimTrace run(const NetworkSpec& spec, const SimConfig& config) {
  require_valid(spec);
  if (config.horizon <= 0) throw ConfigError("horizon must be positive");
  if (config.warmup < 0 || config.warmup >= config.horizon) throw ConfigError("warmup must satisfy 0 <= warmup < horizon");
  if (config.stride <= 0) throw ConfigError("stride must be positive");

  SimTrace trace;
  trace.config = config;
  if (trace.config.monitored.empty())
    for (NodeId m = 0; m < spec.num_nodes(); ++m) trace.config.monitored.push_back(m);
  for (NodeId m : trace.config.monitored)
    if (m >= spec.num_nodes()) throw ConfigError("monitored node " + std::to_string(m) + " does not exist");
  trace.first_slot = config.warmup + config.stride - 1;

  const long long samples = (config.horizon - config.warmup) / config.stride;
  for (NodeId m : trace.config.monitored) {
    NodeTrace nt;
    nt.node = m;
    nt.workload.reserve(static_cast<std::size_t>(samples));
    trace.nodes.push_back(std::move(nt));
  }

  SimState state = initial_state(spec, config.seed);
  state.session_limit = config.session_limit;
  std::vector<long long> busy(trace.nodes.size(), 0);
  std::vector<double> workload_sum(trace.nodes.size(), 0.0);
  std::vector<double> served_sum(trace.nodes.size(), 0.0);
  double active_sum = 0.0;

  for (long long t = 0; t < config.horizon; ++t) {
    const SlotFlows flows = step(spec, state, config.weight_mode);
    if (t < config.warmup) continue;
    const bool sample = (t - config.warmup + 1) % config.stride == 0;
    for (std::size_t i = 0; i < trace.nodes.size(); ++i) {
      auto& nt = trace.nodes[i];
      const auto row = static_cast<Eigen::Index>(nt.node);
      const double w = state.backlog.row(row).sum();
      nt.max_workload = std::max(nt.max_workload, w);
      if (w > 0.0) ++busy[i];
      workload_sum[i] += w;
      served_sum[i] += flows.served.row(row).sum();
      if (sample) nt.workload.push_back(w);
    }
    for (const auto& book : state.sessions) active_sum += static_cast<double>(book.active);
  }

  const double span = static_cast<double>(config.horizon - config.warmup);
  for (std::size_t i = 0; i < trace.nodes.size(); ++i) {
    trace.nodes[i].busy_fraction = static_cast<double>(busy[i]) / span;
    trace.nodes[i].mean_workload = workload_sum[i] / span;
    trace.nodes[i].mean_throughput = served_sum[i] / span;
  }
  trace.mean_active_sessions = active_sum / span;
  return trace;
}

}  // namespace tailnet
