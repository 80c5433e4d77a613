#include "tailnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tailnet/error.hpp"

namespace tailnet {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Number of leading slots on which the survival function is clamped at 1.
long long saturated_prefix(const DurationLaw& law) {
  double edge = law.light_tailed ? 1.0 + std::log(law.alpha) / law.beta
                                 : std::pow(law.alpha, 1.0 / (1.0 + law.beta));
  if (edge < 1.0) return 0;
  auto k = static_cast<long long>(std::floor(edge));
  while (k >= 1 && law.survival(k) < 1.0) --k;
  while (law.survival(k + 1) >= 1.0) ++k;
  return k;
}

// sum_{k >= first} alpha * k^-(1+beta), first >= 1.
long double pareto_tail_sum(double alpha, double beta, long long first) {
  constexpr long long kDirectTerms = 200;
  const long double s = 1.0L + beta;
  const long double a = alpha;
  const long long last = first + kDirectTerms - 1;
  long double direct = 0.0L;
  for (long long k = last; k >= first; --k) direct += a * std::pow(static_cast<long double>(k), -s);
  // Euler-Maclaurin remainder for sum_{k > last}.
  const long double x = static_cast<long double>(last + 1);
  const long double fx = a * std::pow(x, -s);
  const long double x2 = x * x;
  const long double s3 = s * (s + 1.0L) * (s + 2.0L);
  const long double remainder = a * std::pow(x, static_cast<long double>(-beta)) / beta + fx / 2.0L +
                                s * fx / (12.0L * x) - s3 * fx / (720.0L * x * x2) +
                                s3 * (s + 3.0L) * (s + 4.0L) * fx / (30240.0L * x * x2 * x2);
  return direct + remainder;
}

}  // namespace

double DurationLaw::survival(long long k) const {
  if (k <= 1) return std::min(1.0, alpha);
  const double kd = static_cast<double>(k);
  const double tail = light_tailed ? alpha * std::exp(-beta * (kd - 1.0)) : alpha * std::pow(kd, -(1.0 + beta));
  return std::min(1.0, tail);
}

double mean_duration(const DurationLaw& law) {
  if (!positive_finite(law.alpha)) throw ConfigError("duration alpha must be a positive finite number");
  if (!positive_finite(law.beta)) throw ConfigError("duration beta must be a positive finite number");

  const long long saturated = saturated_prefix(law);
  if (law.light_tailed) {
    // Geometric tail after the saturated prefix.
    const double head = law.alpha * std::exp(-law.beta * static_cast<double>(saturated));
    return static_cast<double>(saturated) + head / -std::expm1(-law.beta);
  }
  return static_cast<double>(saturated + pareto_tail_sum(law.alpha, law.beta, saturated + 1));
}

NetworkSpec::NetworkSpec(std::vector<double> capacities, std::vector<TrafficClass> classes)
    : capacities_(std::move(capacities)), classes_(std::move(classes)) {
  loads_.reserve(classes_.size());
  for (const auto& c : classes_) {
    double load = std::numeric_limits<double>::quiet_NaN();
    try {
      load = c.lambda * c.rate * mean_duration(c.duration);
    } catch (const ConfigError&) {
    }
    loads_.push_back(load);
  }
}

std::optional<std::size_t> NetworkSpec::hop_index(ClassId n, NodeId m) const {
  const auto& route = classes_.at(n).route;
  auto it = std::find(route.begin(), route.end(), m);
  if (it == route.end()) return std::nullopt;
  return static_cast<std::size_t>(it - route.begin());
}

std::vector<ClassId> classes_at_node(const NetworkSpec& spec, NodeId m) {
  std::vector<ClassId> out;
  for (ClassId n = 0; n < spec.num_classes(); ++n)
    if (spec.hop_index(n, m)) out.push_back(n);
  return out;
}

Upstream upstream(const NetworkSpec& spec, ClassId n, NodeId m) {
  if (n >= spec.num_classes()) throw DomainError("class id out of range");
  auto hop = spec.hop_index(n, m);
  if (!hop) {
    std::ostringstream os;
    os << "class " << n << " does not visit node " << m;
    throw DomainError(os.str());
  }
  if (*hop == 0) return kEntry;
  return spec.traffic_class(n).route[*hop - 1];
}

double node_load(const NetworkSpec& spec, NodeId m) {
  double sum = 0.0;
  for (ClassId n : classes_at_node(spec, m)) sum += spec.mean_load(n);
  return sum;
}

const char* to_string(Violation v) {
  switch (v) {
    case Violation::kNoNodes: return "no_nodes";
    case Violation::kBadCapacity: return "bad_capacity";
    case Violation::kNoClasses: return "no_classes";
    case Violation::kBadLambda: return "bad_lambda";
    case Violation::kBadRate: return "bad_rate";
    case Violation::kBadAlpha: return "bad_alpha";
    case Violation::kBadBeta: return "bad_beta";
    case Violation::kEmptyRoute: return "empty_route";
    case Violation::kUnknownNode: return "unknown_node";
    case Violation::kRouteRevisitsNode: return "route_revisits_node";
    case Violation::kUnstableNode: return "unstable_node";
  }
  return "unknown";
}

ValidationReport validate(const NetworkSpec& spec) {
  ValidationReport report;
  auto add = [&](Violation kind, std::optional<ClassId> n, std::optional<NodeId> m, std::optional<std::size_t> idx,
                 std::string msg) { report.issues.push_back({kind, n, m, idx, std::move(msg)}); };

  if (spec.num_nodes() == 0) add(Violation::kNoNodes, {}, {}, {}, "network has no nodes");
  if (spec.num_classes() == 0) add(Violation::kNoClasses, {}, {}, {}, "network has no traffic classes");

  for (NodeId m = 0; m < spec.num_nodes(); ++m) {
    if (!positive_finite(spec.capacity(m))) {
      std::ostringstream os;
      os << "network.capacities[" << m << "]: capacity must be positive, got " << spec.capacity(m);
      add(Violation::kBadCapacity, {}, m, {}, os.str());
    }
  }

  bool loads_known = true;
  for (ClassId n = 0; n < spec.num_classes(); ++n) {
    const auto& c = spec.traffic_class(n);
    auto param = [&](Violation kind, const char* name, double value) {
      if (positive_finite(value)) return;
      std::ostringstream os;
      os << "network.classes[" << n << "]." << name << ": must be positive, got " << value;
      add(kind, n, {}, {}, os.str());
      loads_known = false;
    };
    param(Violation::kBadLambda, "lambda", c.lambda);
    param(Violation::kBadRate, "rate", c.rate);
    param(Violation::kBadAlpha, "alpha", c.duration.alpha);
    param(Violation::kBadBeta, "beta", c.duration.beta);

    if (c.route.empty()) {
      std::ostringstream os;
      os << "network.classes[" << n << "].route: route is empty";
      add(Violation::kEmptyRoute, n, {}, {}, os.str());
    }
    for (std::size_t i = 0; i < c.route.size(); ++i) {
      const NodeId m = c.route[i];
      if (m >= spec.num_nodes()) {
        std::ostringstream os;
        os << "network.classes[" << n << "].route[" << i << "]: unknown node " << m;
        add(Violation::kUnknownNode, n, m, i, os.str());
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (c.route[j] == m) {
          std::ostringstream os;
          os << "network.classes[" << n << "].route[" << i << "]: route revisits node " << m;
          add(Violation::kRouteRevisitsNode, n, m, i, os.str());
          break;
        }
      }
    }
  }

  for (NodeId m = 0; m < spec.num_nodes(); ++m) {
    const double load = node_load(spec, m);
    report.loads.push_back({m, spec.capacity(m), load});
    if (loads_known && positive_finite(spec.capacity(m)) && !(load < spec.capacity(m))) {
      std::ostringstream os;
      os << "network.capacities[" << m << "]: node " << m << " unstable, mean load " << load << " >= capacity " << spec.capacity(m);
      add(Violation::kUnstableNode, {}, m, {}, os.str());
    }
  }
  return report;
}

void require_valid(const NetworkSpec& spec) {
  auto report = validate(spec);
  if (report.ok()) return;
  std::ostringstream os;
  os << "invalid network:";
  for (const auto& issue : report.issues) os << "\n  " << issue.message;
  throw ConfigError(os.str());
}

}  // namespace tailnet
