#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "tailnet/error.hpp"
#include "tailnet/simulator.hpp"

using namespace tailnet;

namespace {

// Independent oracle: served_n = min(d_n, level * w_n) with the level found by
// bisection so that the total equals min(C, sum d).
Eigen::VectorXd bisection_fill(const Eigen::VectorXd& d, const Eigen::VectorXd& w, double C) {
  auto total = [&](double level) { return d.cwiseMin(level * w).sum(); };
  const double target = std::min(C, (w.array() > 0).select(d, 0.0).sum());
  double lo = 0.0, hi = 1.0;
  while (total(hi) < target && hi < 1e12) hi *= 2;
  for (int i = 0; i < 200; ++i) (total((lo + hi) / 2) < target ? lo : hi) = (lo + hi) / 2;
  return d.cwiseMin(hi * w);
}

}  // namespace

TEST_CASE("sample_duration boundary convention: tau >= k exactly when u <= G(k)") {
  const DurationLaw laws[] = {{1.0, 1.0, false}, {0.5, 2.0, false}, {3.0, 0.4, false}, {2.0, 0.7, true}};
  for (const auto& law : laws) {
    for (long long k = 2; k <= 200; ++k) {
      const double g = law.survival(k);
      if (!(g > 0.0 && g < 1.0)) continue;
      CHECK(sample_duration(law, g) >= k);
      CHECK(sample_duration(law, std::nextafter(g, 1.0)) < k);
    }
  }
  CHECK(sample_duration({1.0, 1.0, false}, std::nextafter(1.0, 0.0)) == 1);
  CHECK(sample_duration({1.0, 1.0, false}, 0.25) == 2);
  CHECK_THROWS_AS(sample_duration({1.0, 1.0, false}, 0.0), DomainError);
  CHECK_THROWS_AS(sample_duration({1.0, 1.0, false}, 1.0), DomainError);
}

TEST_CASE("sample_duration frequencies match the survival function") {
  const DurationLaw law{1.0, 1.0, false};
  Stream rng(1);
  constexpr long long kSamples = 10000000;
  std::vector<long long> at_least(102, 0);
  for (long long i = 0; i < kSamples; ++i) {
    const long long tau = sample_duration(law, rng.uniform());
    for (long long k = 1; k <= std::min<long long>(tau, 101); ++k) ++at_least[static_cast<std::size_t>(k)];
  }
  for (long long k = 1; k <= 100; ++k) {
    const double g = law.survival(k);
    const double sigma = std::sqrt(g * (1 - g) / kSamples);
    CHECK(std::abs(static_cast<double>(at_least[static_cast<std::size_t>(k)]) / kSamples - g) <= 3 * sigma + 1e-12);
  }
}

TEST_CASE("alpha below one: P{tau <= 1} = 1 - G(2) and zero durations have mass 1 - alpha") {
  const DurationLaw law{0.5, 2.0, false};
  CHECK(1.0 - law.survival(2) == doctest::Approx(0.9375));
  CHECK(sample_duration(law, 0.5) == 1);
  CHECK(sample_duration(law, std::nextafter(0.5, 1.0)) == 0);
  Stream rng(7);
  long long zeros = 0, ones = 0;
  constexpr long long kSamples = 1000000;
  for (long long i = 0; i < kSamples; ++i) {
    const long long tau = sample_duration(law, rng.uniform());
    zeros += tau == 0;
    ones += tau == 1;
  }
  auto band = [](double p) { return 4 * std::sqrt(p * (1 - p) / kSamples); };
  CHECK(std::abs(static_cast<double>(zeros + ones) / kSamples - 0.9375) < band(0.9375));
  CHECK(std::abs(static_cast<double>(zeros) / kSamples - 0.5) < band(0.5));
  CHECK(std::abs(static_cast<double>(ones) / kSamples - 0.4375) < band(0.4375));
}

TEST_CASE("Poisson sampler moments") {
  for (double mean : {0.3, 4.0, 25.0}) {
    Stream rng(static_cast<std::uint64_t>(mean * 100));
    double sum = 0, sq = 0;
    constexpr int kSamples = 400000;
    for (int i = 0; i < kSamples; ++i) {
      const double x = static_cast<double>(rng.poisson(mean));
      sum += x;
      sq += x * x;
    }
    const double m = sum / kSamples;
    CHECK(std::abs(m - mean) < 5 * std::sqrt(mean / kSamples));
    CHECK(sq / kSamples - m * m == doctest::Approx(mean).epsilon(0.02));
  }
}

TEST_CASE("uniform variates stay inside the open interval") {
  Stream rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("water-filling examples") {
  Eigen::VectorXd d(2);
  d << 4, 1;
  const auto a = waterfill(d, d, 3);
  CHECK(a(0) == doctest::Approx(2.4));
  CHECK(a(1) == doctest::Approx(0.6));

  // A class whose first-pass share is below its demand stays constrained.
  d << 0.5, 10;
  const auto b = waterfill(d, d, 3);
  CHECK(b(0) == doctest::Approx(3 * 0.5 / 10.5));
  CHECK(b(1) == doctest::Approx(3 * 10 / 10.5));

  // Unequal weights: class 0 is capped at its demand and class 1 takes the rest.
  Eigen::VectorXd w(2);
  d << 1, 10;
  w << 1, 1;
  const auto c = waterfill(d, w, 3);
  CHECK(c(0) == doctest::Approx(1.0));
  CHECK(c(1) == doctest::Approx(2.0));
}

TEST_CASE("water-filling matches the bisection oracle") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 6;
    Eigen::VectorXd d(n), w(n);
    for (int i = 0; i < n; ++i) {
      d(i) = u(rng) < 0.2 ? 0.0 : 5 * u(rng);
      w(i) = u(rng) < 0.2 ? 0.0 : 3 * u(rng);
    }
    const double C = 6 * u(rng) + 0.01;
    const auto served = waterfill(d, w, C);
    const auto oracle = bisection_fill(d, w, C);
    CHECK((served - oracle).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("allocate is work-conserving in both modes") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 5;
    Eigen::VectorXd backlog(n), arrival(n);
    for (int i = 0; i < n; ++i) {
      backlog(i) = u(rng) < 0.3 ? 0.0 : 4 * u(rng);
      arrival(i) = u(rng) < 0.3 ? 0.0 : 2 * u(rng);
    }
    const Eigen::VectorXd demand = backlog + arrival;
    const double C = 5 * u(rng) + 0.01;
    for (auto mode : {WeightMode::kDemand, WeightMode::kArrival}) {
      const auto served = allocate(demand, arrival, C, mode);
      CHECK((served.array() >= 0.0).all());
      CHECK((served.array() <= demand.array() + 1e-12).all());
      CHECK(std::abs(served.sum() - std::min(C, demand.sum())) <= 1e-9 * std::max(1.0, C));
    }
  }
}

TEST_CASE("arrival weighting drains backlog-only classes with leftover capacity") {
  Eigen::VectorXd arrival(3), demand(3);
  arrival << 1.0, 0.5, 0.0;
  demand << 1.0, 0.5, 4.0;  // class 2 has backlog only
  const auto served = allocate(demand, arrival, 3.0, WeightMode::kArrival);
  CHECK(served(0) == doctest::Approx(1.0));
  CHECK(served(1) == doctest::Approx(0.5));
  CHECK(served(2) == doctest::Approx(1.5));
}

TEST_CASE("an empty network stays empty") {
  const NetworkSpec spec({3.0}, {test::heavy_class(1e-12, 1.0, 1.0, 1.0, {0})});
  SimState s = initial_state(spec, 5);
  for (int t = 0; t < 100; ++t) {
    const auto flows = step(spec, s, WeightMode::kDemand);
    CHECK(flows.injected == 0.0);
  }
  CHECK(s.slot == 100);
  CHECK(s.backlog.isZero());
  CHECK(s.in_transit.isZero());
}

TEST_CASE("simulated load matches the mean load when alpha is below one") {
  const NetworkSpec spec({3.0}, {test::heavy_class(0.8, 1.0, 0.5, 1.5, {0})});
  SimConfig cfg;
  cfg.horizon = 400000;
  cfg.warmup = 40000;
  cfg.stride = 50;
  cfg.seed = 5;
  const auto trace = run(spec, cfg);
  CHECK(trace.nodes[0].mean_throughput == doctest::Approx(spec.mean_load(0)).epsilon(0.01));
}

TEST_CASE("per-slot and network conservation on random networks") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 6; ++trial) {
    auto spec = test::random_network(rng, 4, 4);
    // Squeeze capacities toward the load so queues form.
    auto caps = spec.capacities();
    for (NodeId m = 0; m < caps.size(); ++m) caps[m] = std::max(node_load(spec, m) * 1.05, 0.05);
    spec = NetworkSpec(caps, spec.classes());
    const auto mode = trial % 2 ? WeightMode::kArrival : WeightMode::kDemand;
    SimState s = initial_state(spec, static_cast<std::uint64_t>(trial));
    bool busy = false;
    for (int t = 0; t < 20000; ++t) {
      const Eigen::MatrixXd before = s.backlog;
      const auto f = step(spec, s, mode);
      const Eigen::MatrixXd expected = before + f.arrival - f.served;
      CHECK((s.backlog - expected).lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(1.0, expected.lpNorm<Eigen::Infinity>()));
      for (NodeId m = 0; m < spec.num_nodes(); ++m) {
        const auto row = static_cast<Eigen::Index>(m);
        const double served = f.served.row(row).sum();
        const double C = spec.capacity(m);
        CHECK(served <= C * (1 + 1e-9));
        CHECK(std::abs(served - std::min(C, f.demand.row(row).sum())) <= 1e-9 * C);
        busy = busy || s.backlog.row(row).sum() > 0;
      }
      const double stored = s.backlog.sum() + s.in_transit.sum();
      CHECK(std::abs(s.injected - s.exited - stored) <= 1e-9 * std::max(1.0, s.injected));
    }
    CHECK(busy);
  }
}

TEST_CASE("run is deterministic and samples post-warmup at the stride") {
  const NetworkSpec spec({3.0}, {test::heavy_class(0.5, 1.0, 1.0, 1.2, {0})});
  SimConfig cfg;
  cfg.horizon = 20000;
  cfg.warmup = 1003;
  cfg.stride = 7;
  cfg.seed = 42;
  const auto a = run(spec, cfg);
  const auto b = run(spec, cfg);
  REQUIRE(a.nodes.size() == 1);
  CHECK(a.nodes[0].workload.size() == static_cast<std::size_t>((20000 - 1003) / 7));
  CHECK(a.nodes[0].workload == b.nodes[0].workload);
  CHECK(a.slot_of(0) == 1009);
  cfg.seed = 43;
  CHECK(run(spec, cfg).nodes[0].workload != a.nodes[0].workload);
}

TEST_CASE("tiny arrival rate gives an all-zero trace") {
  const NetworkSpec spec({3.0}, {test::heavy_class(1e-9, 1.0, 1.0, 1.2, {0})});
  SimConfig cfg;
  cfg.horizon = 1000;
  cfg.warmup = 0;
  cfg.seed = 1;
  const auto trace = run(spec, cfg);
  for (double w : trace.nodes[0].workload) CHECK(w == 0.0);
  CHECK(trace.mean_active_sessions == 0.0);
}

TEST_CASE("long-run throughput and session count match the mean load") {
  const NetworkSpec spec({3.0}, {test::heavy_class(0.5, 1.0, 1.0, 1.2, {0})});
  SimConfig cfg;
  cfg.horizon = 1000000;
  cfg.warmup = 200000;
  cfg.stride = 100;
  cfg.seed = 2024;
  const auto trace = run(spec, cfg);
  const double rho = spec.mean_load(0);  // 0.5 * zeta(2.2)
  CHECK(trace.nodes[0].mean_throughput == doctest::Approx(rho).epsilon(0.01));
  CHECK(trace.mean_active_sessions == doctest::Approx(0.5 * mean_duration({1.0, 1.2, false})).epsilon(0.02));
}

TEST_CASE("session guard aborts with the offending slot") {
  const NetworkSpec spec({1000.0}, {test::heavy_class(50.0, 1.0, 1.0, 1.0, {0})});
  SimConfig cfg;
  cfg.horizon = 1000;
  cfg.warmup = 0;
  cfg.session_limit = 20;
  try {
    run(spec, cfg);
    FAIL("expected GuardError");
  } catch (const GuardError& e) {
    CHECK(e.slot() >= 0);
    CHECK(e.slot() < 100);
  }
}

TEST_CASE("run rejects bad configs") {
  const NetworkSpec spec({3.0}, {test::heavy_class(0.5, 1.0, 1.0, 1.2, {0})});
  SimConfig cfg;
  cfg.horizon = 10;
  cfg.warmup = 10;
  CHECK_THROWS_AS(run(spec, cfg), ConfigError);
  cfg.warmup = 0;
  cfg.monitored = {3};
  CHECK_THROWS_AS(run(spec, cfg), ConfigError);
  CHECK_THROWS_AS(run(NetworkSpec({0.5}, spec.classes()), SimConfig{}), ConfigError);
}
