#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tailnet {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream `stream` under master seed `seed`.
/// Class n draws arrivals from stream 2n and durations from stream 2n+1.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

/// Seed of replication i: splitmix64(master XOR i).
constexpr std::uint64_t replication_seed(std::uint64_t master, std::uint64_t i) { return splitmix64(master ^ i); }

/// mt19937_64 wrapper with platform-independent variate generation
/// (the std distributions are implementation-defined).
class Stream {
 public:
  explicit Stream(std::uint64_t seed = 1) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Exact Poisson variate: inversion below mean 10, otherwise a sum of
  /// independent Poisson pieces each with mean below 10.
  long long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(mean);
    const auto pieces = static_cast<long long>(std::ceil(mean / 8.0));
    const double piece = mean / static_cast<double>(pieces);
    long long total = 0;
    for (long long i = 0; i < pieces; ++i) total += poisson_inversion(piece);
    return total;
  }

 private:
  long long poisson_inversion(double mean) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    long long k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  std::mt19937_64 engine_;
};

}  // namespace tailnet
