#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tailnet {

struct CcdfPoint {
  double z;
  double survival;  // fraction of samples strictly greater than z
};

/// Empirical P{W > z} at each distinct sample value, increasing z.
/// Throws DomainError on empty input.
std::vector<CcdfPoint> empirical_ccdf(std::span<const double> samples);

enum class TailMethod { kCcdfRegression, kHill };

const char* to_string(TailMethod method);

struct TailOptions {
  double lower_quantile = 0.99;
  double upper_quantile = 0.9999;
  std::optional<std::size_t> hill_k;  // default max(30, 0.1% of positive samples)
  std::size_t min_exceedances = 30;
};

struct TailEstimate {
  TailMethod method = TailMethod::kCcdfRegression;
  double exponent = 0.0;  // estimated survival exponent kappa
  double stderr_ = 0.0;
  std::pair<double, double> window{0.0, 0.0};  // quantiles, or (k, k) for Hill
  std::size_t n_samples = 0;                   // all samples offered
  std::size_t n_positive = 0;                  // samples used (zeros dropped)
  std::size_t n_exceedances = 0;
  double zero_fraction = 0.0;
  bool low_confidence = false;
  bool non_power_law = false;  // split-window slopes disagree (regression only)
  std::string note;
};

/// Least squares of log P{W > z} on log z over the quantile window of the
/// positive samples; exponent = -slope.
TailEstimate fit_ccdf_regression(std::span<const double> samples, const TailOptions& options = {});

/// Hill estimator on the top-k positive order statistics.
TailEstimate fit_hill(std::span<const double> samples, const TailOptions& options = {});

/// Both estimators.
std::vector<TailEstimate> fit_tail(std::span<const double> samples, const TailOptions& options = {});

enum class Verdict { kPass, kFail, kInconclusive };

const char* to_string(Verdict v);

struct ComparisonVerdict {
  double predicted = 0.0;
  double estimated = 0.0;
  double relative_error = 0.0;
  double tolerance = 0.25;
  bool low_confidence = false;
  bool non_power_law = false;
  Verdict verdict = Verdict::kInconclusive;
};

/// |estimate - predicted| / predicted against the tolerance band; low-confidence
/// estimates are always inconclusive.
ComparisonVerdict compare(const TailEstimate& estimate, double predicted, double tolerance = 0.25);

}  // namespace tailnet
