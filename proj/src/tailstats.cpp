#include "tailnet/tailstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "tailnet/error.hpp"

namespace tailnet {

namespace {

constexpr std::size_t kMinPositive = 1000;

std::vector<double> sorted_positive(std::span<const double> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (double x : samples)
    if (x > 0.0) out.push_back(x);
  std::sort(out.begin(), out.end());
  return out;
}

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
};

LineFit least_squares(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  LineFit fit;
  const auto k = x.size();
  if (k < 3) return fit;
  const Eigen::ArrayXd dx = x - x.mean();
  const double sxx = dx.square().sum();
  if (sxx <= 0.0) return fit;
  fit.slope = (dx * (y - y.mean())).sum() / sxx;
  const Eigen::ArrayXd resid = y - y.mean() - fit.slope * dx;
  fit.stderr_ = std::sqrt(resid.square().sum() / static_cast<double>(k - 2) / sxx);
  return fit;
}

TailEstimate base_estimate(TailMethod method, std::span<const double> samples, const std::vector<double>& positive) {
  TailEstimate e;
  e.method = method;
  e.exponent = std::numeric_limits<double>::quiet_NaN();
  e.stderr_ = std::numeric_limits<double>::quiet_NaN();
  e.n_samples = samples.size();
  e.n_positive = positive.size();
  e.zero_fraction = samples.empty() ? 0.0 : 1.0 - static_cast<double>(positive.size()) / samples.size();
  if (positive.size() < kMinPositive) {
    e.low_confidence = true;
    e.note = "fewer than 1000 positive samples";
  }
  return e;
}

}  // namespace

std::vector<CcdfPoint> empirical_ccdf(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("empirical CCDF of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.push_back({sorted[i], static_cast<double>(sorted.size() - 1 - i) / n});
  }
  return out;
}

const char* to_string(TailMethod method) {
  return method == TailMethod::kHill ? "hill" : "ccdf_regression";
}

TailEstimate fit_ccdf_regression(std::span<const double> samples, const TailOptions& options) {
  if (!(options.lower_quantile > 0.0 && options.lower_quantile < options.upper_quantile &&
        options.upper_quantile < 1.0))
    throw DomainError("tail window must satisfy 0 < lower < upper < 1");
  const auto positive = sorted_positive(samples);
  TailEstimate e = base_estimate(TailMethod::kCcdfRegression, samples, positive);
  e.window = {options.lower_quantile, options.upper_quantile};
  if (positive.empty()) {
    e.low_confidence = true;
    e.note = "no positive samples";
    return e;
  }

  const std::size_t n = positive.size();
  const auto lo = static_cast<std::size_t>(std::floor(options.lower_quantile * static_cast<double>(n - 1)));
  const auto hi = static_cast<std::size_t>(std::floor(options.upper_quantile * static_cast<double>(n - 1)));
  const double z_lo = positive[lo];
  const double z_hi = positive[hi];
  e.n_exceedances = n - static_cast<std::size_t>(std::lower_bound(positive.begin(), positive.end(), z_lo) -
                                                 positive.begin());

  // Distinct values in [z_lo, z_hi] with P{W > z} > 0.
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    if (positive[i] < z_lo || positive[i] > z_hi) continue;
    if (i + 1 < n && positive[i + 1] == positive[i]) continue;
    const std::size_t above = n - 1 - i;
    if (above == 0) continue;
    xs.push_back(std::log(positive[i]));
    ys.push_back(std::log(static_cast<double>(above) / static_cast<double>(n)));
  }
  if (xs.size() < 3) {
    e.low_confidence = true;
    e.note = "no tail variation in the window";
    return e;
  }
  const Eigen::ArrayXd x = Eigen::Map<const Eigen::ArrayXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const Eigen::ArrayXd y = Eigen::Map<const Eigen::ArrayXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const LineFit fit = least_squares(x, y);
  e.exponent = -fit.slope;
  e.stderr_ = fit.stderr_;
  if (e.n_exceedances < options.min_exceedances) {
    e.low_confidence = true;
    e.note = "too few exceedances in the window";
  }
  if (!(e.exponent > 0.0)) {
    e.low_confidence = true;
    e.note = "non-decreasing CCDF in the window";
  }

  // Curvature: slopes of the two halves of the window. The OLS error of a
  // CCDF fit ignores the dependence between cumulative points, so each half
  // uses at least the Hill-type error slope / sqrt(exceedances).
  const Eigen::Index half = x.size() / 2;
  if (half >= 3 && x.size() - half >= 3) {
    const LineFit lower = least_squares(x.head(half), y.head(half));
    const LineFit upper = least_squares(x.tail(x.size() - half), y.tail(x.size() - half));
    const double exc_lower = static_cast<double>(e.n_exceedances);
    const double exc_upper = std::max(1.0, n * std::exp(y(half)));
    const double se_lower = std::max(lower.stderr_, std::abs(lower.slope) / std::sqrt(exc_lower));
    const double se_upper = std::max(upper.stderr_, std::abs(upper.slope) / std::sqrt(exc_upper));
    if (std::abs(lower.slope - upper.slope) > 3.0 * std::hypot(se_lower, se_upper)) {
      e.non_power_law = true;
      if (e.note.empty()) e.note = "split-window slopes disagree";
    }
  }
  return e;
}

TailEstimate fit_hill(std::span<const double> samples, const TailOptions& options) {
  const auto positive = sorted_positive(samples);
  TailEstimate e = base_estimate(TailMethod::kHill, samples, positive);
  const std::size_t n = positive.size();
  std::size_t k = options.hill_k.value_or(
      std::max<std::size_t>(30, static_cast<std::size_t>(std::ceil(0.001 * static_cast<double>(n)))));
  if (n < 2) {
    e.low_confidence = true;
    e.note = "no positive samples";
    return e;
  }
  k = std::min(k, n - 1);
  e.window = {static_cast<double>(k), static_cast<double>(k)};
  e.n_exceedances = k;

  const double threshold = std::log(positive[n - 1 - k]);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(positive[n - 1 - i]) - threshold;
  const double mean_excess = sum / static_cast<double>(k);
  if (!(mean_excess > 0.0)) {
    e.low_confidence = true;
    e.note = "no tail variation in the top order statistics";
    return e;
  }
  e.exponent = 1.0 / mean_excess;
  e.stderr_ = e.exponent / std::sqrt(static_cast<double>(k));
  if (k < options.min_exceedances) {
    e.low_confidence = true;
    e.note = "too few order statistics";
  }
  return e;
}

std::vector<TailEstimate> fit_tail(std::span<const double> samples, const TailOptions& options) {
  return {fit_ccdf_regression(samples, options), fit_hill(samples, options)};
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

ComparisonVerdict compare(const TailEstimate& estimate, double predicted, double tolerance) {
  ComparisonVerdict v;
  v.predicted = predicted;
  v.estimated = estimate.exponent;
  v.tolerance = tolerance;
  v.low_confidence = estimate.low_confidence;
  v.non_power_law = estimate.non_power_law;
  v.relative_error = std::abs(estimate.exponent - predicted) / predicted;
  if (estimate.low_confidence || !std::isfinite(estimate.exponent) || !std::isfinite(predicted)) {
    v.verdict = Verdict::kInconclusive;
  } else {
    v.verdict = v.relative_error <= tolerance ? Verdict::kPass : Verdict::kFail;
  }
  return v;
}

}  // namespace tailnet
