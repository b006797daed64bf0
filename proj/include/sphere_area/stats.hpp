#pragma once

// Two-sample and goodness-of-fit statistics used by the experiments.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "sphere_area/errors.hpp"

namespace sphere_area::stats {

struct TestResult {
  double statistic;
  double p_value;
};

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Dual form, fast for small lambda: 1 - sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    const double y8 = std::pow(y, 8);
    const double sum = y * (1.0 + y8 * (1.0 + y8 * y8 * (1.0 + y8 * y8 * y8)));
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sided two-sample Kolmogorov-Smirnov test with the asymptotic
/// p-value (Stephens' small-sample correction).
inline TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 25 || b.size() < 25) throw SizeError("ks_two_sample: both samples need >= 25 points");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double en = std::sqrt(n * m / (n + m));
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

/// One-sample Kolmogorov distance sup |F_n - F| against a continuous CDF.
template <class Cdf>
TestResult ks_one_sample(std::span<const double> sample, Cdf&& cdf) {
  if (sample.size() < 25) throw SizeError("ks_one_sample: need >= 25 points");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double en = std::sqrt(n);
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0)) throw DomainError("chi_square_sf: dof must be > 0");
  if (statistic <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

struct MeanEstimate {
  double mean;
  double std_error;
};

inline MeanEstimate mean_and_error(std::span<const double> x) {
  if (x.size() < 2) throw SizeError("mean_and_error: need >= 2 points");
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(x.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(x.size()))};
}

inline double covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw SizeError("covariance: need equal sizes >= 2");
  const double mx = mean_and_error(x).mean;
  const double my = mean_and_error(y).mean;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size() - 1);
}

/// Ratio of means with a delta-method standard error.
inline MeanEstimate ratio_of_means(std::span<const double> num, std::span<const double> den) {
  const auto a = mean_and_error(num);
  const auto b = mean_and_error(den);
  const double n = static_cast<double>(num.size());
  const double r = a.mean / b.mean;
  const double var_a = a.std_error * a.std_error;
  const double var_b = b.std_error * b.std_error;
  const double cov = covariance(num, den) / n;
  const double var = (var_a - 2.0 * r * cov + r * r * var_b) / (b.mean * b.mean);
  return {r, std::sqrt(std::max(var, 0.0))};
}

/// Batch-means estimate of a time average and its standard error.
inline MeanEstimate batch_means(std::span<const double> series, std::size_t n_batches) {
  if (n_batches < 2 || series.size() < n_batches) throw SizeError("batch_means: too few points");
  const std::size_t len = series.size() / n_batches;
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t k = b * len; k < (b + 1) * len; ++k) s += series[k];
    means[b] = s / static_cast<double>(len);
  }
  return mean_and_error(means);
}

inline double median(std::vector<double> x) {
  if (x.empty()) throw SizeError("median: empty sample");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + mid, x.end());
  double upper = x[mid];
  if (x.size() % 2 == 1) return upper;
  const double lower = *std::max_element(x.begin(), x.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace sphere_area::stats
