#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "orthoinfer/errors.hpp"

namespace orthoinfer {

// Standard normal CDF. erfc keeps full relative accuracy in the lower tail.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014326779;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Quantile by safeguarded Newton iteration on the CDF, converged to 1e-10.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DataError("normal_quantile: p must lie in (0,1)");
  double lo = -40.0, hi = 40.0;
  // Crude but monotone starting point keeps Newton in its basin.
  double z = (p < 0.5) ? -std::sqrt(-2.0 * std::log(p)) : std::sqrt(-2.0 * std::log(1.0 - p));
  for (int it = 0; it < 200; ++it) {
    double f = normal_cdf(z) - p;
    if (std::abs(f) < 1e-15) break;  // already at the root
    if (f > 0.0) hi = z; else lo = z;
    double d = normal_pdf(z);
    double znew = (d > 0.0) ? z - f / d : 0.5 * (lo + hi);
    if (!(znew > lo && znew < hi)) znew = 0.5 * (lo + hi);  // bisection fallback
    if (std::abs(znew - z) < 1e-13 * (1.0 + std::abs(z))) { z = znew; break; }
    z = znew;
  }
  if (std::abs(normal_cdf(z) - p) > 1e-10) throw NumericError("normal_quantile: no convergence");
  return z;
}

// Median by the midpoint-of-two convention.
inline double median(std::vector<double> v) {
  if (v.empty()) throw DataError("median: empty input");
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return (v.size() % 2 == 1) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Percentile by the nearest-rank rule: value at rank ceil(p*N).
inline double percentile_nearest_rank(std::vector<double> v, double p) {
  if (v.empty()) throw DataError("percentile: empty input");
  if (!(p > 0.0 && p <= 1.0)) throw DataError("percentile: p must lie in (0,1]");
  std::sort(v.begin(), v.end());
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
  if (rank == 0) rank = 1;
  return v[rank - 1];
}

// Most frequent exact value; ties resolved toward the median, then upward.
// Inputs are discrete proportions (multiples of 1/reps), so exact equality is meaningful.
inline double mode_value(const std::vector<double>& values) {
  if (values.empty()) throw DataError("mode_value: empty input");
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double med = median(sorted);
  double best = sorted.front();
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    std::size_t count = j - i;
    bool take = count > best_count;
    if (count == best_count) {
      // Rounding in the midpoint median must not break the equidistant case,
      // so distances within a few ulps count as tied and the larger value wins.
      double d_new = std::abs(sorted[i] - med), d_old = std::abs(best - med);
      double tol = 8.0 * std::numeric_limits<double>::epsilon() *
                   (std::abs(med) + std::abs(sorted[i]) + std::abs(best));
      take = d_new < d_old - tol || (std::abs(d_new - d_old) <= tol && sorted[i] > best);
    }
    if (take) { best = sorted[i]; best_count = count; }
    i = j;
  }
  return best;
}

namespace detail {
// Ranks with ties sharing their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j - 1)) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}
}  // namespace detail

// Spearman rank correlation (average ranks for ties).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DataError("spearman: needs two equal-length arrays");
  std::vector<double> rx = detail::average_ranks(x), ry = detail::average_ranks(y);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) { mx += rx[i]; my += ry[i]; }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw NumericError("spearman: constant input");
  return sxy / std::sqrt(sxx * syy);
}

// Two-sided Kolmogorov-Smirnov distance between a sample and a reference CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DataError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace orthoinfer
