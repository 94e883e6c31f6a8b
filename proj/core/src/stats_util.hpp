#pragma once

// Internal population-convention moment helpers. All sums, means, variances
// and covariances over a measurement path use the divide-by-N convention.

#include <cmath>
#include <cstddef>
#include <span>

namespace snq::detail {

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v, double mean_v) {
  double s = 0.0;
  for (double x : v) {
    const double d = x - mean_v;
    s += d * d;
  }
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) { return variance(v, mean(v)); }

inline double covariance(std::span<const double> a, std::span<const double> b,
                         double mean_a, double mean_b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - mean_a) * (b[i] - mean_b);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

inline double covariance(std::span<const double> a, std::span<const double> b) {
  return covariance(a, b, mean(a), mean(b));
}

}  // namespace snq::detail
