#pragma once

// Reference computations for tests. These deliberately avoid the library's
// code paths: one-pass textbook sums in long double, definition-based
// quantiles, brute-force enumeration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace rtm::oracle {

// Slope of y on x from raw sums: (n Sxy - Sx Sy) / (n Sxx - Sx^2).
inline double ols_slope(std::span<const double> y, std::span<const double> x) {
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  return static_cast<double>((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  long double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  const auto n = static_cast<long double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += static_cast<long double>(a[i]) * a[i];
    sbb += static_cast<long double>(b[i]) * b[i];
    sab += static_cast<long double>(a[i]) * b[i];
  }
  return static_cast<double>((n * sab - sa * sb) /
                             std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb)));
}

inline double variance(std::span<const double> a) {
  long double s = 0, ss = 0;
  for (double v : a) {
    s += v;
    ss += static_cast<long double>(v) * v;
  }
  const auto n = static_cast<long double>(a.size());
  return static_cast<double>((ss - s * s / n) / (n - 1));
}

// Smallest order statistic whose empirical CDF reaches p.
inline double quantile_by_cdf(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (static_cast<double>(i + 1) / n >= p - 1e-12) return v[i];
  }
  return v.back();
}

// Exact two-sided permutation p-value by enumerating all orderings of b.
inline double exact_permutation_p(std::vector<double> a, std::vector<double> b) {
  const double r_obs = std::abs(pearson(a, b));
  std::sort(b.begin(), b.end());
  std::size_t hits = 0, total = 0;
  do {
    ++total;
    if (std::abs(pearson(a, b)) >= r_obs - 1e-12) ++hits;
  } while (std::next_permutation(b.begin(), b.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

inline double mean(std::span<const double> v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

}  // namespace rtm::oracle
