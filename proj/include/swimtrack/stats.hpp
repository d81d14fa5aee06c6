#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace swimtrack::stats {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of empty vector");
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

// One-sided sign test: probability of >= k successes out of n fair coin
// flips. Ties should be excluded by the caller before counting.
inline double sign_test_p(int k, int n) {
  if (n <= 0) return 1.0;
  double total = 0.0;
  for (int j = k; j <= n; ++j) {
    double c = 1.0;
    for (int i = 0; i < j; ++i) c = c * double(n - i) / double(i + 1);
    total += c;
  }
  return total / std::pow(2.0, n);
}

// Ordinary least-squares slope of y against 0..n-1 and its standard error.
struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
};

inline SlopeFit ols_slope(const std::vector<double>& y) {
  const std::size_t n = y.size();
  if (n < 3) throw std::invalid_argument("ols_slope needs >= 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += double(i);
    sy += y[i];
    sxx += double(i) * double(i);
    sxy += double(i) * y[i];
  }
  const double denom = double(n) * sxx - sx * sx;
  SlopeFit fit;
  fit.slope = (double(n) * sxy - sx * sy) / denom;
  const double b = (sy - fit.slope * sx) / double(n);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (b + fit.slope * double(i));
    sse += e * e;
  }
  const double s2 = sse / double(n - 2);
  fit.stderr_slope = std::sqrt(s2 * double(n) / denom);
  return fit;
}

}  // namespace swimtrack::stats
