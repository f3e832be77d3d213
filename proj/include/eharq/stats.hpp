#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace eharq {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double p) const { return p >= lo && p <= hi; }
};

// Wilson score interval for a binomial proportion; z defaults to 95%.
inline Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959964) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be positive");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval: successes out of range");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Normal-approximation interval for a sample mean given the sample variance.
inline Interval mean_interval(double mean, double sample_variance, std::int64_t n,
                              double z = 1.959964) {
  if (n <= 1) return {mean, mean};
  const double half = z * std::sqrt(sample_variance / static_cast<double>(n));
  return {mean - half, mean + half};
}

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace eharq
