#pragma once

// Reference implementations used only by tests. Each oracle is written
// independently of the library code path it checks: the normal CDF uses a
// long-double Taylor series instead of erfc/rational approximations, and the
// bounce oracle enumerates reflection paths recursively instead of the
// library's queue-based walk.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Phi(x) = 1/2 + pdf(x) * (x + x^3/3 + x^5/15 + ...), evaluated in long
// double. Converges for all x; used for |x| <= 8 where it is good to ~1e-18.
inline long double normal_cdf_series(long double x) {
  long double term = x;
  long double sum = x;
  for (int k = 1; k < 500; ++k) {
    term *= x * x / static_cast<long double>(2 * k + 1);
    const long double prev = sum;
    sum += term;
    if (sum == prev) break;
  }
  const long double pdf =
      std::exp(-0.5L * x * x) / 2.506628274631000502415765284811045253007L;
  return 0.5L + pdf * sum;
}

// Inverts the series CDF by bisection; ~1e-17 accuracy for p away from 0/1.
inline long double inverse_normal_cdf_bisect(long double p) {
  long double lo = -9.0L;
  long double hi = 9.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (normal_cdf_series(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5L * (lo + hi);
}

// Exact binomial probability mass via log-gamma, summed over [k_lo, k_hi].
inline double binomial_cdf_range(long long n, double p, long long k_lo, long long k_hi) {
  k_lo = std::max<long long>(k_lo, 0);
  k_hi = std::min<long long>(k_hi, n);
  long double total = 0.0L;
  for (long long k = k_lo; k <= k_hi; ++k) {
    const long double logc = std::lgamma(static_cast<long double>(n + 1)) -
                             std::lgamma(static_cast<long double>(k + 1)) -
                             std::lgamma(static_cast<long double>(n - k + 1));
    const long double logp = logc + k * std::log(static_cast<long double>(p)) +
                             (n - k) * std::log(static_cast<long double>(1.0 - p));
    total += std::exp(logp);
  }
  return static_cast<double>(total);
}

}  // namespace oracle
