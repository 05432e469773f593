#pragma once

#include <cmath>

namespace admit {

inline double poisson_log_pmf(int i, double lambda) {
  if (i < 0) return -INFINITY;
  if (lambda <= 0.0) return i == 0 ? 0.0 : -INFINITY;
  return -lambda + i * std::log(lambda) - std::lgamma(i + 1.0);
}

inline double poisson_pmf(int i, double lambda) { return std::exp(poisson_log_pmf(i, lambda)); }

/// P(N >= k) for N ~ Poisson(lambda), summed upward from k. Terms past the
/// mode shrink geometrically, so the loop stops once they are negligible.
inline double poisson_upper_tail(int k, double lambda) {
  if (k <= 0) return 1.0;
  double total = 0.0;
  for (int i = k;; ++i) {
    const double term = poisson_pmf(i, lambda);
    total += term;
    if (i > lambda && term < 1e-18 * (total + 1e-300)) break;
    if (i > lambda && term == 0.0) break;
  }
  return total;
}

/// E[min(N, c)] for N ~ Poisson(lambda).
inline double expected_min_poisson(double lambda, int c) {
  double below = 0.0;  // sum_{i < c} i P_i
  double mass = 0.0;   // sum_{i < c} P_i
  for (int i = 0; i < c; ++i) {
    const double p = poisson_pmf(i, lambda);
    below += i * p;
    mass += p;
  }
  return below + c * (1.0 - mass);
}

}  // namespace admit
