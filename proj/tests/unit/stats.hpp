#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace stats {

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample KS p-value of x against the standard normal.
inline double ks_normal_p(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double s = std::sqrt(n);
  return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

// Two-sample KS p-value on integer-valued samples over [0, levels).
inline double ks_two_sample_p(const std::vector<int>& a, const std::vector<int>& b,
                              int levels) {
  std::vector<double> ca(levels, 0.0), cb(levels, 0.0);
  for (int v : a) ca[v] += 1.0;
  for (int v : b) cb[v] += 1.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double fa = 0.0, fb = 0.0, d = 0.0;
  for (int k = 0; k < levels; ++k) {
    fa += ca[k] / na;
    fb += cb[k] / nb;
    d = std::max(d, std::fabs(fa - fb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

}  // namespace stats
