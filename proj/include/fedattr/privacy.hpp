#pragma once

#include <cstdint>
#include <vector>

#include "fedattr/estimator.hpp"
#include "fedattr/rng.hpp"

namespace fedattr {

// Per-round leakage of one released estimate, in nats.
struct LeakageAssessment {
  double c = 0.0;
  double m_eff = 0.0;
  int d_star = 0;
  double mi_gaussian = 0.0;  // +inf when c = 0
  double mi_bound = 0.0;     // Gaussian case, C_xi = 0
};

// (d_star / 2) ln(1 + 1/c). Zero for d_star = 0; DegenerateError for c <= 0.
double mi_gaussian_exact(double c, int d_star);

// (d_star / 2) ln(1 + 1/aN) + c_xi d_star / aN. Throws Error for aN <= 0.
double mi_bound(double a_n, int d_star, double c_xi = 0.0);

LeakageAssessment assess_leakage(const QueryDesign& design,
                                 const ProtocolConfig& cfg, int d_star);

enum class MiMethod { kHistogram, kCorrelation };

// Monte Carlo estimate of I(Delta_target; Delta_hat | design) for Gaussian
// fluctuations with the given diagonal covariance. Each coordinate with
// positive variance is an independent scalar channel; their MIs are summed.
// Per sample, every client in the design draws N(0, cov_diag) and the
// release is sum_j alpha[j] Delta_j (alpha[target] included as stored).
//
// kHistogram: equiprobable (rank) bins on both marginals, about cbrt(n) per
// axis, plug-in MI with the Miller-Madow correction.
// kCorrelation: -1/2 ln(1 - r^2) from the sample correlation.
//
// Throws InsufficientSamples for n_samples < 10^4 and Error for more than 3
// effective coordinates.
double mi_estimate_mc(const QueryDesign& design,
                      const std::vector<double>& cov_diag,
                      std::int64_t n_samples, Rng& rng,
                      MiMethod method = MiMethod::kHistogram);

// Histogram MI estimate of paired scalar samples.
double mi_histogram(const std::vector<double>& x, const std::vector<double>& y);
// Gaussian MI from the sample correlation of paired scalar samples.
double mi_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fedattr
